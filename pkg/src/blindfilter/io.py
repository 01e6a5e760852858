"""
CSV exchange format for signals and filters.

1-D files have the header ``index,re,im`` and 2-D files ``row,col,re,im``.
Indices are absolute, so a filter on ``[-m, m]`` or a signal observed on
``[-m, n]`` round-trips with its window. Indices must form a full
contiguous window; missing entries are an error rather than implicit zeros.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Union

import numpy as np

from .spectrum import Filter, Signal

PathLike = Union[str, Path]

HEADER_1D = ["index", "re", "im"]
HEADER_2D = ["row", "col", "re", "im"]


def _rows(sig: Signal):
    if sig.ndim == 1:
        lo = sig.window[0][0]
        for k, v in enumerate(sig.values):
            yield [lo + k, repr(float(v.real)), repr(float(v.imag))]
    else:
        (r0, _), (c0, _) = sig.window
        for (i, j), v in np.ndenumerate(sig.values):
            yield [r0 + i, c0 + j, repr(float(v.real)), repr(float(v.imag))]


def write_signal(path: PathLike, sig: Signal) -> None:
    """Write a 1-D or 2-D signal (or filter) as CSV."""
    if sig.ndim not in (1, 2):
        raise ValueError("only 1-D and 2-D signals can be written")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HEADER_1D if sig.ndim == 1 else HEADER_2D)
        w.writerows(_rows(sig))


def read_signal(path: PathLike) -> Signal:
    """Read a signal written by :func:`write_signal` (or any file with the same header)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        rows = [r for r in reader if r]
    if header == HEADER_1D:
        nidx = 1
    elif header == HEADER_2D:
        nidx = 2
    else:
        raise ValueError(f"{path}: expected header {HEADER_1D} or {HEADER_2D}, got {header}")
    if not rows:
        raise ValueError(f"{path}: no samples")
    try:
        idx = np.array([[int(c) for c in r[:nidx]] for r in rows])
        vals = np.array([float(r[nidx]) + 1j * float(r[nidx + 1]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    lo, hi = idx.min(axis=0), idx.max(axis=0)
    shape = tuple(hi - lo + 1)
    if int(np.prod(shape)) != len(rows):
        raise ValueError(f"{path}: indices do not form a full window")
    values = np.full(shape, np.nan + 0j)
    values[tuple((idx - lo).T)] = vals
    if np.isnan(values.real).any():
        raise ValueError(f"{path}: duplicate or missing indices")
    return Signal(values, tuple((int(a), int(b)) for a, b in zip(lo, hi)))


def read_filter(path: PathLike) -> Filter:
    sig = read_signal(path)
    return Filter(sig.values, sig.window)
