"""
Filter-based recovery of a signal from its noisy observations.

The estimate on a target window is ``x_hat = phi_hat * y`` where the filter
minimizes the residual ``||y - phi * y||`` on the target, either inside the
spectral l1 ball

    sqrt(M) ||F phi||_1 <= rho_bar                              (constrained)

or penalized,

    ||y - phi * y||^2 + lam sqrt(M) ||F phi||_1                 (penalized)

where ``M`` is the number of filter coefficients. The optimization runs over
``f = F phi``, with ``A = T(y) F^{-1}`` applied through FFTs.

Layouts
-------
* causal: support ``[0, m]`` per axis, target ``[0, n]`` (``y`` on ``[-m, n]``);
* interpolating: support ``[-m, m]``, target is the observation window
  shrunk by ``m``; with ``shift_boundary`` the edges use the shifted supports
  ``[-2m, 0]`` / ``[0, 2m]`` so the whole window is recovered;
* blockwise: the target is tiled; each block gets its own filter, or one
  filter per half-block (per orthant in 2-D) oriented toward the block
  interior.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .solver import LeastSquaresSpec, SolverOptions, SolverResult, solve_constrained, solve_penalized
from .spectrum import (
    Filter,
    MissingDataError,
    Signal,
    Window,
    as_window,
    idft,
    required_window,
    spectral_operator,
    window_contains,
    window_shape,
)

IntOrTuple = Union[int, Tuple[int, ...]]


def lambda_rule(n: int, sigma: float, alpha: float = 0.1, which: str = "experiment") -> float:
    """Penalty level: ``60 sigma^2 ln(63 n / alpha)`` (theory) or ``2 sigma^2 ln(63 n / alpha)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    factor = {"theory": 60.0, "experiment": 2.0}.get(which)
    if factor is None:
        raise ValueError("lambda rule must be 'theory' or 'experiment'")
    return factor * sigma**2 * np.log(63.0 * n / alpha)


@dataclass
class RecoveryConfig:
    """Parameters of a recovery call.

    ``m``, ``n`` and ``block_size`` accept an int (same on every axis) or one
    value per axis. Exactly one of ``rho_bar`` (constrained) or
    ``lam``/``lambda_rule`` (penalized) is used, according to ``mode``.
    ``lambda_n`` is the sample count in the penalty rule (default: number of
    target samples).
    """

    mode: str = "penalized"
    m: Optional[IntOrTuple] = None
    n: Optional[IntOrTuple] = None
    rho_bar: Optional[float] = None
    lam: Optional[float] = None
    lambda_rule: Optional[str] = "experiment"
    sigma: float = 0.0
    alpha: float = 0.1
    lambda_n: Optional[int] = None
    interpolating: bool = False
    shift_boundary: bool = False
    block_size: Optional[IntOrTuple] = None
    halves: bool = True
    solver: SolverOptions = field(default_factory=SolverOptions)
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("constrained", "penalized"):
            raise ValueError("mode must be 'constrained' or 'penalized'")
        if self.mode == "constrained":
            if self.rho_bar is None:
                raise ValueError("constrained mode needs rho_bar")
            if self.rho_bar < 1:
                raise ValueError("rho_bar must be >= 1")
        else:
            if self.lam is None and self.lambda_rule is None:
                raise ValueError("penalized mode needs lam or lambda_rule")
            if self.lam is not None and self.lam < 0:
                raise ValueError("lambda must be non-negative")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")

    def penalty(self, samples: int) -> float:
        if self.lam is not None:
            return float(self.lam)
        return lambda_rule(self.lambda_n or samples, self.sigma, self.alpha, self.lambda_rule)


@dataclass
class FilterFit:
    """One fitted filter and the part of the target it produced."""

    target: Window
    filter: Filter
    x_hat: Signal
    solver: SolverResult

    @property
    def budget(self) -> float:
        return self.filter.budget()


@dataclass
class RecoveryReport:
    x_hat: Signal
    fits: List[FilterFit]
    residual: float
    converged: bool
    imag_residual: Optional[float] = None

    @property
    def filter(self) -> Filter:
        """The filter of a single-fit recovery."""
        if len(self.fits) != 1:
            raise AttributeError("recovery used several filters; see .fits")
        return self.fits[0].filter

    @property
    def spectral_l1(self) -> float:
        """``sqrt(M) ||F phi_hat||_1`` (largest over the fitted filters)."""
        return max(fit.budget for fit in self.fits)

    @property
    def solver(self) -> List[SolverResult]:
        return [fit.solver for fit in self.fits]


def _per_axis(v: IntOrTuple, ndim: int) -> Tuple[int, ...]:
    if np.isscalar(v):
        return (int(v),) * ndim
    v = tuple(int(a) for a in v)
    if len(v) != ndim:
        raise ValueError(f"expected {ndim} values, got {len(v)}")
    return v


def fit_filter(y: Signal, support, target, cfg: RecoveryConfig, penalty: Optional[float] = None) -> FilterFit:
    """Solve one recovery problem for filters on ``support`` evaluated on ``target``."""
    support, target = as_window(support), as_window(target)
    need = required_window(support, target)
    if not window_contains(y.window, need):
        raise MissingDataError(need, y.window)
    A = spectral_operator(y, support, target)
    spec = LeastSquaresSpec(A, y.restrict(target).ravel())
    msize = int(np.prod(window_shape(support)))
    if cfg.mode == "constrained":
        res = solve_constrained(spec, cfg.rho_bar / np.sqrt(msize), cfg.solver)
    else:
        lam = cfg.penalty(int(np.prod(window_shape(target)))) if penalty is None else penalty
        res = solve_penalized(spec, lam * np.sqrt(msize), cfg.solver)
    fshape = window_shape(support)
    phi = Filter(idft(res.f_hat.reshape(fshape)), support)
    x_hat = Signal(A.matvec(res.f_hat).reshape(window_shape(target)), target)
    return FilterFit(target, phi, x_hat, res)


def _assemble(y: Signal, target: Window, fits: Sequence[FilterFit]) -> RecoveryReport:
    values = np.zeros(window_shape(target), dtype=complex)
    for fit in fits:
        sl = tuple(slice(lo - tlo, hi - tlo + 1) for (lo, hi), (tlo, _) in zip(fit.target, target))
        values[sl] = fit.x_hat.values
    imag = None
    if np.all(y.values.imag == 0):
        imag = float(np.linalg.norm(values.imag))
        values = values.real.astype(complex)
    x_hat = Signal(values, target)
    residual = float(np.linalg.norm(y.restrict(target) - values))
    return RecoveryReport(x_hat, list(fits), residual, all(f.solver.converged for f in fits), imag)


def _run(y, jobs, cfg, penalty):
    def one(job):
        support, tgt = job
        return fit_filter(y, support, tgt, cfg, penalty)

    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            return list(pool.map(one, jobs))
    return [one(job) for job in jobs]


def _causal(y: Signal, cfg: RecoveryConfig) -> RecoveryReport:
    if cfg.m is None:
        raise ValueError("causal recovery needs the filter order m")
    m = _per_axis(cfg.m, y.ndim)
    n = _per_axis(cfg.n, y.ndim) if cfg.n is not None else tuple(2 * a for a in m)
    support = tuple((0, a) for a in m)
    target = tuple((0, b) for b in n)
    fit = fit_filter(y, support, target, cfg)
    return _assemble(y, target, [fit])


def recover_constrained(y: Signal, cfg: RecoveryConfig) -> RecoveryReport:
    """Causal constrained recovery on ``[0, n]`` (default ``n = 2m``); ``y`` must cover ``[-m, n]``."""
    if cfg.mode != "constrained":
        raise ValueError("cfg.mode must be 'constrained'")
    return _causal(y, cfg)


def recover_penalized(y: Signal, cfg: RecoveryConfig) -> RecoveryReport:
    """Causal penalized recovery on ``[0, n]`` (default ``n = 2m``); ``y`` must cover ``[-m, n]``."""
    if cfg.mode != "penalized":
        raise ValueError("cfg.mode must be 'penalized'")
    return _causal(y, cfg)


def recover_interpolating(y: Signal, cfg: RecoveryConfig) -> RecoveryReport:
    """Two-sided filters on ``[-m, m]``.

    Without ``shift_boundary`` the target is ``y.window`` shrunk by ``m`` on
    every side. With it, the whole observation window is recovered; the
    ``m`` samples nearest each edge use a filter of the same length shifted
    to ``[-2m, 0]`` (left edge) or ``[0, 2m]`` (right edge).
    """
    if cfg.m is None:
        raise ValueError("interpolating recovery needs the filter half-width m")
    m = _per_axis(cfg.m, y.ndim)
    if not cfg.shift_boundary:
        target = tuple((lo + a, hi - a) for (lo, hi), a in zip(y.window, m))
        if any(hi < lo for lo, hi in target):
            raise MissingDataError(target, y.window)
        support = tuple((-a, a) for a in m)
        penalty = cfg.penalty(int(np.prod(window_shape(target)))) if cfg.mode == "penalized" else None
        return _assemble(y, target, [fit_filter(y, support, target, cfg, penalty)])

    segments = []
    for (lo, hi), a in zip(y.window, m):
        if hi - lo + 1 < 3 * a:
            raise ValueError("shifted boundary filters need at least 3m samples per axis")
        axis = []
        if a > 0:
            axis.append(((-2 * a, 0), (lo, lo + a - 1)))
        axis.append(((-a, a), (lo + a, hi - a)))
        if a > 0:
            axis.append(((0, 2 * a), (hi - a + 1, hi)))
        segments.append(axis)
    jobs = [tuple(zip(*combo)) for combo in itertools.product(*segments)]
    target = y.window
    penalty = cfg.penalty(int(np.prod(window_shape(target)))) if cfg.mode == "penalized" else None
    return _assemble(y, target, _run(y, jobs, cfg, penalty))


def recover_blockwise(y: Signal, cfg: RecoveryConfig, target: Optional[Window] = None) -> RecoveryReport:
    """Tile ``target`` (default ``y.window``) into blocks and fit each independently.

    With ``cfg.halves`` every block axis is split at its midpoint; the right
    part uses a causal filter on ``[0, m]`` and the left part an anticausal
    one on ``[-m, 0]``, so a block of length ``2m + 1`` only uses its own
    samples. Without halves each block gets one causal filter and needs ``m``
    samples of margin on the left. ``m`` defaults to half the block length.
    """
    target = as_window(target) if target is not None else y.window
    shape = window_shape(target)
    block = _per_axis(cfg.block_size, y.ndim) if cfg.block_size is not None else shape
    if any(b < 1 for b in block):
        raise ValueError("block size must be positive")
    m = _per_axis(cfg.m, y.ndim) if cfg.m is not None else tuple(b // 2 for b in block)

    axes = []
    for (lo, hi), b, a in zip(target, block, m):
        starts = range(lo, hi + 1, b)
        pieces = []
        for s0 in starts:
            s1 = min(s0 + b - 1, hi)
            if cfg.halves and s1 > s0:
                c = s0 + (s1 - s0 + 1) // 2
                pieces.append(((-a, 0), (s0, c - 1)))
                pieces.append(((0, a), (c, s1)))
            else:
                pieces.append(((0, a), (s0, s1)))
        axes.append(pieces)
    jobs = [tuple(zip(*combo)) for combo in itertools.product(*axes)]
    for support, tgt in jobs:
        need = required_window(support, tgt)
        if not window_contains(y.window, need):
            raise MissingDataError(need, y.window)
    penalty = cfg.penalty(int(np.prod(shape))) if cfg.mode == "penalized" else None
    return _assemble(y, target, _run(y, jobs, cfg, penalty))


def recover(y: Signal, cfg: RecoveryConfig) -> RecoveryReport:
    """Dispatch on the configuration: blockwise, interpolating or causal."""
    if cfg.block_size is not None:
        return recover_blockwise(y, cfg)
    if cfg.interpolating:
        return recover_interpolating(y, cfg)
    if cfg.n is None and cfg.m is None:
        return recover_blockwise(y, cfg)
    return _causal(y, cfg)
