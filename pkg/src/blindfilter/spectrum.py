"""
Unitary DFT, spectral norms, discrete convolution and the implicit
convolution operators used by the recovery problems.

Conventions
-----------
The forward transform of a length-``N`` vector is

    [F z]_k = N^{-1/2} sum_t z_t exp(+2 pi i k t / N),

which is ``numpy.fft.ifft(z, norm="ortho")``; the inverse is
``numpy.fft.fft(f, norm="ortho")``. Multi-dimensional arrays are transformed
separably over every axis.

Signals and filters live on integer windows. A window is a tuple of
``(lo, hi)`` pairs, one per axis, both ends inclusive. Values outside the
window are zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator

Window = Tuple[Tuple[int, int], ...]
WindowLike = Union[Tuple[int, int], Sequence[Tuple[int, int]]]


class MissingDataError(ValueError):
    """Raised when an observation window does not cover what a filter touches."""

    def __init__(self, needed: Window, available: Window):
        self.needed = needed
        self.available = available
        super().__init__(
            f"observations needed on {_fmt_window(needed)} but only available on "
            f"{_fmt_window(available)}"
        )


def _fmt_window(w: Window) -> str:
    return " x ".join(f"[{lo}, {hi}]" for lo, hi in w)


def as_window(window: WindowLike) -> Window:
    """Normalize ``(lo, hi)`` or a sequence of such pairs to a window tuple."""
    if len(window) == 2 and all(np.isscalar(v) for v in window):
        window = [window]
    out = tuple((int(lo), int(hi)) for lo, hi in window)
    if not out:
        raise ValueError("window must have at least one axis")
    for lo, hi in out:
        if hi < lo:
            raise ValueError(f"empty window axis [{lo}, {hi}]")
    return out


def window_shape(window: Window) -> Tuple[int, ...]:
    return tuple(hi - lo + 1 for lo, hi in window)


def window_contains(outer: Window, inner: Window) -> bool:
    return len(outer) == len(inner) and all(
        olo <= ilo and ihi <= ohi for (olo, ohi), (ilo, ihi) in zip(outer, inner)
    )


@dataclass(frozen=True)
class Signal:
    """Complex samples on a rectangular integer window.

    Parameters
    ----------
    values : array_like
        Samples, with one array axis per window axis.
    window : tuple
        ``(lo, hi)`` (1-D) or a sequence of such pairs. If omitted, the
        window starts at index 0 on every axis.
    """

    values: np.ndarray
    window: Window = field(default=None)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim == 0:
            values = values.reshape(1)
        window = self.window
        if window is None:
            window = tuple((0, s - 1) for s in values.shape)
        window = as_window(window)
        if window_shape(window) != values.shape:
            raise ValueError(
                f"values of shape {values.shape} do not match window {_fmt_window(window)}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "window", window)

    @property
    def ndim(self) -> int:
        return len(self.window)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    def restrict(self, window: WindowLike) -> np.ndarray:
        """Samples on ``window``, which must lie inside the signal window."""
        window = as_window(window)
        if not window_contains(self.window, window):
            raise MissingDataError(window, self.window)
        sl = tuple(
            slice(lo - slo, hi - slo + 1) for (lo, hi), (slo, _) in zip(window, self.window)
        )
        return self.values[sl]

    def extend(self, window: WindowLike) -> np.ndarray:
        """Samples on ``window`` with explicit zero-extension outside the signal window."""
        window = as_window(window)
        out = np.zeros(window_shape(window), dtype=complex)
        src, dst = [], []
        for (lo, hi), (slo, shi) in zip(window, self.window):
            a, b = max(lo, slo), min(hi, shi)
            if a > b:
                return out
            src.append(slice(a - slo, b - slo + 1))
            dst.append(slice(a - lo, b - lo + 1))
        out[tuple(dst)] = self.values[tuple(src)]
        return out

    def reversed(self) -> "Signal":
        """Time reversal ``t -> -t`` on every axis."""
        window = tuple((-hi, -lo) for lo, hi in self.window)
        return Signal(self.values[(slice(None, None, -1),) * self.ndim], window)


@dataclass(frozen=True)
class Filter(Signal):
    """Filter coefficients on a support window (``[0, m]`` causal, ``[-m, m]`` two-sided)."""

    @property
    def support(self) -> Window:
        return self.window

    @property
    def coeffs(self) -> np.ndarray:
        return self.values

    @classmethod
    def delta(cls, support: WindowLike = (0, 0)) -> "Filter":
        support = as_window(support)
        values = np.zeros(window_shape(support), dtype=complex)
        values[tuple(-lo for lo, _ in support)] = 1.0
        return cls(values, support)

    def spectral_l1(self) -> float:
        """``||F phi||_1`` over the support (invariant to where the support starts)."""
        return float(np.abs(dft(self.values)).sum())

    def budget(self) -> float:
        """Spectral l1 scaled by ``sqrt(support size)``, the quantity bounded by rho-bar."""
        return float(np.sqrt(self.values.size) * self.spectral_l1())


def _check_nonempty(z: np.ndarray):
    if z.size == 0 or 0 in z.shape:
        raise ValueError("transform of an empty array")


def dft(z) -> np.ndarray:
    """Unitary DFT with the ``exp(+2 pi i k t / N)`` kernel over every axis."""
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    _check_nonempty(z)
    return np.fft.ifftn(z, norm="ortho")


def idft(f) -> np.ndarray:
    """Inverse of :func:`dft` (its Hermitian adjoint)."""
    f = np.asarray(f, dtype=complex)
    if f.ndim == 0:
        f = f.reshape(1)
    _check_nonempty(f)
    return np.fft.fftn(f, norm="ortho")


def dft_matrix(n: int) -> np.ndarray:
    """Dense unitary DFT matrix of size ``n`` (test and small-problem helper)."""
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def spectral_norm(x, p: float = 1.0) -> float:
    """``||F x||_p`` for samples ``x`` (a :class:`Signal` or an array on ``[0, n]``)."""
    if p < 1:
        raise ValueError("p must be in [1, inf]")
    values = x.values if isinstance(x, Signal) else x
    f = np.abs(dft(values)).ravel()
    if np.isinf(p):
        return float(f.max())
    return float(np.sum(f**p) ** (1.0 / p))


def required_window(support: Window, target: Window) -> Window:
    """Observation window touched when evaluating a filter on ``target``."""
    return tuple((tlo - shi, thi - slo) for (slo, shi), (tlo, thi) in zip(support, target))


def convolve(u: Filter, v: Signal, out_window: WindowLike, zero_extend: bool = False) -> Signal:
    """Discrete convolution ``[u * v]_t = sum_tau u_tau v_{t - tau}`` on ``out_window``.

    The observations must cover ``out_window - support(u)`` unless
    ``zero_extend`` is set, in which case samples outside ``v.window`` are zero.
    """
    out_window = as_window(out_window)
    if len(out_window) != v.ndim or u.ndim != v.ndim:
        raise ValueError("dimension mismatch between filter, signal and output window")
    need = required_window(u.support, out_window)
    seg = v.extend(need) if zero_extend else v.restrict(need)
    op = ConvolutionOperator.toeplitz(Signal(seg, need), u.support, out_window)
    return Signal(op.matvec(u.values.ravel()).reshape(window_shape(out_window)), out_window)


class ConvolutionOperator(LinearOperator):
    """FFT-backed convolution maps realizing ``T(y)``, ``M(phi)`` and ``C(phi)``.

    All three kinds are circular convolutions of a periodic length-``P``
    sequence whose valid part equals the linear result:

    * ``toeplitz``: ``phi -> [phi * y]`` on the target window (the columns of
      ``T(y)``); input is the filter, flattened.
    * ``banded``: ``y -> [phi * y]_0^n`` for a causal ``phi`` (``M(phi)``);
      input is ``y`` on ``[-m, n]``.
    * ``circulant``: circular convolution of length ``N`` with the zero-padded
      filter, ``F^H diag(sqrt(N) F phi) F``.

    Build instances with the classmethods.
    """

    def __init__(self, kind, kernel_hat, in_shape, out_shape, in_slices, out_slices, period, data):
        self.kind = kind
        self._kernel_hat = kernel_hat
        self._kernel_hat_conj = np.conj(kernel_hat)
        self.in_shape = tuple(in_shape)
        self.out_shape = tuple(out_shape)
        self._in_slices = in_slices
        self._out_slices = out_slices
        self._period = tuple(period)
        self.data = data
        super().__init__(dtype=complex, shape=(int(np.prod(out_shape)), int(np.prod(in_shape))))

    # --- constructors -------------------------------------------------------

    @classmethod
    def toeplitz(cls, y: Signal, support: WindowLike, target: WindowLike) -> "ConvolutionOperator":
        """``phi -> [phi * y]`` on ``target`` for filters on ``support``."""
        support, target = as_window(support), as_window(target)
        need = required_window(support, target)
        seg = y.restrict(need)
        period = seg.shape
        fshape = window_shape(support)
        in_slices = tuple(slice(0, s) for s in fshape)
        out_slices = tuple(slice(s - 1, p) for s, p in zip(fshape, period))
        return cls(
            "toeplitz",
            np.fft.fftn(seg),
            fshape,
            window_shape(target),
            in_slices,
            out_slices,
            period,
            {"y": y, "support": support, "target": target},
        )

    @classmethod
    def banded(cls, phi, n: int) -> "ConvolutionOperator":
        """``M(phi)``: ``y_{-m}^n -> [phi * y]_0^n`` for causal 1-D ``phi``."""
        phi = np.asarray(phi.values if isinstance(phi, Signal) else phi, dtype=complex).ravel()
        m = phi.size - 1
        period = (m + n + 1,)
        kernel = np.zeros(period, dtype=complex)
        kernel[: m + 1] = phi
        return cls(
            "banded",
            np.fft.fftn(kernel),
            period,
            (n + 1,),
            (slice(0, m + n + 1),),
            (slice(m, m + n + 1),),
            period,
            {"phi": phi, "n": n},
        )

    @classmethod
    def circulant(cls, phi, size: int) -> "ConvolutionOperator":
        """Circular convolution of length ``size`` with the zero-padded filter."""
        phi = np.asarray(phi.values if isinstance(phi, Signal) else phi, dtype=complex).ravel()
        if phi.size > size:
            raise ValueError("circulant size smaller than the filter")
        kernel = np.zeros(size, dtype=complex)
        kernel[: phi.size] = phi
        full = (slice(0, size),)
        return cls("circulant", np.fft.fftn(kernel), (size,), (size,), full, full, (size,), {"phi": phi})

    # --- LinearOperator protocol --------------------------------------------

    def _matvec(self, v):
        v = np.asarray(v, dtype=complex).reshape(self.in_shape)
        buf = np.zeros(self._period, dtype=complex)
        buf[self._in_slices] = v
        out = np.fft.ifftn(np.fft.fftn(buf) * self._kernel_hat)
        return out[self._out_slices].ravel()

    def _rmatvec(self, w):
        w = np.asarray(w, dtype=complex).reshape(self.out_shape)
        buf = np.zeros(self._period, dtype=complex)
        buf[self._out_slices] = w
        out = np.fft.ifftn(np.fft.fftn(buf) * self._kernel_hat_conj)
        return out[self._in_slices].ravel()

    def _adjoint(self):
        return _Adjoint(self)

    def todense(self) -> np.ndarray:
        """Explicit matrix, built column by column (small sizes only)."""
        eye = np.eye(self.shape[1], dtype=complex)
        return np.column_stack([self.matvec(e) for e in eye])


class _Adjoint(LinearOperator):
    def __init__(self, op):
        self._op = op
        super().__init__(dtype=complex, shape=(op.shape[1], op.shape[0]))

    def _matvec(self, v):
        return self._op.rmatvec(v)

    def _rmatvec(self, v):
        return self._op.matvec(v)


def spectral_operator(y: Signal, support: WindowLike, target: WindowLike) -> LinearOperator:
    """``A = T(y) F^{-1}``: maps the filter spectrum ``f = F phi`` to ``[phi * y]`` on target."""
    T = ConvolutionOperator.toeplitz(y, support, target)
    fshape = T.in_shape

    def matvec(f):
        return T.matvec(idft(np.asarray(f).reshape(fshape)).ravel())

    def rmatvec(r):
        return dft(T.rmatvec(r).reshape(fshape)).ravel()

    return LinearOperator(T.shape, matvec=matvec, rmatvec=rmatvec, dtype=complex)


# --- explicit dense matrices, used as test oracles ---------------------------


def toeplitz_matrix(y: Signal, m: int, n: int) -> np.ndarray:
    """Dense ``(n+1) x (m+1)`` matrix with entries ``y_{i-j}``."""
    col = y.restrict((-m, n))
    return np.array([[col[i - j + m] for j in range(m + 1)] for i in range(n + 1)])


def banded_matrix(phi, n: int) -> np.ndarray:
    """Dense ``(n+1) x (m+n+1)`` matrix ``M(phi)``: row ``i`` holds ``phi_m .. phi_0`` from column ``i``."""
    phi = np.asarray(phi, dtype=complex).ravel()
    m = phi.size - 1
    M = np.zeros((n + 1, m + n + 1), dtype=complex)
    for i in range(n + 1):
        M[i, i : i + m + 1] = phi[::-1]
    return M


def circulant_matrix(phi, size: int, row_shift: int = 0) -> np.ndarray:
    """Dense circulant with ``C[i, j] = phi_{(i + row_shift - j) mod size}``.

    ``row_shift = 0`` is the circulant diagonalized by the DFT; ``row_shift = m``
    gives the layout whose first ``n + 1`` rows coincide with ``M(phi)``.
    """
    phi = np.asarray(phi, dtype=complex).ravel()
    c = np.zeros(size, dtype=complex)
    c[: phi.size] = phi
    i = np.arange(size)
    return c[(i[:, None] + row_shift - i[None, :]) % size]


def circulant_diagonal(phi, size: int) -> np.ndarray:
    """Eigenvalues ``sqrt(size) * F phi_0^{size-1}`` of the circulant."""
    phi = np.asarray(phi, dtype=complex).ravel()
    c = np.zeros(size, dtype=complex)
    c[: phi.size] = phi
    return np.sqrt(size) * dft(c)


def frobenius_identities_check(y: Optional[Signal] = None, phi=None, m: int = None, n: int = None) -> dict:
    """Residuals of the Frobenius-norm identities for ``T(y)`` and ``M(phi)``.

    ``||T(y)||_F^2 = sum_{tau=0}^m ||y_{-tau}^{n-tau}||^2`` and
    ``||M(phi)||_F^2 = (n+1) ||phi||^2``. The dense matrices are formed from the
    implicit operators, so the check covers the FFT matvecs as well.
    """
    report = {}
    if y is not None:
        T = ConvolutionOperator.toeplitz(y, (0, m), (0, n)).todense()
        lhs = float(np.sum(np.abs(T) ** 2))
        rhs = float(sum(np.sum(np.abs(y.restrict((-tau, n - tau))) ** 2) for tau in range(m + 1)))
        report["toeplitz"] = {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)}
    if phi is not None:
        phi = np.asarray(phi, dtype=complex).ravel()
        M = ConvolutionOperator.banded(phi, n).todense()
        lhs = float(np.sum(np.abs(M) ** 2))
        rhs = float((n + 1) * np.sum(np.abs(phi) ** 2))
        report["banded"] = {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)}
    return report


def zero_padded_extreme_norms(m: int, n: int) -> np.ndarray:
    """``||u^j||*_{m+n,1}`` for every extreme point ``u^j_0^m = F_m^{-1} e_j``.

    Each ``u^j`` is zero-padded to length ``m + n + 1`` before taking the
    spectral l1 norm. Row ``j`` of the batched transform is ``u^j``.
    """
    U = np.zeros((m + 1, m + n + 1), dtype=complex)
    U[:, : m + 1] = np.fft.fft(np.eye(m + 1, dtype=complex), axis=0, norm="ortho").T
    return np.abs(np.fft.ifft(U, axis=1, norm="ortho")).sum(axis=1)


def zero_padding_bound(m: int, n: int) -> float:
    """``sqrt(1 + kappa^2) (ln(m+n+1) + 3)`` with ``kappa^2 = (n+1)/(m+1)``."""
    return float(np.sqrt(1.0 + (n + 1) / (m + 1)) * (np.log(m + n + 1) + 3.0))
