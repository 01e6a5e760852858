"""
Oracle filters for signals in shift-invariant subspaces.

A subspace closed under the right shift ``[Delta x]_t = x_{t-1}`` is the
solution set of a difference equation ``p(Delta) x = 0`` with
``p(0) = 1``. This module converts between the two descriptions and builds
filters ``phi`` reproducing every element of the subspace, ``phi * x = x``:

* :func:`projector_column_filter`, a two-sided filter taken from a column
  of the orthogonal projector onto the subspace restricted to ``[0, n]``;
* :func:`unit_circle_filter`, a causal filter with ``q_0 = 0`` for
  polynomials whose roots all lie on the unit circle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .spectrum import Filter, Signal, as_window, convolve, dft, spectral_norm


class NotShiftInvariantError(ValueError):
    """The basis does not satisfy any difference equation of its dimension."""

    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = certificate


@dataclass(frozen=True)
class CharPoly:
    """Coefficients ``p_0 .. p_s`` (ascending, ``p_0 = 1``) of ``p(z) = sum p_k z^k``."""

    coeffs: np.ndarray
    root_list: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coeffs, dtype=complex), "b")
        if c.size < 2:
            raise ValueError("characteristic polynomial must have degree >= 1")
        if c[0] == 0:
            raise ValueError("p(0) must be nonzero")
        c = c / c[0]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self.root_list is not None:
            r = np.asarray(self.root_list, dtype=complex).ravel()
            if r.size != c.size - 1:
                raise ValueError("root list length must equal the degree")
            expanded = np.poly(r)[::-1]
            expanded = expanded / expanded[0]
            if np.abs(expanded - c).max() > 1e-8 * max(1.0, np.abs(c).max()):
                raise ValueError("root list does not reproduce the coefficients")
            r.setflags(write=False)
            object.__setattr__(self, "root_list", r)

    @classmethod
    def from_roots(cls, roots: Sequence[complex]) -> "CharPoly":
        """``p(z) = prod (1 - z / z_k)``."""
        roots = np.asarray(roots, dtype=complex)
        if np.any(roots == 0):
            raise ValueError("p(0) = 1 excludes a root at zero")
        return cls(np.poly(roots)[::-1], roots)

    @classmethod
    def from_frequencies(cls, omegas: Sequence[float]) -> "CharPoly":
        """``prod (1 - e^{i omega_k} z)``, annihilating the oscillations ``e^{i omega_k t}``."""
        return cls.from_roots(np.exp(-1j * np.asarray(omegas, dtype=float)))

    @classmethod
    def polynomial(cls, s: int) -> "CharPoly":
        """``(1 - z)^s``: discrete-time polynomials of degree ``s - 1``."""
        return cls.from_roots(np.ones(s))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def roots(self) -> np.ndarray:
        if self.root_list is not None:
            return self.root_list
        return np.roots(self.coeffs[::-1])

    def on_unit_circle(self, tol: float = 1e-8) -> bool:
        return bool(np.all(np.abs(np.abs(self.roots()) - 1.0) <= tol))

    def apply(self, x: Signal) -> Signal:
        """``p(Delta) x`` on the part of ``x.window`` where it is defined (1-D)."""
        (lo, hi), = x.window
        if hi - lo < self.degree:
            raise ValueError("signal shorter than the polynomial degree")
        return convolve(Filter(self.coeffs, (0, self.degree)), x, (lo + self.degree, hi))


@dataclass
class SubspaceModel:
    """A shift-invariant subspace, through its polynomial and/or a basis on a window.

    ``kappa`` records how far a signal is from the subspace in noise units.
    """

    poly: Optional[CharPoly] = None
    basis: Optional[np.ndarray] = None
    window: tuple = (0, 0)
    kappa: float = 0.0

    def __post_init__(self):
        self.window = as_window(self.window)[0]
        if self.basis is None:
            if self.poly is None:
                raise ValueError("need a polynomial or a basis")
            self.basis = subspace_from_poly(self.poly, self.window)
        self.basis = np.asarray(self.basis, dtype=complex)
        if self.basis.ndim == 1:
            self.basis = self.basis[:, None]
        lo, hi = self.window
        if self.basis.shape[0] != hi - lo + 1:
            raise ValueError("basis rows do not match the window length")
        if not 1 <= self.dim <= self.basis.shape[0]:
            raise ValueError("invalid subspace dimension")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return orthogonal_projector(self.basis)


def subspace_from_poly(p: CharPoly, window=(0, 64)) -> np.ndarray:
    """Solution basis of ``p(Delta) x = 0`` on ``window``.

    Column ``j`` is the solution with ``x_1 .. x_s = e_j``; the recurrence is
    run forward and backward from those seeds.
    """
    lo, hi = as_window(window)[0]
    c = p.coeffs
    s = p.degree
    a, b = min(lo, 1), max(hi, s)
    X = np.zeros((b - a + 1, s), dtype=complex)
    seed = 1 - a
    X[seed : seed + s] = np.eye(s)
    for t in range(seed + s, b - a + 1):
        X[t] = -c[1:] @ X[t - 1 : t - s - 1 if t - s - 1 >= 0 else None : -1]
    for t in range(seed - 1, -1, -1):
        # x_t = -(sum_{k<s} p_k x_{t+s-k}) / p_s
        X[t] = -(c[:s] @ X[t + s : t : -1]) / c[s]
    return X[lo - a : hi - a + 1]


def poly_from_subspace(basis, tol: float = 1e-8) -> CharPoly:
    """Unique ``p`` with ``p(0) = 1`` and ``deg p = s`` annihilating every basis column.

    Raises :class:`NotShiftInvariantError` (with the worst ``p(Delta) x`` as
    certificate) when no such polynomial fits.
    """
    X = np.asarray(basis, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    N, s = X.shape
    if np.linalg.matrix_rank(X) < s:
        raise ValueError("basis is rank deficient")
    if N < 2 * s + 1:
        raise ValueError("window too short to identify a degree-s recurrence")
    # sum_{k=1}^s p_k x_{t-k} = -x_t for t = s .. N-1, all columns
    rows = np.concatenate(
        [np.column_stack([X[s - k : N - k, j] for k in range(1, s + 1)]) for j in range(s)]
    )
    rhs = -np.concatenate([X[s:, j] for j in range(s)])
    sol, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    resid = rows @ sol - rhs
    scale = max(1.0, np.abs(rhs).max())
    if np.abs(resid).max() > tol * scale * max(1.0, np.abs(sol).max()):
        worst = int(np.argmax([np.linalg.norm(r) for r in np.split(resid, s)]))
        raise NotShiftInvariantError(
            "basis is not the solution set of a degree-%d difference equation" % s,
            np.split(resid, s)[worst],
        )
    return CharPoly(np.concatenate([[1.0], sol]))


def orthogonal_projector(basis) -> np.ndarray:
    X = np.asarray(basis, dtype=complex)
    Q, R = np.linalg.qr(X)
    d = np.abs(np.diag(R))
    if d.min() <= 1e-12 * d.max():
        raise ValueError("basis is rank deficient")
    return Q @ Q.conj().T


def projector_column_filter(basis, n: Optional[int] = None) -> Filter:
    """Two-sided reproducing filter on ``[-n, n]`` from the projector onto ``span(basis)``.

    ``basis`` holds samples on ``[0, n]``. The column ``iota`` of the projector
    with the smallest norm (first one on ties) gives
    ``x_tau = sum_j Pi[iota, j] x_{tau - iota + j}``, i.e. the filter
    ``phi_{iota - j} = Pi[iota, j]``, with ``||phi||_2 <= sqrt(s / (n+1))``.
    """
    X = np.asarray(basis, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    if n is None:
        n = X.shape[0] - 1
    if X.shape[0] != n + 1:
        raise ValueError("basis must have n + 1 rows")
    if X.shape[1] > n + 1:
        raise ValueError("need n >= s - 1")
    Pi = orthogonal_projector(X)
    col_norms = np.sqrt(np.maximum(np.real(np.diag(Pi)), 0.0))
    iota = int(np.argmin(col_norms))
    coeffs = np.zeros(2 * n + 1, dtype=complex)
    j = np.arange(n + 1)
    coeffs[iota - j + n] = Pi[iota, j]
    return Filter(coeffs, (-n, n))


@dataclass
class UnitCircleReport:
    s: int
    m: int
    ell: int
    alpha: float
    epsilon: float
    delta: float
    norm_sq: float
    norm_sq_bound: float
    valid: bool

    @property
    def within_bound(self) -> bool:
        return self.norm_sq <= self.norm_sq_bound


def construction_alpha(s: int, ell: int) -> float:
    """``4 s (s + 2) ln(8 ell s)``."""
    return float(4.0 * s * (s + 2) * np.log(8.0 * ell * s))


def min_unit_circle_order(s: int) -> int:
    """Smallest filter order ``m = ell + s`` with ``alpha(ell, s) / ell <= 1/4``."""
    ell = 1
    while construction_alpha(s, ell) / ell > 0.25:
        ell *= 2
    lo, hi = ell // 2, ell
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if construction_alpha(s, mid) / mid <= 0.25:
            hi = mid
        else:
            lo = mid
    return hi + s


def unit_circle_filter(p: CharPoly, m: int, strict: bool = True, root_tol: float = 1e-8):
    """Causal reproducing filter of order ``m`` for ``p`` with unit-modulus roots.

    With ``ell = m - s``, ``alpha = 4 s (s+2) ln(8 ell s)``,
    ``epsilon = alpha / (2 ell s)`` and ``delta = 1 - epsilon``, the Taylor
    coefficients ``r_0 .. r_ell`` of ``1 / prod(delta z - theta_i)`` give
    ``q^ell = prod(z - theta_i) * r^ell`` with ``q^ell(0) = 1``; the filter
    is ``q = [0; -q^ell_1; ...; -q^ell_m]`` so that ``1 - q(z) = q^ell(z)`` is
    divisible by ``p``.

    The norm guarantee ``sum_{i>=1} |q_i|^2 <= 10 alpha / ell`` needs
    ``alpha / ell <= 1/4``; with ``strict`` a smaller ``m`` is an error. With
    ``strict=False`` the filter is still built (it reproduces the subspace
    whenever ``0 < delta < 1``) and the report says whether the bound applies.

    Returns
    -------
    (Filter, UnitCircleReport)
    """
    theta = p.roots()
    s = p.degree
    if np.any(np.abs(np.abs(theta) - 1.0) > root_tol):
        raise ValueError("all roots of p must lie on the unit circle")
    ell = m - s
    if ell < 1:
        raise ValueError(f"m must exceed deg p = {s}; minimum valid m is {min_unit_circle_order(s)}")
    alpha = construction_alpha(s, ell)
    valid = alpha / ell <= 0.25
    if strict and not valid:
        raise ValueError(
            f"m = {m} too small for degree {s} (alpha/ell = {alpha / ell:.3g} > 1/4); "
            f"use m >= {min_unit_circle_order(s)}"
        )
    eps = alpha / (2.0 * ell * s)
    delta = 1.0 - eps
    if not 0 < delta < 1:
        raise ValueError(f"construction undefined for m = {m} (delta = {delta:.3g})")

    # d(z) = prod (delta z - theta_i); d(z) r(z) = 1
    d = np.array([1.0 + 0j])
    for th in theta:
        d = np.convolve(d, [-th, delta])
    r = np.zeros(ell + 1, dtype=complex)
    r[0] = 1.0 / d[0]
    for j in range(1, ell + 1):
        k = min(j, s)
        r[j] = -(d[1 : k + 1] @ r[j - 1 :: -1][:k]) / d[0]
    monic = np.array([1.0 + 0j])
    for th in theta:
        monic = np.convolve(monic, [-th, 1.0])
    q_ell = np.convolve(monic, r)
    coeffs = -q_ell
    coeffs[0] = 0.0
    norm_sq = float(np.sum(np.abs(coeffs) ** 2))
    report = UnitCircleReport(s, m, ell, alpha, eps, delta, norm_sq, 10.0 * alpha / ell, bool(valid))
    return Filter(coeffs, (0, m)), report


def compose_and_bound(phi, rho: Optional[float] = None) -> tuple:
    """Self-convolution ``phi * phi`` of a causal filter and its spectral-l1 identity.

    For ``phi`` on ``[0, m]`` the product lives on ``[0, 2m]`` and
    ``||phi * phi||*_{2m,1} = sqrt(2m+1) ||phi||_2^2``. If ``rho`` is given
    the report also checks the bound ``2 rho^2 / sqrt(2m+1)``.
    """
    coeffs = np.asarray(phi.values if isinstance(phi, Signal) else phi, dtype=complex).ravel()
    m = coeffs.size - 1
    sq = np.convolve(coeffs, coeffs)
    lhs = spectral_norm(sq, 1)
    rhs = float(np.sqrt(2 * m + 1) * np.sum(np.abs(coeffs) ** 2))
    report = {"m": m, "spectral_l1": lhs, "identity_rhs": rhs, "identity_residual": abs(lhs - rhs)}
    if rho is not None:
        report["rho"] = rho
        report["premise"] = bool(np.linalg.norm(coeffs) <= rho / np.sqrt(m + 1) * (1 + 1e-12))
        report["bound"] = 2.0 * rho**2 / np.sqrt(2 * m + 1)
        report["within_bound"] = bool(lhs <= report["bound"] * (1 + 1e-12))
    return Filter(sq, (0, 2 * m)), report


def assumption_a_check(x: Signal, model: SubspaceModel, m: int, sigma: float = 1.0) -> float:
    """``max_{0<=tau<=m} ||(I - Pi) [Delta^tau x]_0^n||_2 / sigma``.

    ``Pi`` projects onto the model's basis on ``[0, n]``; ``x`` must cover ``[-m, n]``.
    """
    lo, hi = model.window
    if lo != 0:
        raise ValueError("model basis must live on [0, n]")
    n = hi
    Pi = model.projector()
    R = np.eye(n + 1) - Pi
    worst = 0.0
    for tau in range(m + 1):
        seg = x.restrict((-tau, n - tau))
        worst = max(worst, float(np.linalg.norm(R @ seg)))
    return worst / (sigma if sigma > 0 else 1.0)


@dataclass
class SimplicityWitness:
    """A causal filter and the pointwise-risk level ``sigma rho / sqrt(m+1)`` it attains."""

    filter: Filter
    m: int
    rho: float
    max_risk: float = field(default=0.0)

    @classmethod
    def from_filter(cls, phi: Filter, x: Signal, sigma: float, window=None) -> "SimplicityWitness":
        """Measure the worst pointwise risk of ``phi`` on ``window`` (default ``[-m, 2m]``).

        With complex noise of unit per-component variance,
        ``E|x_t - [phi*y]_t|^2 = |x_t - [phi*x]_t|^2 + 2 sigma^2 ||phi||^2``.
        """
        m = phi.support[0][1]
        window = window or (-m, 2 * m)
        bias = x.restrict(window) - convolve(phi, x, window).values
        var = 2.0 * sigma**2 * float(np.sum(np.abs(phi.values) ** 2))
        risk = float(np.sqrt(np.max(np.abs(bias) ** 2) + var))
        rho = risk * np.sqrt(m + 1) / sigma if sigma > 0 else np.inf
        return cls(phi, m, float(rho), risk)
