"""
Lasso over an oversampled frequency grid, the comparison method of the benchmarks.

Atoms are ``e^{i omega_j t} / sqrt(n)`` with ``omega_j = 2 pi j / (L n)``
(tensor grid in 2-D), and the estimate is ``Phi c_hat`` with

    c_hat = argmin 1/2 ||y - Phi c||^2 + lam ||c||_1,   lam = sigma sqrt(2 ln n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .solver import LeastSquaresSpec, SolverOptions, SolverResult, solve_penalized
from .spectrum import Signal


@dataclass(frozen=True)
class GridDictionary:
    """Unit-norm Fourier atoms on a grid ``L`` times finer than the DFT grid."""

    shape: tuple
    oversample: int = 4

    def __post_init__(self):
        if self.oversample < 1:
            raise ValueError("oversampling factor must be >= 1")
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    @property
    def grid_shape(self) -> tuple:
        return tuple(self.oversample * s for s in self.shape)

    @property
    def frequencies(self):
        return [2 * np.pi * np.arange(g) / g for g in self.grid_shape]

    @property
    def scale(self) -> float:
        return 1.0 / np.sqrt(np.prod(self.shape))

    def synthesize(self, c) -> np.ndarray:
        """``Phi c`` on the sample grid."""
        c = np.asarray(c, dtype=complex).reshape(self.grid_shape)
        full = np.fft.ifftn(c) * np.prod(self.grid_shape)
        return self.scale * full[tuple(slice(0, s) for s in self.shape)]

    def analyze(self, r) -> np.ndarray:
        """``Phi^H r`` on the frequency grid."""
        r = np.asarray(r, dtype=complex).reshape(self.shape)
        return self.scale * np.fft.fftn(r, s=self.grid_shape, axes=tuple(range(r.ndim)))

    def operator(self) -> LinearOperator:
        ns, nc = int(np.prod(self.shape)), int(np.prod(self.grid_shape))
        return LinearOperator(
            (ns, nc),
            matvec=lambda c: self.synthesize(c).ravel(),
            rmatvec=lambda r: self.analyze(r).ravel(),
            dtype=complex,
        )

    def todense(self) -> np.ndarray:
        grids = np.meshgrid(*[np.arange(s) for s in self.shape], indexing="ij")
        fgrids = np.meshgrid(*self.frequencies, indexing="ij")
        t = np.stack([g.ravel() for g in grids], axis=1)
        w = np.stack([g.ravel() for g in fgrids], axis=1)
        return self.scale * np.exp(1j * t @ w.T)


@dataclass
class LassoResult:
    x_hat: Signal
    coefficients: np.ndarray
    lam: float
    solver: SolverResult

    @property
    def converged(self) -> bool:
        return self.solver.converged


def lasso_lambda(sigma: float, n: int) -> float:
    """``sigma sqrt(2 ln n)``."""
    return float(sigma * np.sqrt(2.0 * np.log(n)))


def lasso_denoise(
    y: Signal,
    sigma: float,
    oversample: int = 4,
    lam: Optional[float] = None,
    opts: Optional[SolverOptions] = None,
) -> LassoResult:
    """Grid-Lasso estimate of ``x`` from ``y`` (1-D or 2-D).

    The problem is handed to :func:`solve_penalized` as
    ``||y - Phi c||^2 + 2 lam ||c||_1``, which has the same minimizer.
    """
    d = GridDictionary(y.shape, oversample)
    if lam is None:
        lam = lasso_lambda(sigma, y.values.size)
    spec = LeastSquaresSpec(d.operator(), y.values.ravel())
    opts = opts or SolverOptions()
    if opts.lipschitz is None:
        # Phi Phi^H is L times the identity, so ||Phi||^2 = L^d
        opts = SolverOptions(**{**opts.__dict__, "lipschitz": float(oversample ** y.ndim)})
    res = solve_penalized(spec, 2.0 * lam, opts)
    x_hat = Signal(d.synthesize(res.f_hat), y.window)
    return LassoResult(x_hat, res.f_hat.reshape(d.grid_shape), lam, res)
