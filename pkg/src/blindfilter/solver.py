"""
First-order solvers for the two spectral-domain least-squares problems

    min ||b - A f||_2^2   s.t. ||f||_1 <= radius          (constrained)
    min ||b - A f||_2^2 + lam ||f||_1                     (penalized)

over complex ``f``. Both use Nesterov-accelerated (projected / proximal)
gradient steps with objective-increase restarts. ``A`` is anything
``scipy.sparse.linalg.aslinearoperator`` accepts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, aslinearoperator


def project_complex_l1_ball(z, radius: float) -> np.ndarray:
    """Euclidean projection of complex ``z`` onto ``{w : ||w||_1 <= radius}``.

    Phases are kept; magnitudes are soft-thresholded by the single level ``t``
    solving ``sum max(|z_k| - t, 0) = radius`` (sort-based, exact).
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    if mag.sum() <= radius:
        return z.copy()
    if radius == 0:
        return np.zeros_like(z)
    u = np.sort(mag.ravel())[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    theta = (css - radius) / k
    rho = np.nonzero(u > theta)[0][-1]
    t = theta[rho]
    return _shrink(z, mag, t)


def prox_complex_l1(z, tau: float) -> np.ndarray:
    """Prox of ``tau ||.||_1`` for complex vectors: ``z_k max(0, 1 - tau / |z_k|)``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    z = np.asarray(z, dtype=complex)
    if tau == 0:
        return z.copy()
    return _shrink(z, np.abs(z), tau)


def _shrink(z, mag, t):
    scale = np.zeros_like(mag)
    keep = mag > t
    scale[keep] = 1.0 - t / mag[keep]
    return z * scale


def estimate_lipschitz(A, iters: int = 50, seed: int = 0) -> float:
    """Power-iteration estimate of ``||A||^2`` (largest eigenvalue of ``A^H A``)."""
    A = aslinearoperator(A)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = A.rmatvec(A.matvec(v))
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        est = float(np.real(np.vdot(v, w)))
        v = w / nw
    # Rayleigh quotient at the last iterate
    Av = A.matvec(v)
    return max(est, float(np.real(np.vdot(Av, Av))))


@dataclass
class SolverOptions:
    """Iteration limits and tolerances shared by both solvers."""

    max_iters: int = 5000
    tol_rel_obj: float = 1e-8
    tol_gap: float = 1e-6
    lipschitz: Optional[float] = None
    power_iters: int = 50
    safety: float = 1.05
    restart: bool = True
    time_limit: Optional[float] = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol_rel_obj <= 0 or self.tol_gap <= 0:
            raise ValueError("tolerances must be positive")
        if self.safety < 1:
            raise ValueError("safety factor must be >= 1")


@dataclass
class SolverResult:
    f_hat: np.ndarray
    objective: float
    trace: List[float] = field(repr=False)
    certificate: float
    iterations: int
    converged: bool
    step: float
    timed_out: bool = False


@dataclass
class LeastSquaresSpec:
    """``||b - A f||^2`` with ``A`` a linear operator; the variable has ``A.shape[1]`` entries."""

    A: LinearOperator
    b: np.ndarray

    def __post_init__(self):
        self.A = aslinearoperator(self.A)
        self.b = np.asarray(self.b, dtype=complex).ravel()
        if self.A.shape[0] != self.b.size:
            raise ValueError(f"operator has {self.A.shape[0]} rows but b has {self.b.size} entries")

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def residual(self, f):
        return self.A.matvec(f) - self.b

    def value(self, f) -> float:
        r = self.residual(f)
        return float(np.real(np.vdot(r, r)))

    def gradient(self, f):
        # Wirtinger gradient of ||Af - b||^2
        return 2.0 * self.A.rmatvec(self.residual(f))


def _accelerated(spec: LeastSquaresSpec, reg, step_map, opts: SolverOptions, cert_scale):
    """Shared FISTA-with-restart loop.

    ``reg(f)`` is the non-smooth part's value (0 inside the ball), ``step_map``
    the prox/projection with step ``1/L``. The certificate is the norm of the
    gradient mapping ``L (v - step_map(v - grad/L))`` at the returned point.
    """
    L_hat = opts.lipschitz
    if L_hat is None:
        L_hat = estimate_lipschitz(spec.A, iters=opts.power_iters)
    L = 2.0 * opts.safety * L_hat  # gradient of ||.||^2 is 2 A^H (A f - b)
    f = np.zeros(spec.dim, dtype=complex)
    if L == 0:
        obj = spec.value(f)
        return SolverResult(f, obj, [obj], 0.0, 0, True, 0.0)

    deadline = None if opts.time_limit is None else time.monotonic() + opts.time_limit
    step = 1.0 / L
    v = f.copy()
    t = 1.0
    obj = spec.value(f) + reg(f)
    trace = [obj]
    best_f, best_obj = f, obj
    converged = False
    timed_out = False
    cert = np.inf
    it = 0
    for it in range(1, opts.max_iters + 1):
        if deadline is not None and time.monotonic() > deadline:
            timed_out = True
            it -= 1
            break
        r = spec.A.matvec(v) - spec.b
        grad = 2.0 * spec.A.rmatvec(r)
        f_new = step_map(v - step * grad, step)
        cert = L * np.linalg.norm(v - f_new)
        new_obj = spec.value(f_new) + reg(f_new)
        if opts.restart and new_obj > obj:
            # restart momentum from the last accepted point; a restart right
            # after a restart means no further decrease is representable
            stalled = v is f
            t = 1.0
            v = f
            trace.append(best_obj)
            if not stalled:
                continue
            settled = True
        else:
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            v = f_new + ((t - 1.0) / t_new) * (f_new - f)
            # floor the scale so objectives that reach zero still register as settled
            scale = max(abs(new_obj), np.finfo(float).eps * trace[0], np.finfo(float).tiny)
            settled = abs(obj - new_obj) / scale < opts.tol_rel_obj
            f, obj, t = f_new, new_obj, t_new
            if obj <= best_obj:
                best_f, best_obj = f, obj
            trace.append(best_obj)
        if settled:
            # gradient mapping at f itself (v carries momentum)
            g = 2.0 * spec.A.rmatvec(spec.A.matvec(f) - spec.b)
            f_plus = step_map(f - step * g, step)
            cert_f = L * np.linalg.norm(f - f_plus)
            if cert_f <= cert_scale(f):
                # one more forward-backward step: KKT residual <= 2 * cert_f there
                plus_obj = spec.value(f_plus) + reg(f_plus)
                if plus_obj <= best_obj:
                    best_f, best_obj = f_plus, plus_obj
                    trace.append(best_obj)
                cert = cert_f
                converged = True
                break
    if not converged:
        g = 2.0 * spec.A.rmatvec(spec.A.matvec(best_f) - spec.b)
        cert = L * np.linalg.norm(best_f - step_map(best_f - step * g, step))
    return SolverResult(best_f, best_obj, trace, float(cert), it, converged, step, timed_out)


def solve_constrained(spec: LeastSquaresSpec, radius: float, opts: Optional[SolverOptions] = None) -> SolverResult:
    """Accelerated projected gradient for ``min ||b - Af||^2 : ||f||_1 <= radius``.

    Converged when the relative objective change is below ``tol_rel_obj`` and
    the projected-gradient norm is below ``tol_gap * (1 + ||f||)``.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    opts = opts or SolverOptions()
    return _accelerated(
        spec,
        lambda f: 0.0,
        lambda z, step: project_complex_l1_ball(z, radius),
        opts,
        lambda f: opts.tol_gap * (1.0 + np.linalg.norm(f)),
    )


def solve_penalized(spec: LeastSquaresSpec, lambda_eff: float, opts: Optional[SolverOptions] = None) -> SolverResult:
    """Accelerated proximal gradient for ``min ||b - Af||^2 + lambda_eff ||f||_1``.

    Converged when the relative objective change is below ``tol_rel_obj`` and
    the gradient-mapping norm is below ``tol_gap``.
    """
    if lambda_eff < 0:
        raise ValueError("lambda_eff must be non-negative")
    opts = opts or SolverOptions()
    return _accelerated(
        spec,
        lambda f: lambda_eff * float(np.abs(f).sum()),
        lambda z, step: prox_complex_l1(z, lambda_eff * step),
        opts,
        lambda f: opts.tol_gap,
    )


def kkt_residuals(spec: LeastSquaresSpec, f, lambda_eff: float):
    """Optimality residuals of the penalized problem at ``f``.

    Returns ``(active, inactive)``: the largest ``|2 [A^H(Af-b)]_k + lam f_k/|f_k||``
    over nonzero coordinates, and the largest ``max(0, |2 [A^H(Af-b)]_k| - lam)``
    over zero coordinates.
    """
    f = np.asarray(f, dtype=complex)
    g = spec.gradient(f)
    nz = np.abs(f) > 0
    active = np.abs(g[nz] + lambda_eff * f[nz] / np.abs(f[nz]))
    inactive = np.maximum(np.abs(g[~nz]) - lambda_eff, 0.0)
    return (
        float(active.max()) if active.size else 0.0,
        float(inactive.max()) if inactive.size else 0.0,
    )
