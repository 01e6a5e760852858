"""
Synthetic ground truths and the additive noise model used in the benchmarks.

Scenarios
---------
random_spikes         sum of ``spikes`` oscillations, i.i.d. frequencies in [0, 2 pi)
coherent_spikes       spikes drawn in pairs sharing an amplitude, ``0.1 * 2 pi / n`` apart
random_spikes_2d      2-D counterpart on an ``m x m`` grid
coherent_spikes_2d    pairs separated by ``0.2 pi / m`` along each axis
dimension_reduction_2d  single-index ``f(t) = g(theta^T t)`` sampled at ``tau / m``

Every ground truth is normalized to unit l2 norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np

from .spectrum import Signal

SCENARIOS = (
    "random_spikes",
    "coherent_spikes",
    "random_spikes_2d",
    "coherent_spikes_2d",
    "dimension_reduction_2d",
)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    n: int = 100
    spikes: int = 4
    separation: Optional[float] = None
    beta: float = 2.0
    real: bool = False
    seed: int = 0
    terms: int = 32

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.name!r}; expected one of {SCENARIOS}")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.spikes < 1:
            raise ValueError("spike count must be >= 1")
        if self.name.startswith("coherent") and self.spikes % 2:
            raise ValueError("coherent scenarios draw spikes in pairs")
        if self.separation is not None and self.separation <= 0:
            raise ValueError("separation must be positive")
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    @property
    def is_2d(self) -> bool:
        return self.name.endswith("_2d")

    @property
    def samples(self) -> int:
        """Number of samples (``n`` in 1-D, ``n^2`` on the grid)."""
        return self.n**2 if self.is_2d else self.n

    @property
    def pair_gap(self) -> float:
        if self.separation is not None:
            return self.separation
        return 0.2 * np.pi / self.n  # 0.1 of the DFT bin 2 pi / n

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class NoiseModel:
    sigma: float = 0.0
    kind: str = "complex"

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.kind not in ("complex", "real"):
            raise ValueError("noise kind must be 'complex' or 'real'")

    def draw(self, shape, rng) -> np.ndarray:
        """``sigma * zeta``; complex ``zeta = xi1 + i xi2`` with i.i.d. N(0, 1) parts."""
        z = rng.standard_normal(shape)
        if self.kind == "complex":
            z = z + 1j * rng.standard_normal(shape)
        return self.sigma * z


@dataclass
class GroundTruth:
    signal: Signal
    frequencies: np.ndarray = field(default=None)
    amplitudes: np.ndarray = field(default=None)
    theta: Optional[np.ndarray] = None
    sobolev_seminorm: Optional[float] = None


def _amplitudes(rng, k):
    return rng.uniform(0.5, 1.5, k) * np.exp(2j * np.pi * rng.uniform(0, 1, k))


def _normalize(values):
    return values / np.linalg.norm(values)


def generate(spec: ScenarioSpec, details: bool = False):
    """Draw the ground truth for ``spec`` (deterministic in ``spec.seed``).

    Returns the :class:`Signal`, or a :class:`GroundTruth` with the drawn
    parameters when ``details`` is set.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    truth = GroundTruth(None)
    if spec.name in ("random_spikes", "coherent_spikes"):
        if spec.name == "random_spikes":
            omegas = rng.uniform(0, 2 * np.pi, spec.spikes)
            amps = _amplitudes(rng, spec.spikes)
        else:
            base = rng.uniform(0, 2 * np.pi, spec.spikes // 2)
            omegas = np.ravel(np.column_stack([base, base + spec.pair_gap]))
            amps = np.repeat(_amplitudes(rng, spec.spikes // 2), 2)
        t = np.arange(n)
        values = np.exp(1j * np.outer(t, omegas)) @ amps
        truth.frequencies, truth.amplitudes = omegas, amps
    elif spec.name in ("random_spikes_2d", "coherent_spikes_2d"):
        if spec.name == "random_spikes_2d":
            omegas = rng.uniform(0, 2 * np.pi, (spec.spikes, 2))
            amps = _amplitudes(rng, spec.spikes)
        else:
            base = rng.uniform(0, 2 * np.pi, (spec.spikes // 2, 2))
            omegas = np.empty((spec.spikes, 2))
            omegas[0::2] = base
            omegas[1::2] = base + spec.pair_gap
            amps = np.repeat(_amplitudes(rng, spec.spikes // 2), 2)
        t = np.arange(n)
        values = np.zeros((n, n), dtype=complex)
        for (w1, w2), a in zip(omegas, amps):
            values += a * np.outer(np.exp(1j * w1 * t), np.exp(1j * w2 * t))
        truth.frequencies, truth.amplitudes = omegas, amps
    else:
        g, seminorm = sobolev_function(spec.beta, rng, spec.terms)
        phi = rng.uniform(0, 2 * np.pi)
        theta = np.array([np.cos(phi), np.sin(phi)])
        values = sample_grid_function(lambda t1, t2: g(theta[0] * t1 + theta[1] * t2), n).values
        truth.theta, truth.sobolev_seminorm = theta, seminorm
    if spec.real:
        values = values.real.astype(complex)
    truth.signal = Signal(_normalize(values))
    return truth if details else truth.signal


def sobolev_function(beta: float, rng, terms: int = 32) -> Tuple[Callable, float]:
    """Random real 1-periodic ``g`` with ``||g^(beta)||_{L2[0,1]} = 1``.

    ``g(u) = sum_{0<|k|<=K} c_k e^{2 pi i k u}``, ``c_{-k} = conj(c_k)``,
    ``c_k ~ a_k / (2 pi k)^beta`` with complex Gaussian ``a_k``, rescaled so
    that ``sum_{k != 0} (2 pi |k|)^{2 beta} |c_k|^2 = 1``.

    Returns ``(g, seminorm)``; ``g`` accepts arrays.
    """
    k = np.arange(1, terms + 1)
    a = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    c = a / (2 * np.pi * k) ** beta
    seminorm_sq = 2.0 * np.sum((2 * np.pi * k) ** (2 * beta) * np.abs(c) ** 2)
    c = c / np.sqrt(seminorm_sq)
    seminorm = float(np.sqrt(2.0 * np.sum((2 * np.pi * k) ** (2 * beta) * np.abs(c) ** 2)))

    def g(u):
        u = np.asarray(u, dtype=float)
        phase = np.exp(2j * np.pi * np.multiply.outer(u, k))
        return 2.0 * np.real(phase @ c)

    g.coefficients = c
    return g, seminorm


def sample_grid_function(f, m: int) -> Signal:
    """``x_tau = f(tau / m)`` for ``tau in {0, .., m-1}^2``; ``f(t1, t2)`` must broadcast."""
    t = np.arange(m) / m
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    return Signal(np.asarray(f(t1, t2), dtype=complex) * np.ones((m, m)))


def sigma_for_snr(snr: float, samples: int) -> float:
    """Noise level with ``1 / snr = sigma sqrt(samples)`` (unit-norm signals)."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    if np.isinf(snr):
        return 0.0
    return float(1.0 / (snr * np.sqrt(samples)))


def observe(x: Signal, snr: float, seed, noise: Optional[NoiseModel] = None):
    """``y = x + sigma zeta`` with ``sigma = 1 / (snr sqrt(#samples))``.

    ``noise`` fixes the noise kind (its ``sigma`` is overridden). ``seed`` is
    anything :func:`numpy.random.default_rng` accepts.

    Returns ``(y, sigma)``.
    """
    sigma = sigma_for_snr(snr, x.values.size)
    model = NoiseModel(sigma, noise.kind if noise is not None else "complex")
    rng = np.random.default_rng(seed)
    y = Signal(x.values + model.draw(x.shape, rng), x.window)
    return y, sigma
