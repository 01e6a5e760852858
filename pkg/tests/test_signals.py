import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindfilter.signals import (
    SCENARIOS,
    NoiseModel,
    ScenarioSpec,
    generate,
    observe,
    sample_grid_function,
    sigma_for_snr,
    sobolev_function,
)


@pytest.mark.parametrize("name", SCENARIOS)
def test_unit_norm(name):
    n = 20 if name.endswith("_2d") else 100
    x = generate(ScenarioSpec(name, n=n, seed=3))
    assert np.linalg.norm(x.values) == pytest.approx(1.0, abs=1e-12)
    assert x.shape == ((n, n) if name.endswith("_2d") else (n,))


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(SCENARIOS), st.integers(0, 2**31 - 1))
def test_deterministic_in_seed(name, seed):
    spec = ScenarioSpec(name, n=12, seed=seed)
    assert np.array_equal(generate(spec).values, generate(spec).values)


def test_different_seeds_differ():
    a = generate(ScenarioSpec("random_spikes", seed=1))
    b = generate(ScenarioSpec("random_spikes", seed=2))
    assert not np.allclose(a.values, b.values)


def test_coherent_pair_gap():
    truth = generate(ScenarioSpec("coherent_spikes", n=100, seed=5), details=True)
    w = truth.frequencies
    assert np.allclose(w[1::2] - w[0::2], 0.1 * 2 * np.pi / 100, rtol=0, atol=1e-15)
    assert np.array_equal(truth.amplitudes[0::2], truth.amplitudes[1::2])


def test_coherent_2d_pair_gap():
    truth = generate(ScenarioSpec("coherent_spikes_2d", n=40, seed=5), details=True)
    w = truth.frequencies
    assert np.allclose(w[1::2] - w[0::2], 0.2 * np.pi / 40, atol=1e-15)


def test_random_spikes_is_sum_of_oscillations():
    truth = generate(ScenarioSpec("random_spikes", n=50, seed=9), details=True)
    t = np.arange(50)
    values = np.exp(1j * np.outer(t, truth.frequencies)) @ truth.amplitudes
    assert np.allclose(truth.signal.values, values / np.linalg.norm(values))
    mags = np.abs(truth.amplitudes)
    assert np.all((mags >= 0.5) & (mags <= 1.5))


def test_real_flag():
    x = generate(ScenarioSpec("random_spikes", n=30, real=True, seed=2))
    assert np.all(x.values.imag == 0)


def test_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec("nope")
    with pytest.raises(ValueError):
        ScenarioSpec("coherent_spikes", spikes=3)
    with pytest.raises(ValueError):
        ScenarioSpec("random_spikes", n=1)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 3.0), st.integers(0, 2**31 - 1))
def test_sobolev_seminorm_is_one(beta, seed):
    g, seminorm = sobolev_function(beta, np.random.default_rng(seed))
    assert seminorm <= 1 + 1e-6
    c = g.coefficients
    k = np.arange(1, c.size + 1)
    assert 2 * np.sum((2 * np.pi * k) ** (2 * beta) * np.abs(c) ** 2) == pytest.approx(1.0, rel=1e-12)


def test_sobolev_function_is_real_and_periodic():
    g, _ = sobolev_function(2.0, np.random.default_rng(0))
    u = np.linspace(0, 1, 17)
    assert np.allclose(g(u), g(u + 1.0))
    assert np.isrealobj(g(u))


def test_dimension_reduction_details():
    truth = generate(ScenarioSpec("dimension_reduction_2d", n=20, beta=2, seed=4), details=True)
    assert truth.sobolev_seminorm <= 1 + 1e-6
    assert np.linalg.norm(truth.theta) == pytest.approx(1.0)


def test_grid_constant():
    x = sample_grid_function(lambda a, b: 1.0, 6)
    assert np.array_equal(x.values, np.ones((6, 6)))


def test_grid_separable_exponential():
    m = 8
    x = sample_grid_function(lambda a, b: np.exp(2j * np.pi * (a + b)), m)
    e = np.exp(2j * np.pi * np.arange(m) / m)
    assert np.abs(x.values - np.outer(e, e)).max() < 1e-12


def test_grid_single_index_degenerate_direction():
    g, _ = sobolev_function(2.0, np.random.default_rng(1))
    x = sample_grid_function(lambda a, b: g(1.0 * a + 0.0 * b), 10)
    assert np.allclose(x.values, x.values[:, :1])


def test_sigma_for_snr_value():
    assert sigma_for_snr(1, 100) == pytest.approx(0.1)
    assert sigma_for_snr(np.inf, 100) == 0.0
    with pytest.raises(ValueError):
        sigma_for_snr(0, 100)


def test_observe_noiseless():
    x = generate(ScenarioSpec("random_spikes", seed=0))
    y, sigma = observe(x, np.inf, 0)
    assert sigma == 0 and np.array_equal(y.values, x.values)


def test_observe_sigma_and_seed():
    x = generate(ScenarioSpec("random_spikes", seed=0))
    y1, s = observe(x, 1.0, 7)
    y2, _ = observe(x, 1.0, 7)
    assert s == pytest.approx(0.1)
    assert np.array_equal(y1.values, y2.values)


def test_noise_second_moment():
    rng = np.random.default_rng(11)
    z = NoiseModel(0.3).draw((10**4,), rng)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(2 * 0.09, rel=0.03)
    assert np.mean(z.real**2) == pytest.approx(0.09, rel=0.03)
    assert np.mean(z.imag**2) == pytest.approx(0.09, rel=0.03)


def test_real_noise_kind():
    z = NoiseModel(1.0, "real").draw((100,), np.random.default_rng(0))
    assert np.isrealobj(z)
    with pytest.raises(ValueError):
        NoiseModel(1.0, "laplace")
    with pytest.raises(ValueError):
        NoiseModel(-1.0)
