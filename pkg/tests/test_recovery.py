import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blindfilter.recovery import (
    RecoveryConfig,
    fit_filter,
    lambda_rule,
    recover,
    recover_blockwise,
    recover_constrained,
    recover_interpolating,
    recover_penalized,
)
from blindfilter.solver import SolverOptions
from blindfilter.spectrum import Filter, MissingDataError, Signal, convolve

TIGHT = SolverOptions(max_iters=20000, tol_gap=1e-10, tol_rel_obj=1e-14)


def osc(w, lo, hi, a=1.0):
    t = np.arange(lo, hi + 1)
    return Signal(a * np.exp(1j * w * t), (lo, hi))


def rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# --- penalty rule -----------------------------------------------------------------------------


def test_lambda_rule_theory():
    # 60 ln(63000) = 663.05; quoted elsewhere as 663.6, which is 0.1% off
    assert lambda_rule(100, 1.0, 0.1, "theory") == pytest.approx(60 * np.log(63000), rel=1e-15)
    assert lambda_rule(100, 1.0, 0.1, "theory") == pytest.approx(663.6, rel=1e-3)


def test_lambda_rule_experiment():
    assert lambda_rule(100, 1.0, 0.1, "experiment") == pytest.approx(2 * np.log(63000), rel=1e-15)
    assert lambda_rule(100, 1.0, 0.1, "experiment") == pytest.approx(22.12, rel=1e-3)


def test_lambda_rule_zero_sigma():
    assert lambda_rule(100, 0.0) == 0.0


def test_lambda_rule_validation():
    with pytest.raises(ValueError):
        lambda_rule(100, 1.0, which="other")
    with pytest.raises(ValueError):
        lambda_rule(0, 1.0)
    with pytest.raises(ValueError):
        lambda_rule(10, 1.0, alpha=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10**6), st.floats(0, 10), st.floats(1e-3, 1))
def test_lambda_rules_ratio(n, sigma, alpha):
    th = lambda_rule(n, sigma, alpha, "theory")
    ex = lambda_rule(n, sigma, alpha, "experiment")
    assert th == pytest.approx(30 * ex, rel=1e-12, abs=1e-300)


# --- configuration --------------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        RecoveryConfig(mode="constrained")
    with pytest.raises(ValueError):
        RecoveryConfig(mode="constrained", rho_bar=0.5)
    with pytest.raises(ValueError):
        RecoveryConfig(mode="penalized", lam=None, lambda_rule=None)
    with pytest.raises(ValueError):
        RecoveryConfig(mode="other")


def test_missing_data_names_window():
    y = osc(0.3, 0, 20)
    with pytest.raises(MissingDataError):
        recover_constrained(y, RecoveryConfig(mode="constrained", rho_bar=1, m=4, n=8))


# --- constrained ----------------------------------------------------------------------------


def test_constrained_constant():
    m = 8
    y = Signal(np.full(3 * m + 1, 0.7 + 0.2j), (-m, 2 * m))
    rep = recover_constrained(y, RecoveryConfig(mode="constrained", rho_bar=1, m=m, solver=TIGHT))
    assert np.linalg.norm(rep.x_hat.values - y.restrict((0, 2 * m))) <= 1e-6
    assert rep.spectral_l1 <= 1 + 1e-8


def test_constrained_on_grid_oscillation():
    m = 10
    w = 2 * np.pi * 3 / (m + 1)
    y = osc(w, -m, 2 * m)
    rep = recover_constrained(y, RecoveryConfig(mode="constrained", rho_bar=1, m=m, solver=TIGHT))
    assert np.linalg.norm(rep.x_hat.values - y.restrict((0, 2 * m))) <= 1e-6


def test_constrained_rho_m_plus_one_interpolates_data():
    rng = np.random.default_rng(0)
    m = 6
    y = Signal(rand_c(rng, 3 * m + 1), (-m, 2 * m))
    rep = recover_constrained(y, RecoveryConfig(mode="constrained", rho_bar=m + 1, m=m, solver=TIGHT))
    assert rep.residual <= 1e-5
    assert np.abs(rep.x_hat.values - y.restrict((0, 2 * m))).max() <= 1e-5


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(1.0, 5.0))
def test_constrained_feasible(seed, rho):
    rng = np.random.default_rng(seed)
    m = 5
    y = Signal(rand_c(rng, 3 * m + 1), (-m, 2 * m))
    rep = recover_constrained(y, RecoveryConfig(mode="constrained", rho_bar=rho, m=m))
    assert rep.spectral_l1 <= rho * (1 + 1e-8)


# --- penalized -------------------------------------------------------------------------------


def test_penalized_huge_lambda_gives_zero():
    rng = np.random.default_rng(1)
    m = 6
    y = Signal(rand_c(rng, 3 * m + 1), (-m, 2 * m))
    rep = recover_penalized(y, RecoveryConfig(m=m, lam=1e8))
    assert np.all(rep.x_hat.values == 0)
    assert np.all(rep.filter.values == 0)


def test_penalized_tiny_lambda_on_grid():
    m = 10
    w = 2 * np.pi * 2 / (m + 1)
    y = osc(w, -m, 2 * m, 0.5)
    rep = recover_penalized(y, RecoveryConfig(m=m, lam=1e-8, solver=TIGHT))
    assert np.linalg.norm(rep.x_hat.values - y.restrict((0, 2 * m))) <= 1e-4


def test_penalized_uses_rule():
    m = 6
    y = osc(0.3, -m, 2 * m)
    cfg = RecoveryConfig(m=m, sigma=0.1)
    assert cfg.penalty(2 * m + 1) == pytest.approx(lambda_rule(2 * m + 1, 0.1))
    assert recover_penalized(y, cfg).converged


def test_mode_mismatch():
    y = osc(0.3, -4, 8)
    with pytest.raises(ValueError):
        recover_penalized(y, RecoveryConfig(mode="constrained", rho_bar=1, m=4))
    with pytest.raises(ValueError):
        recover_constrained(y, RecoveryConfig(m=4))


def test_real_input_reports_imaginary_part():
    rng = np.random.default_rng(2)
    y = Signal(rng.standard_normal(25), (-8, 16))
    rep = recover_penalized(y, RecoveryConfig(m=8, lam=0.1))
    assert np.all(rep.x_hat.values.imag == 0)
    assert rep.imag_residual is not None


# --- interpolating ---------------------------------------------------------------------------


def test_interpolating_constants_exact():
    y = Signal(np.full(30, 2.0), (0, 29))
    rep = recover_interpolating(y, RecoveryConfig(mode="constrained", rho_bar=1, m=4, interpolating=True, solver=TIGHT))
    assert rep.x_hat.window == ((4, 25),)
    assert np.abs(rep.x_hat.values - 2.0).max() <= 1e-6


def test_interpolating_reversal_symmetry():
    rng = np.random.default_rng(3)
    half = rand_c(rng, 12)
    v = np.concatenate([half, half[-2::-1]])  # symmetric about the centre
    y = Signal(v, (-11, 11))
    cfg = RecoveryConfig(m=3, lam=0.05, interpolating=True, solver=TIGHT)
    a = recover_interpolating(y, cfg).x_hat
    b = recover_interpolating(y.reversed(), cfg).x_hat.reversed()
    assert a.window == b.window
    assert np.abs(a.values - b.values).max() <= 1e-6


def test_interpolating_residual_not_worse_than_causal():
    rng = np.random.default_rng(4)
    m = 4
    y = Signal(rand_c(rng, 4 * m + 1), (-2 * m, 2 * m))
    target = ((-m, m),)
    causal = fit_filter(y, ((0, m),), target, RecoveryConfig(mode="constrained", rho_bar=2.0, m=m, solver=TIGHT))
    # the causal filter zero-padded to [-m, m] is feasible at its own two-sided budget
    padded = Filter(np.concatenate([np.zeros(m), causal.filter.values]), (-m, m))
    assert np.allclose(convolve(padded, y, target).values, causal.x_hat.values)
    radius = max(padded.budget(), 1.0)
    two = fit_filter(y, ((-m, m),), target, RecoveryConfig(mode="constrained", rho_bar=radius, m=m, solver=TIGHT))
    r2 = np.linalg.norm(y.restrict(target) - two.x_hat.values)
    r1 = np.linalg.norm(y.restrict(target) - causal.x_hat.values)
    assert r2 <= r1 * (1 + 1e-6)


def test_interpolating_shift_boundary_covers_window():
    y = Signal(np.full(20, 1.0 + 1j), (0, 19))
    rep = recover(y, RecoveryConfig(mode="constrained", rho_bar=1, m=3, interpolating=True, shift_boundary=True, solver=TIGHT))
    assert rep.x_hat.window == ((0, 19),)
    assert len(rep.fits) == 3
    assert np.abs(rep.x_hat.values - (1 + 1j)).max() <= 1e-6


# --- blockwise -------------------------------------------------------------------------------


def test_blockwise_single_block_matches_causal():
    rng = np.random.default_rng(5)
    m = 5
    y = Signal(rand_c(rng, 3 * m + 1), (-m, 2 * m))
    cfg = RecoveryConfig(m=m, lam=0.3, block_size=2 * m + 1, halves=False)
    a = recover_blockwise(y, cfg, target=((0, 2 * m),))
    b = recover_penalized(y, RecoveryConfig(m=m, lam=0.3))
    assert np.array_equal(a.x_hat.values, b.x_hat.values)


def test_blockwise_two_blocks_stationary():
    m = 5
    w = 2 * np.pi * 2 / (m + 1)
    y = osc(w, 0, 2 * (2 * m + 1) - 1)
    rep = recover_blockwise(y, RecoveryConfig(mode="constrained", rho_bar=1, m=m, block_size=2 * m + 1, solver=TIGHT))
    assert len(rep.fits) == 4
    assert np.abs(rep.x_hat.values - y.values).max() <= 1e-6


def test_blockwise_piecewise_beats_single_filter():
    m = 6
    b = 2 * m + 1
    t = np.arange(2 * b)
    w1, w2 = 2 * np.pi * 1 / (m + 1), 2 * np.pi * 3 / (m + 1)
    x = np.where(t < b, np.exp(1j * w1 * t), np.exp(1j * w2 * t))
    errs_block, errs_single = [], []
    for seed in range(5):
        rng = np.random.default_rng(seed)
        y = Signal(x + 0.01 * rand_c(rng, x.size), (0, x.size - 1))
        blk = recover_blockwise(y, RecoveryConfig(mode="constrained", rho_bar=1, m=m, block_size=b))
        one = recover_blockwise(y, RecoveryConfig(mode="constrained", rho_bar=1, m=m))
        errs_block.append(np.linalg.norm(blk.x_hat.values - x))
        errs_single.append(np.linalg.norm(one.x_hat.values - x))
    assert np.mean(errs_block) < np.mean(errs_single)


def test_blockwise_default_uses_halves():
    y = Signal(np.ones(21), (0, 20))
    rep = recover(y, RecoveryConfig(mode="constrained", rho_bar=1))
    supports = sorted(f.filter.support for f in rep.fits)
    assert supports == [((-10, 0),), ((0, 10),)]
    assert rep.x_hat.window == ((0, 20),)


def test_blockwise_bad_block_size():
    with pytest.raises(ValueError):
        recover_blockwise(Signal(np.ones(10)), RecoveryConfig(lam=0.1, block_size=0))


# --- 2-D -------------------------------------------------------------------------------------


def test_2d_separable_matches_structure():
    m = 3
    w1, w2 = 2 * np.pi / (m + 1), 2 * np.pi * 2 / (m + 1)
    t1 = np.arange(-m, 2 * m + 1)
    v = np.outer(np.exp(1j * w1 * t1), np.exp(1j * w2 * t1))
    y = Signal(v, ((-m, 2 * m), (-m, 2 * m)))
    rep = recover_constrained(y, RecoveryConfig(mode="constrained", rho_bar=1, m=m, solver=TIGHT))
    assert rep.x_hat.window == ((0, 2 * m), (0, 2 * m))
    assert np.abs(rep.x_hat.values - y.restrict(((0, 2 * m), (0, 2 * m)))).max() <= 1e-6


def test_2d_with_one_row_matches_1d():
    rng = np.random.default_rng(6)
    m = 4
    v = rand_c(rng, 3 * m + 1)
    y1 = Signal(v, (-m, 2 * m))
    y2 = Signal(v[None, :], ((0, 0), (-m, 2 * m)))
    a = recover_penalized(y1, RecoveryConfig(m=m, lam=0.2, solver=TIGHT))
    b = recover_penalized(y2, RecoveryConfig(m=(0, m), n=(0, 2 * m), lam=0.2, solver=TIGHT))
    assert np.abs(a.x_hat.values - b.x_hat.values[0]).max() <= 1e-8


def test_parallel_blocks_match_serial():
    rng = np.random.default_rng(7)
    y = Signal(rand_c(rng, 40), (0, 39))
    a = recover_blockwise(y, RecoveryConfig(lam=0.1, block_size=10))
    b = recover_blockwise(y, RecoveryConfig(lam=0.1, block_size=10, workers=4))
    assert np.array_equal(a.x_hat.values, b.x_hat.values)
