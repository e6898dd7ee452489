"""Simulator, coefficient mappings and stability checks."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from aggfc import (
    InnovationSpec,
    TvarParams,
    burn_in_length,
    check_stability,
    impulse_coefficients,
    iter_tvar,
    levinson_durbin,
    pacf_from_ar,
    sample_pacf_paths,
    simulate_tvar,
    spectral_radius,
    synthesize_params,
)


# --- step-up / step-down recursions -------------------------------------------------


def test_levinson_order_one_identity():
    assert_allclose(levinson_durbin([0.5]), [0.5])


def test_levinson_order_two_hand_computed():
    # a1 = phi1 (1 - phi2), a2 = phi2
    assert_allclose(levinson_durbin([0.5, 0.2]), [0.4, 0.2])


def test_levinson_zero_case():
    assert_array_equal(levinson_durbin([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])


def test_levinson_rejects_unit_reflection():
    with pytest.raises(ValueError):
        levinson_durbin([1.0])
    with pytest.raises(ValueError):
        levinson_durbin([0.3, -1.2])


def test_levinson_round_trip_and_stability():
    # 1000 random reflection vectors: the step-down recursion inverts the
    # step-up one, and the resulting models are strictly stable (companion
    # oracle).  Reflections near +-0.9 can push the spectral radius above
    # 0.999, so the margin check uses a radius-aware delta.
    rng = np.random.default_rng(7)
    for _ in range(1000):
        d = int(rng.integers(1, 6))
        pacf = rng.uniform(-0.9, 0.9, d)
        theta = levinson_durbin(pacf)
        assert_allclose(pacf_from_ar(theta), pacf, atol=1e-12)
        assert spectral_radius(theta) < 1.0
        assert check_stability(theta, 0.99989)


def test_levinson_moderate_reflections_within_tight_margin():
    rng = np.random.default_rng(8)
    for _ in range(500):
        d = int(rng.integers(1, 6))
        theta = levinson_durbin(rng.uniform(-0.6, 0.6, d))
        assert check_stability(theta, 0.999)


# --- stability margin ---------------------------------------------------------------


def test_stability_boundary_root_admitted():
    # single root exactly on the boundary circle of radius 1/delta
    assert check_stability([0.5], 0.5)


def test_stability_explosive_ar1():
    assert not check_stability([1.1], 0.99)


def test_stability_monotone_in_delta():
    rng = np.random.default_rng(3)
    for _ in range(200):
        theta = levinson_durbin(rng.uniform(-0.95, 0.95, 3))
        rad = spectral_radius(theta)
        deltas = np.sort(rng.uniform(0.05, 0.999, 4))
        flags = [check_stability(theta, d) for d in deltas]
        # once true it must stay true as delta grows
        assert flags == sorted(flags), (rad, deltas, flags)


# --- pacf path synthesis ------------------------------------------------------------


def test_pacf_paths_zero_margin_degenerates():
    path = sample_pacf_paths(3, T_grid=64, gamma=0.0, seed=1)
    assert_array_equal(path.grid, np.zeros((64, 3)))


def test_pacf_paths_deterministic():
    a = sample_pacf_paths(3, T_grid=128, gamma=0.9, seed=42)
    b = sample_pacf_paths(3, T_grid=128, gamma=0.9, seed=42)
    assert_array_equal(a.grid, b.grid)
    c = sample_pacf_paths(3, T_grid=128, gamma=0.9, seed=43)
    assert not np.array_equal(a.grid, c.grid)


def test_pacf_paths_all_grid_points_stable():
    path = sample_pacf_paths(3, T_grid=512, gamma=0.9, seed=42)
    assert np.all(np.abs(path.grid) < 0.9)
    for k in range(path.n_points):
        assert check_stability(levinson_durbin(path.grid[k]), 0.999)


# --- parameter container ------------------------------------------------------------


def test_params_reject_unstable_grid_point():
    theta = np.vstack([[0.5], [1.2]])
    with pytest.raises(ValueError, match="stability"):
        TvarParams(theta=theta, sigma=np.ones(2), delta=0.9, rho=1.0, sigma_plus=1.0)


def test_params_reject_sigma_outside_band():
    with pytest.raises(ValueError, match="sigma"):
        TvarParams(
            theta=np.vstack([[0.5], [0.5]]),
            sigma=np.array([1.0, 2.0]),
            delta=0.6,
            rho=1.0,
            sigma_plus=1.0,
        )


def test_params_constant_continuation_below_zero():
    params = synthesize_params(d=2, T_grid=64, gamma=0.5, seed=5)
    assert_array_equal(params.theta_at(-3.0), params.theta_at(0.0))
    assert params.sigma_at(-1.0) == params.sigma_at(0.0)


# --- innovations --------------------------------------------------------------------

FAMILIES = [InnovationSpec("gaussian"), InnovationSpec("student-t", nu=5.0), InnovationSpec("uniform")]


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s.family)
def test_innovations_standardized(spec):
    draws = spec.draw(np.random.default_rng(11), 400_000)
    assert abs(draws.mean()) < 4 * draws.std() / np.sqrt(draws.size)
    assert abs(draws.var() - 1.0) < 0.02


def test_innovation_moments_analytic():
    assert_allclose(InnovationSpec("gaussian").abs_moment(4), 3.0)
    assert_allclose(InnovationSpec("uniform").abs_moment(4), 9.0 / 5.0)
    assert_allclose(InnovationSpec("student-t", nu=5.0).abs_moment(4), 9.0)
    assert InnovationSpec("student-t", nu=5.0).abs_moment(6) == np.inf


def test_innovation_exp_moment_matches_monte_carlo():
    spec = InnovationSpec("gaussian")
    draws = spec.draw(np.random.default_rng(2), 400_000)
    mc = np.exp(np.abs(draws)).mean()
    assert abs(spec.exp_moment(1.0) - mc) < 0.02
    assert InnovationSpec("student-t", nu=5.0).exp_moment(1.0) == np.inf


def test_innovation_unknown_family_rejected():
    with pytest.raises(ValueError):
        InnovationSpec("cauchy")
    with pytest.raises(ValueError):
        InnovationSpec("student-t", nu=2.0)


# --- simulation ---------------------------------------------------------------------


def test_ar1_stationary_variance():
    params = TvarParams.constant([0.5], 1.0)
    real = simulate_tvar(params, 100_000, InnovationSpec(), seed=1)
    assert abs(np.var(real.x) - 4.0 / 3.0) < 0.05 * 4.0 / 3.0


def test_noiseless_path_is_identically_zero():
    params = TvarParams.constant([0.7], 0.0)
    real = simulate_tvar(params, 500, InnovationSpec(), seed=9)
    assert_array_equal(real.x, np.zeros(500))


def test_simulation_bit_identical_replay():
    params = synthesize_params(d=3, T_grid=128, gamma=0.8, seed=2)
    a = simulate_tvar(params, 300, InnovationSpec(), seed=123)
    b = simulate_tvar(params, 300, InnovationSpec(), seed=123)
    assert_array_equal(a.x, b.x)
    assert_array_equal(a.sigma_trace, b.sigma_trace)
    c = simulate_tvar(params, 300, InnovationSpec(), seed=124)
    assert not np.array_equal(a.x, c.x)


def test_streaming_generator_matches_batch_simulation():
    params = synthesize_params(d=3, T_grid=128, gamma=0.8, seed=3)
    for spec in FAMILIES:
        batch = simulate_tvar(params, 200, spec, seed=5)
        pairs = list(iter_tvar(params, 200, spec, seed=5))
        assert_array_equal(np.array([v for v, _ in pairs]), batch.x)
        assert_array_equal(np.array([s for _, s in pairs]), batch.sigma_trace)


def test_no_blow_up_across_seeds():
    # hot margin close to one, 2^10 samples: trajectories stay finite and modest
    params = synthesize_params(d=3, T_grid=512, gamma=0.9, seed=0)
    worst = 0.0
    for seed in range(1000):
        real = simulate_tvar(params, 1024, InnovationSpec(), seed=seed)
        assert np.all(np.isfinite(real.x))
        worst = max(worst, float(np.max(np.abs(real.x))))
    assert worst < 1e3


def test_burn_in_length_decay():
    B = burn_in_length(0.5)
    assert 0.75**B < 1e-12 <= 0.75 ** (B - 1)


def test_realization_traces_aligned():
    params = synthesize_params(d=2, T_grid=64, gamma=0.5, seed=4)
    real = simulate_tvar(params, 100, InnovationSpec(), seed=0)
    assert real.T == 100
    assert real.x.shape == real.sigma_trace.shape
    assert_allclose(real.sigma_trace, params.sigma_at(np.arange(1, 101) / 100.0))


# --- impulse coefficients -----------------------------------------------------------


def test_impulse_ar1_geometric():
    params = TvarParams.constant([0.5], 1.0)
    a = impulse_coefficients(params, 100, 50, 12)
    assert_allclose(a, 0.5 ** np.arange(13))


def test_impulse_zero_coefficients():
    params = TvarParams.constant([0.0, 0.0], 1.0)
    a = impulse_coefficients(params, 100, 50, 8)
    assert_array_equal(a, np.r_[1.0, np.zeros(8)])


def test_impulse_leading_coefficient_is_one():
    params = synthesize_params(d=3, T_grid=128, gamma=0.8, seed=6)
    for t in (1, 17, 128):
        assert impulse_coefficients(params, 128, t, 5)[0] == 1.0


def test_impulse_geometric_envelope():
    # |a_{t,T}(j)| <= K delta1^j with a finite fitted K, delta1 = (1+delta)/2
    params = synthesize_params(d=3, T_grid=256, gamma=0.8, seed=2)
    delta1 = 0.5 * (1.0 + params.delta)
    for t in (1, 100, 256):
        a = impulse_coefficients(params, 256, t, 150)
        fitted = np.max(np.abs(a) * delta1 ** -np.arange(151))
        assert np.isfinite(fitted)
        assert np.all(np.abs(a) <= fitted * delta1 ** np.arange(151) + 1e-15)


def test_impulse_l1_mass_bounded_uniformly():
    # sum_j |a(j)| sigma_plus stays bounded over t for moderate margins
    params = synthesize_params(d=3, T_grid=256, gamma=0.8, seed=5)
    masses = []
    for t in np.linspace(1, 256, 9, dtype=int):
        a = impulse_coefficients(params, 256, int(t), 400)
        masses.append(np.sum(np.abs(a)) * params.sigma_plus)
    assert np.isfinite(masses).all()
    assert max(masses) < 1e3
