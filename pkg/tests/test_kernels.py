"""The jitted kernels and their plain-Python twins agree."""

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from aggfc import kernels


def make_instance(T=400, N=5, d=3, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(T)
    mus = np.sort(rng.uniform(0.01, 0.6, N))[::-1].copy()
    return x, mus, d


def test_simulate_backends_bit_identical():
    rng = np.random.default_rng(1)
    T, d = 300, 3
    theta_path = rng.uniform(-0.3, 0.3, (T, d))
    sigma_path = rng.uniform(0.5, 1.5, T)
    noise = rng.standard_normal(T + 50)
    args = (theta_path, sigma_path, np.zeros(d), 1.0, noise, 50)
    assert_array_equal(kernels.simulate_path(*args), kernels.simulate_path_py(*args))


def test_nlms_backends_bit_identical():
    x, mus, d = make_instance()
    a = kernels.nlms_bank_stream(x, mus, d, 1.0, 8.0)
    b = kernels.nlms_bank_stream_py(x, mus, d, 1.0, 8.0)
    assert_array_equal(a, b)


def test_aggregate_backends_agree():
    # the two backends may round exp() differently by one ulp, nothing more
    x, mus, d = make_instance()
    preds = kernels.nlms_bank_stream(x, mus, d, 1.0, 8.0)
    for strategy in (1, 2):
        pa, wa = kernels.aggregate_stream(preds, x, 0.1, strategy, 1)
        pb, wb = kernels.aggregate_stream_py(preds, x, 0.1, strategy, 1)
        assert_allclose(pa, pb, atol=1e-13)
        assert_allclose(wa, wb, atol=1e-13)


def test_impulse_backends_bit_identical():
    rng = np.random.default_rng(2)
    theta_win = rng.uniform(-0.3, 0.3, (41, 3))
    assert_array_equal(
        kernels.impulse_response(theta_win, 3, 40),
        kernels.impulse_response_py(theta_win, 3, 40),
    )


def test_aggregate_trace_flag_consistent():
    x, mus, d = make_instance(seed=3)
    preds = kernels.nlms_bank_stream(x, mus, d, 1.0, 8.0)
    for strategy in (1, 2):
        full_agg, full_trace = kernels.aggregate_stream(preds, x, 0.2, strategy, 1)
        slim_agg, last_row = kernels.aggregate_stream(preds, x, 0.2, strategy, 0)
        assert_array_equal(full_agg, slim_agg)
        assert last_row.shape == (1, preds.shape[1])
        assert_array_equal(last_row[0], full_trace[-1])


def test_aggregate_weight_rows_on_simplex():
    x, mus, d = make_instance(seed=4)
    preds = kernels.nlms_bank_stream(x, mus, d, 1.0, 8.0)
    _, trace = kernels.aggregate_stream(preds, x, 0.5, 2, 1)
    assert np.all(trace >= 0.0)
    assert_allclose(trace.sum(axis=1), np.ones(len(x)), atol=1e-12)
    assert_allclose(trace[0], np.full(preds.shape[1], 1.0 / preds.shape[1]))
