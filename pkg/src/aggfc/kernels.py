"""Streaming inner loops shared by the simulator, the predictor bank and the
exponential-weight aggregator.

Every public name here is a loop over time with recurrence across steps, so
numpy cannot vectorize it; the loops are written in nopython-compatible style
and compiled with numba unless ``AGGFC_DISABLE_NUMBA`` is set.  The
un-compiled originals stay importable with a ``_py`` suffix so the two
backends can be benchmarked and cross-checked against each other.
"""

import numpy as np

from ._accel import accelerate

__all__ = [
    "simulate_path",
    "nlms_bank_stream",
    "aggregate_stream",
    "impulse_response",
    "simulate_path_py",
    "nlms_bank_stream_py",
    "aggregate_stream_py",
    "impulse_response_py",
]

_HUGE = 1.7976931348623157e308


def _simulate_path(theta_path, sigma_path, theta0, sigma0, noise, burn_in):
    # theta_path: (T, d) coefficients at rescaled times (t-1)/T, t = 1..T
    # sigma_path: (T,) noise scale at t/T
    # noise: (burn_in + T,) standardized innovations
    # Burn-in runs the recursion with the time-zero parameters from a zero
    # start so the state reaches its stationary regime before t = 1.
    T, d = theta_path.shape
    buf = np.zeros(d)
    for s in range(burn_in):
        val = sigma0 * noise[s]
        for k in range(d):
            val += theta0[k] * buf[k]
        for k in range(d - 1, 0, -1):
            buf[k] = buf[k - 1]
        buf[0] = val
    x = np.empty(T)
    for t in range(T):
        val = sigma_path[t] * noise[burn_in + t]
        for k in range(d):
            val += theta_path[t, k] * buf[k]
        x[t] = val
        for k in range(d - 1, 0, -1):
            buf[k] = buf[k - 1]
        buf[0] = val
    return x


def _nlms_bank_stream(x, mus, d, eps, clip):
    # Runs N normalized-LMS filters of order d over one path.  preds[t, i] is
    # filter i's one-step-ahead prediction of x[t] from x[t-1], ..., x[t-d].
    T = x.shape[0]
    N = mus.shape[0]
    theta = np.zeros((N, d))
    buf = np.zeros(d)
    preds = np.empty((T, N))
    for t in range(T):
        norm2 = 0.0
        for k in range(d):
            norm2 += buf[k] * buf[k]
        for i in range(N):
            p = 0.0
            for k in range(d):
                p += theta[i, k] * buf[k]
            preds[t, i] = p
            e = x[t] - p
            g = mus[i] * e / (eps + norm2)
            l1 = 0.0
            for k in range(d):
                theta[i, k] += g * buf[k]
                l1 += abs(theta[i, k])
            if l1 > clip:
                sc = clip / l1
                for k in range(d):
                    theta[i, k] *= sc
        for k in range(d - 1, 0, -1):
            buf[k] = buf[k - 1]
        buf[0] = x[t]
    return preds


def _aggregate_stream(preds, x, eta, strategy, keep_trace=1):
    # Exponential-weight aggregation over one stream of expert predictions.
    # strategy 1 tilts by the gradient of the squared loss at the aggregate,
    # strategy 2 by each expert's own squared loss.  Weights live in the log
    # domain and are re-centred at the running max after every update.  With
    # keep_trace=0 only the final weight row is returned, which spares the
    # (T, N) allocation on hot paths.
    T, N = preds.shape
    logw = np.zeros(N)
    w = np.empty(N)
    agg = np.empty(T)
    n_rows = T if keep_trace != 0 else 1
    wtrace = np.empty((n_rows, N))
    for t in range(T):
        m = logw[0]
        for i in range(1, N):
            if logw[i] > m:
                m = logw[i]
        s = 0.0
        for i in range(N):
            w[i] = np.exp(logw[i] - m)
            s += w[i]
        yhat = 0.0
        for i in range(N):
            w[i] /= s
            yhat += w[i] * preds[t, i]
        agg[t] = yhat
        if keep_trace != 0:
            for i in range(N):
                wtrace[t, i] = w[i]
        elif t == T - 1:
            for i in range(N):
                wtrace[0, i] = w[i]
        if strategy == 1:
            grad = -2.0 * eta * (yhat - x[t])
            for i in range(N):
                inc = grad * preds[t, i]
                if not np.isfinite(inc):
                    if inc != inc:
                        inc = 0.0
                    elif inc > 0.0:
                        inc = _HUGE
                    else:
                        inc = -_HUGE
                logw[i] += inc
        else:
            for i in range(N):
                diff = preds[t, i] - x[t]
                inc = -eta * diff * diff
                if not np.isfinite(inc):
                    if inc != inc:
                        inc = 0.0
                    elif inc > 0.0:
                        inc = _HUGE
                    else:
                        inc = -_HUGE
                logw[i] += inc
        m = logw[0]
        for i in range(1, N):
            if logw[i] > m:
                m = logw[i]
        for i in range(N):
            logw[i] -= m
    return agg, wtrace


def _impulse_response(theta_win, d, j_max):
    # theta_win[m] holds the AR coefficients driving step s = s_last - j_max + m,
    # m = 0..j_max.  a[j] is the response at the last step to a unit impulse
    # injected j steps earlier; a[0] = 1 by construction.
    a = np.empty(j_max + 1)
    a[0] = 1.0
    w = np.empty(j_max + 1)
    for j in range(1, j_max + 1):
        w[0] = 1.0
        for m in range(1, j + 1):
            acc = 0.0
            kmax = m if m < d else d
            for k in range(1, kmax + 1):
                acc += theta_win[j_max - j + m, k - 1] * w[m - k]
            w[m] = acc
        a[j] = w[j]
    return a


simulate_path_py = _simulate_path
nlms_bank_stream_py = _nlms_bank_stream
aggregate_stream_py = _aggregate_stream
impulse_response_py = _impulse_response

simulate_path = accelerate(_simulate_path)
nlms_bank_stream = accelerate(_nlms_bank_stream)
aggregate_stream = accelerate(_aggregate_stream)
impulse_response = accelerate(_impulse_response)


def warmup():
    """Trigger compilation of all kernels on tiny inputs."""
    th = np.zeros((2, 1))
    simulate_path(th, np.ones(2), np.zeros(1), 1.0, np.zeros(4), 2)
    nlms_bank_stream(np.zeros(2), np.array([0.1]), 1, 1.0, 8.0)
    aggregate_stream(np.zeros((2, 2)), np.zeros(2), 0.1, 1, 1)
    aggregate_stream(np.zeros((2, 2)), np.zeros(2), 0.1, 2, 0)
    impulse_response(np.zeros((3, 1)), 1, 2)
