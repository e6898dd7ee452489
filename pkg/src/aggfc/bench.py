"""Wall-time and memory benchmarks for the streaming pipeline.

The end-to-end cost of one stream is O(d N T): simulate T steps, run N
order-d filters, update N aggregation weights.  ``scaling_report`` measures
wall time across a horizon ladder and across a bank doubling, for the active
kernel backend and the plain Python one, so the numba speedup is part of the
report.  ``memory_report`` drives the generator-based streaming path under
``tracemalloc`` to show the working set does not grow with T.
"""

import time
import tracemalloc

import numpy as np

from . import kernels
from ._accel import backend_name
from .aggregation import Aggregator, Strategy
from .evaluation import stream_forecast
from .predictors import NlmsPredictor, step_sizes, smoothness_grid
from .tvar import InnovationSpec, iter_tvar, synthesize_params

__all__ = ["scaling_report", "memory_report", "run_bench"]

_BACKENDS = {
    "active": (kernels.simulate_path, kernels.nlms_bank_stream, kernels.aggregate_stream),
    "python": (kernels.simulate_path_py, kernels.nlms_bank_stream_py, kernels.aggregate_stream_py),
}


def _pipeline_runner(params, T, N, d, backend):
    simulate, bank_stream, agg_stream = _BACKENDS[backend]
    innovations = InnovationSpec()
    burn = 64
    rng = np.random.default_rng(42)
    noise = innovations.draw(rng, burn + T)
    t_idx = np.arange(1, T + 1, dtype=float)
    theta_path = np.ascontiguousarray(params.theta_at((t_idx - 1.0) / T))
    sigma_path = np.ascontiguousarray(params.sigma_at(t_idx / T))
    theta0 = np.ascontiguousarray(params.theta_at(0.0))
    sigma0 = float(params.sigma_at(0.0))
    mus = np.ascontiguousarray(step_sizes(T, smoothness_grid(N, 0.5), 0.5))
    eta1 = 0.05
    eta2 = 0.003

    def run():
        x = simulate(theta_path, sigma_path, theta0, sigma0, noise, burn)
        preds = bank_stream(x, mus, d, 1.0, 8.0)
        agg_stream(preds, x, eta1, 1, 0)
        agg_stream(preds, x, eta2, 2, 0)

    return run


def _best_seconds(fn, target=0.05, samples=3):
    fn()  # warmup; also triggers compilation on the jitted path
    t0 = time.perf_counter()
    fn()
    once = time.perf_counter() - t0
    inner = max(1, int(target / max(once, 1e-9)))
    best = float("inf")
    for _ in range(samples):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def scaling_report(
    d=3, N=7, horizons=(1024, 4096, 16384), backends=("active", "python"), target=0.05
) -> dict:
    """Time the full pipeline over a horizon ladder and an N doubling.

    Returns per-backend total seconds and per-step microseconds for each T,
    the wall-time ratio between the largest and smallest horizon (16x work
    when the ladder spans 2^10 to 2^14), and the per-step ratio when N
    doubles at fixed T.
    """
    params = synthesize_params(d=d, T_grid=256, gamma=0.8, seed=3)
    report = {"d": d, "N": N, "horizons": list(horizons), "active_backend": backend_name()}
    for backend in backends:
        rows = []
        for T in horizons:
            sec = _best_seconds(_pipeline_runner(params, T, N, d, backend), target=target)
            rows.append({"T": T, "seconds": sec, "us_per_step": 1e6 * sec / T})
        t_lo, t_hi = rows[0], rows[-1]
        ladder_ratio = t_hi["seconds"] / t_lo["seconds"]
        t_mid = horizons[len(horizons) // 2]
        sec_n = _best_seconds(_pipeline_runner(params, t_mid, N, d, backend), target=target)
        sec_2n = _best_seconds(_pipeline_runner(params, t_mid, 2 * N, d, backend), target=target)
        report[backend] = {
            "times": rows,
            "wall_ratio_hi_lo": ladder_ratio,
            "per_step_ratio_hi_lo": ladder_ratio / (t_hi["T"] / t_lo["T"]),
            "n_doubling_per_step_ratio": sec_2n / sec_n,
        }
    if "active" in report and "python" in report:
        report["speedup_python_over_active"] = (
            report["python"]["times"][0]["seconds"] / report["active"]["times"][0]["seconds"]
        )
    return report


def _stream_once(params, T):
    predictors = [NlmsPredictor(d=params.d, mu=mu) for mu in (0.5, 0.1, 0.02)]
    aggregators = [
        Aggregator(len(predictors), 0.05, Strategy.GRADIENT),
        Aggregator(len(predictors), 0.003, Strategy.LOSS),
    ]
    stream = iter_tvar(params, T, InnovationSpec(), seed=11)
    return stream_forecast(stream, predictors, aggregators)


def memory_report(horizons=(1024, 8192)) -> dict:
    """Peak traced allocation of the generator-fed streaming path per horizon.

    Nothing of length T is materialized on this path, so the peaks should be
    flat in T; the report carries their ratio for the complexity gate.
    """
    params = synthesize_params(d=3, T_grid=256, gamma=0.8, seed=3)
    _stream_once(params, 64)  # warm caches outside the traced window
    peaks = {}
    for T in horizons:
        best = None
        for _ in range(2):  # first window can still catch one-off lazy caches
            tracemalloc.start()
            tracemalloc.reset_peak()
            _stream_once(params, T)
            _, peak = tracemalloc.get_traced_memory()
            tracemalloc.stop()
            best = peak if best is None else min(best, peak)
        peaks[T] = best
    lo, hi = min(horizons), max(horizons)
    return {
        "peak_bytes": peaks,
        "ratio_hi_lo": peaks[hi] / peaks[lo] if peaks[lo] else float("inf"),
    }


def run_bench(d=3, N=7, horizons=(1024, 4096, 16384), compare_backends=True) -> dict:
    """Full benchmark: scaling, backend comparison, memory, and gate booleans.

    Gates: wall-time ratio across the 16x horizon span at most 24 (linear
    with 50% slack), per-step ratio at most 2.5 when N doubles, and a flat
    streaming memory profile (ratio below 2).
    """
    backends = ("active", "python") if compare_backends else ("active",)
    scaling = scaling_report(d=d, N=N, horizons=horizons, backends=backends)
    memory = memory_report()
    active = scaling["active"]
    span = horizons[-1] / horizons[0]
    gates = {
        "wall_ratio_limit": 1.5 * span,
        "wall_ratio_ok": active["wall_ratio_hi_lo"] <= 1.5 * span,
        "n_doubling_limit": 2.5,
        "n_doubling_ok": active["n_doubling_per_step_ratio"] <= 2.5,
        "memory_ratio_limit": 2.0,
        "memory_ok": memory["ratio_hi_lo"] <= 2.0,
    }
    gates["all_ok"] = bool(gates["wall_ratio_ok"] and gates["n_doubling_ok"] and gates["memory_ok"])
    return {"scaling": scaling, "memory": memory, "gates": gates}
