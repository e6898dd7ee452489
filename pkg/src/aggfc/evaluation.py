"""Scoring, the Monte Carlo experiment harness and executable inequality checks.

The score of a predictor sequence is the averaged downward-shifted empirical
loss

    L_T = (1/T) sum_t ((prediction_t - x_t)^2 - sigma^2(t/T)),

i.e. the average squared error minus the noise floor an oracle that knows the
parameters would pay.  ``run_experiment`` replays a configured TVAR experiment
over seeded replications, streaming each path through an NLMS bank and the
exponential-weight aggregators, and reports per-predictor loss quantiles.

The checkers turn the deterministic guarantees of the aggregation rules into
executable assertions: ``regret_margin`` evaluates both sides of the regret
inequalities on concrete instances, ``exp_concavity_gap`` the moment
inequality for distributions on [-a, a] that underlies the loss-weight bound,
and ``fit_decay_constant`` the geometric envelope of the impulse coefficients.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .aggregation import ModelConstants, Strategy
from .config import ExperimentConfig
from .csvio import read_params_csv
from .predictors import build_nlms_bank
from .tvar import TvarParams, simulate_tvar, synthesize_params, impulse_coefficients

__all__ = [
    "shifted_loss",
    "LossReport",
    "ReplicationFailure",
    "run_experiment",
    "load_params",
    "resolve_eta",
    "estimate_model_constants",
    "regret_margin",
    "exp_concavity_gap",
    "exp_concavity_holds",
    "fit_decay_constant",
    "stream_forecast",
]


def shifted_loss(predictions, x, sigma_trace) -> float:
    """Average of squared errors minus sigma^2(t/T); negative means beating the floor."""
    predictions = np.asarray(predictions, dtype=float)
    x = np.asarray(x, dtype=float)
    sigma_trace = np.asarray(sigma_trace, dtype=float)
    if not predictions.shape == x.shape == sigma_trace.shape:
        raise ValueError("predictions, x and sigma_trace must share one length")
    return float(np.mean((predictions - x) ** 2 - sigma_trace**2))


# ---------------------------------------------------------------------------
# deterministic inequality checkers
# ---------------------------------------------------------------------------


def regret_margin(strategy, eta, predictions, observations, n_grid=100, rng=None):
    """Slack (RHS - LHS) of the deterministic regret bound on one instance.

    The aggregate is produced by the actual recursion.  For the loss strategy
    the reference is the best single predictor plus
    ``log(N)/(T eta) + (1/T) sum (y_t^2 - 1/(2 eta))_+``; for the gradient
    strategy it is the best tested convex combination (the N vertices plus
    ``n_grid`` random simplex points, a superset bound for the infimum) plus
    ``log(N)/(T eta) + (2 eta / T) sum y_t^4``, with
    y_t = |x_t| + max_i |prediction_{t,i}|.  Nonnegative on every instance.
    """
    strategy = Strategy(strategy)
    preds = np.ascontiguousarray(np.asarray(predictions, dtype=float))
    x = np.ascontiguousarray(np.asarray(observations, dtype=float))
    if preds.ndim != 2 or x.shape != (preds.shape[0],):
        raise ValueError("predictions must be (T, N) and observations (T,)")
    T, N = preds.shape
    agg, _ = kernels.aggregate_stream(preds, x, float(eta), int(strategy), 0)
    lhs = float(np.mean((agg - x) ** 2))
    y = np.abs(x) + np.max(np.abs(preds), axis=1)
    log_term = math.log(N) / (T * eta)
    if strategy is Strategy.LOSS:
        best = float(np.min(np.mean((preds - x[:, None]) ** 2, axis=0)))
        overshoot = float(np.mean(np.maximum(y**2 - 1.0 / (2.0 * eta), 0.0)))
        return best + log_term + overshoot - lhs
    rng = rng or np.random.default_rng(0)
    candidates = np.vstack([np.eye(N), rng.dirichlet(np.ones(N), size=n_grid)])
    combo_losses = np.mean((preds @ candidates.T - x[:, None]) ** 2, axis=0)
    best = float(np.min(combo_losses))
    variability = 2.0 * eta / T * float(np.sum(y**4))
    return best + log_term + variability - lhs


def exp_concavity_gap(support, probs, a) -> float:
    """Slack of  E[exp(-X^2)] <= exp(-(E X)^2 + (a^2 - 1/2)_+)  for X on [-a, a]."""
    support = np.asarray(support, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if support.shape != probs.shape or support.ndim != 1 or support.size == 0:
        raise ValueError("support and probs must be matching non-empty 1-d arrays")
    if np.any(np.abs(support) > a):
        raise ValueError("support points must lie inside [-a, a]")
    if np.any(probs < 0) or abs(float(probs.sum()) - 1.0) > 1e-9:
        raise ValueError("probs must be a probability vector")
    lhs = float(probs @ np.exp(-(support**2)))
    mean = float(probs @ support)
    rhs = math.exp(-(mean**2) + max(a * a - 0.5, 0.0))
    return rhs - lhs


def exp_concavity_holds(support, probs, a, slack=1e-12) -> bool:
    return exp_concavity_gap(support, probs, a) >= -slack


def fit_decay_constant(params: TvarParams, T, delta1, j_max, n_times=8) -> float:
    """max over sampled t and j <= j_max of delta1^{-j} |a_{t,T}(j)|.

    Finite and stable in j_max whenever the parameter paths respect a
    stability margin delta < delta1.
    """
    if not params.delta < delta1 < 1.0:
        raise ValueError("need params.delta < delta1 < 1")
    ts = np.unique(np.linspace(1, T, n_times, dtype=int))
    j = np.arange(j_max + 1, dtype=float)
    growth = np.exp(-j * math.log(delta1))
    best = 0.0
    for t in ts:
        a = impulse_coefficients(params, T, int(t), j_max)
        best = max(best, float(np.max(np.abs(a) * growth)))
    return best


def estimate_model_constants(
    params: TvarParams, T, innovations, L_star, p=4.0, zeta=1.0, j_max=200
) -> ModelConstants:
    """Fill learning-rate constants from the parameter paths and noise family.

    The l1 coefficient bound is estimated through the fitted geometric
    envelope: A_star <= K * sigma_plus / (1 - delta1) with
    delta1 = (1 + delta)/2.
    """
    delta1 = 0.5 * (1.0 + params.delta)
    K = fit_decay_constant(params, T, delta1, j_max)
    A_star = K * params.sigma_plus / (1.0 - delta1)
    m_p = innovations.abs_moment(p)
    phi = innovations.exp_moment(zeta) if innovations.has_exp_moment else None
    return ModelConstants(
        A_star=A_star,
        a_star=min(K * params.sigma_plus, A_star),
        L_star=float(L_star),
        m_p=m_p if math.isfinite(m_p) else None,
        p=p if math.isfinite(m_p) else None,
        zeta=zeta if phi is not None else None,
        phi_zeta=phi,
        sigma_plus=params.sigma_plus,
    )


# ---------------------------------------------------------------------------
# experiment harness
# ---------------------------------------------------------------------------


@dataclass
class LossReport:
    """Per-predictor averaged shifted losses across replications.

    ``losses[k, j]`` is the loss of predictor ``predictor_ids[j]`` in the
    replication ``replication_ids[k]``.  Aggregates appear as predictors named
    ``strategy_1`` / ``strategy_2`` after the bank members ``nlms_i``.
    """

    predictor_ids: tuple
    losses: np.ndarray
    replication_ids: np.ndarray
    failures: tuple = ()
    weight_traces: dict = field(default_factory=dict)
    regret_margins: dict = field(default_factory=dict)

    def __post_init__(self):
        order = np.argsort(self.replication_ids)
        self.replication_ids = np.asarray(self.replication_ids)[order]
        self.losses = np.asarray(self.losses, dtype=float)[order]

    @property
    def n_replications(self) -> int:
        return self.losses.shape[0]

    @property
    def bank_ids(self) -> tuple:
        return tuple(p for p in self.predictor_ids if p.startswith("nlms_"))

    def column(self, predictor_id) -> np.ndarray:
        return self.losses[:, self.predictor_ids.index(predictor_id)]

    def median(self, predictor_id) -> float:
        return float(np.median(self.column(predictor_id)))

    def iqr(self, predictor_id) -> float:
        lo, hi = np.percentile(self.column(predictor_id), [25, 75])
        return float(hi - lo)

    def five_number(self) -> dict:
        """predictor id -> (min, q25, median, q75, max), order-invariant."""
        out = {}
        for j, pid in enumerate(self.predictor_ids):
            col = self.losses[:, j]
            q = np.percentile(col, [0, 25, 50, 75, 100])
            out[pid] = tuple(float(v) for v in q)
        return out

    def best_bank_predictor(self) -> str:
        return min(self.bank_ids, key=self.median)


class ReplicationFailure(RuntimeError):
    """A single replication produced unusable output (for example non-finite)."""


def load_params(config: ExperimentConfig) -> TvarParams:
    """Materialize the parameter paths a config refers to."""
    if config.path_source == "file":
        return read_params_csv(config.path_file)
    return synthesize_params(
        d=config.d,
        T_grid=config.grid_points,
        gamma=config.gamma,
        n_harmonics=config.n_harmonics,
        seed=config.path_seed,
        sigma=config.sigma_scale,
    )


def resolve_eta(config: ExperimentConfig, strategy, params: TvarParams, N: int) -> float:
    """Learning rate for one strategy under the configured eta mode.

    Adaptive mode uses the horizon/noise-scale calibration: case "i" for the
    gradient strategy and, for the loss strategy, case "iii" under an
    exponential noise moment and case "ii" (moment order ``config.moment_p``)
    otherwise.  Corollary mode evaluates the oracle-bound formulas with
    explicit constants (estimated from the paths when not supplied).
    """
    from .aggregation import eta_adaptive, eta_corollary

    strategy = Strategy(strategy)
    if config.eta_mode == "manual":
        return float(config.eta_value)
    heavy_tail = not config.innovations.has_exp_moment
    if strategy is Strategy.GRADIENT:
        case = "i"
    else:
        case = "ii" if heavy_tail else "iii"
    if config.eta_mode == "adaptive":
        return eta_adaptive(case, params.sigma_plus, config.T, p=config.moment_p)
    constants = config.constants
    if constants is None:
        p = 4.0 if case == "i" else config.moment_p
        constants = estimate_model_constants(
            params, config.T, config.innovations, L_star=config.clip, p=p
        )
    return eta_corollary(case, constants, config.T, N)


def _replicate(params, config, mus, etas, r):
    """One seeded replication: simulate, stream the bank, aggregate, score."""
    seed = config.base_seed + r
    realization = simulate_tvar(params, config.T, config.innovations, seed)
    x = realization.x
    if not np.all(np.isfinite(x)):
        raise ReplicationFailure(f"replication {r}: simulated path is not finite")
    preds = kernels.nlms_bank_stream(x, mus, config.d, config.eps, config.clip)
    sig2 = realization.sigma_trace**2
    losses = list(np.mean((preds - x[:, None]) ** 2 - sig2[:, None], axis=0))
    traces = {}
    margins = {}
    want_trace = 1 if (config.export_weights and r == 0) else 0
    for s in config.strategies:
        agg, wtrace = kernels.aggregate_stream(preds, x, etas[s], int(s), want_trace)
        if not np.all(np.isfinite(agg)):
            raise ReplicationFailure(f"replication {r}: strategy {s} aggregate is not finite")
        losses.append(float(np.mean((agg - x) ** 2 - sig2)))
        if want_trace:
            traces[s] = wtrace
        if config.debug_checks:
            margin = regret_margin(s, etas[s], preds, x)
            if margin < -1e-9:
                raise ReplicationFailure(
                    f"replication {r}: strategy {s} regret bound violated by {margin:g}"
                )
            margins[s] = margin
    return np.asarray(losses), traces, margins


def _replicate_worker(args):
    params, config, mus, etas, r = args
    try:
        losses, traces, margins = _replicate(params, config, mus, etas, r)
        return r, losses, traces, margins, None
    except ReplicationFailure as exc:
        return r, None, None, None, str(exc)


def run_experiment(config: ExperimentConfig, params: TvarParams | None = None) -> LossReport:
    """Run the configured Monte Carlo comparison and collect loss quantiles.

    Replication r uses seed ``base_seed + r`` and is independent of every
    other one, so the loop parallelizes over ``config.jobs`` workers without
    changing the result.  Failed replications are recorded in
    ``report.failures`` instead of aborting the batch.
    """
    if params is None:
        params = load_params(config)
    if params.d != config.d:
        raise ValueError(f"config.d = {config.d} but parameter paths have d = {params.d}")
    spec, _ = build_nlms_bank(
        config.T, beta_0=config.beta_0, c_mu=config.c_mu, d=config.d,
        eps=config.eps, clip=config.clip,
    )
    etas = {s: resolve_eta(config, s, params, spec.N) for s in config.strategies}
    predictor_ids = tuple(
        [f"nlms_{i}" for i in range(1, spec.N + 1)]
        + [f"strategy_{s}" for s in config.strategies]
    )
    mus = np.ascontiguousarray(spec.mu_values)

    jobs = [(params, config, mus, etas, r) for r in range(config.replications)]
    results = []
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_replicate_worker, jobs))
    else:
        results = [_replicate_worker(j) for j in jobs]

    rows, ids, failures = [], [], []
    weight_traces, margins = {}, {}
    for r, losses, traces, margin, err in sorted(results, key=lambda item: item[0]):
        if err is not None:
            failures.append((r, err))
            continue
        rows.append(losses)
        ids.append(r)
        if traces:
            weight_traces.update(traces)
        if margin:
            margins[r] = margin
    if not rows:
        raise RuntimeError("every replication failed; nothing to report")
    return LossReport(
        predictor_ids=predictor_ids,
        losses=np.vstack(rows),
        replication_ids=np.asarray(ids),
        failures=tuple(failures),
        weight_traces=weight_traces,
        regret_margins=margins,
    )


def stream_forecast(stream, predictors, aggregators=()):
    """Drive live predictors and aggregators from a (x_t, sigma_t) stream.

    Only running loss sums are kept, so the working set is proportional to
    the number of predictors and their order, not to the stream length.
    Returns the averaged shifted losses, bank members first.
    """
    n = len(predictors)
    sums = np.zeros(n + len(aggregators))
    preds = np.empty(n)
    count = 0
    for x_t, sigma_t in stream:
        for i, predictor in enumerate(predictors):
            preds[i] = predictor.predict()
        floor = sigma_t * sigma_t
        sums[:n] += (preds - x_t) ** 2 - floor
        for k, agg in enumerate(aggregators):
            yhat = agg.predict(preds)
            sums[n + k] += (yhat - x_t) ** 2 - floor
        for predictor in predictors:
            predictor.update(x_t)
        for agg in aggregators:
            agg.update(x_t)
        count += 1
    if count == 0:
        raise ValueError("empty stream")
    return sums / count
