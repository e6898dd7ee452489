"""Exponential-weight aggregation of a finite bank of predictors.

Two weighting strategies are supported, both recursive and O(N) per step:

* strategy 1 ("gradient") tilts each weight by the gradient of the squared
  loss of the *aggregate* at the expert's prediction:
  ``v_i = w_i * exp(-2 eta (aggregate - x) * prediction_i)``;
* strategy 2 ("loss") tilts by the expert's own squared loss:
  ``v_i = w_i * exp(-eta (prediction_i - x)^2)``.

Weights start uniform and stay on the probability simplex; all bookkeeping is
carried in the log domain with max-subtraction so arbitrarily large losses
cannot overflow.  ``batch_weights`` evaluates the equivalent closed forms
(softmax of cumulative sums) and serves as the independent oracle for the
recursion.  The ``eta_*`` helpers return the learning rates that optimize the
oracle bounds, either from explicit model constants or from the
noise-scale/horizon calibration used by the adaptive forecaster.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Strategy",
    "Aggregator",
    "ModelConstants",
    "batch_weights",
    "batch_weight_trajectory",
    "eta_corollary",
    "eta_adaptive",
]

_HUGE = 1.7976931348623157e308


class Strategy(enum.IntEnum):
    """Weight-update rule; fixed for the whole sequence of predictions."""

    GRADIENT = 1
    LOSS = 2


def _softmax(logv: np.ndarray) -> np.ndarray:
    w = np.exp(logv - np.max(logv))
    return w / w.sum()


def _sanitize(inc: np.ndarray) -> np.ndarray:
    # keep log-weight increments finite: +-inf clamps to the float range,
    # NaN (only reachable through inf - inf upstream) becomes neutral
    return np.nan_to_num(inc, nan=0.0, posinf=_HUGE, neginf=-_HUGE)


class Aggregator:
    """Recursive exponential-weight mixer over N prediction streams.

    The per-step protocol is strict: ``predict(predictions)`` first (returns
    the convex combination and caches its inputs), then ``update(x_t)`` once
    the truth arrives.  Calling ``update`` without a pending prediction is an
    error because strategy 1 needs the cached aggregate.
    """

    def __init__(self, n, eta, strategy=Strategy.GRADIENT):
        if n < 1:
            raise ValueError("need at least one predictor")
        if not eta > 0:
            raise ValueError("learning rate eta must be positive")
        self.n = int(n)
        self.eta = float(eta)
        self.strategy = Strategy(strategy)
        self.log_weights = np.zeros(self.n)
        self.t = 1
        self._pending_predictions = None
        self._pending_aggregate = None

    @property
    def weights(self) -> np.ndarray:
        """Current simplex weights (uniform at t = 1)."""
        return _softmax(self.log_weights)

    def predict(self, predictions) -> float:
        """Convex combination of the expert predictions under current weights."""
        predictions = np.asarray(predictions, dtype=float)
        if predictions.shape != (self.n,):
            raise ValueError(f"expected {self.n} predictions, got shape {predictions.shape}")
        w = self.weights
        aggregate = float(w @ predictions)
        self._pending_predictions = predictions.copy()
        self._pending_aggregate = aggregate
        return aggregate

    def update(self, x_t: float) -> None:
        """Fold in the realized value and advance the weights."""
        if self._pending_predictions is None:
            raise RuntimeError("predict() must be called before update()")
        p = self._pending_predictions
        with np.errstate(over="ignore", invalid="ignore"):
            if self.strategy is Strategy.GRADIENT:
                inc = -2.0 * self.eta * (self._pending_aggregate - x_t) * p
            else:
                inc = -self.eta * (p - x_t) ** 2
            self.log_weights += _sanitize(inc)
        self.log_weights -= np.max(self.log_weights)
        self._pending_predictions = None
        self._pending_aggregate = None
        self.t += 1


def batch_weight_trajectory(strategy, eta, predictions, observations) -> np.ndarray:
    """Closed-form weights at every step, straight from cumulative sums.

    Row t (0-based) holds the weights in force at step t + 1, i.e. the softmax
    of ``-eta * cumulative loss`` terms over steps 1..t.  No per-step
    renormalization is involved, which makes this the independent reference
    for :class:`Aggregator`.

    Parameters
    ----------
    predictions : (T, N) array
    observations : (T,) array
    """
    strategy = Strategy(strategy)
    predictions = np.asarray(predictions, dtype=float)
    observations = np.asarray(observations, dtype=float)
    if predictions.ndim != 2 or observations.shape != (predictions.shape[0],):
        raise ValueError("predictions must be (T, N) and observations (T,)")
    T, N = predictions.shape
    out = np.empty((T + 1, N))
    cum = np.zeros(N)
    out[0] = 1.0 / N
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(T):
            if strategy is Strategy.GRADIENT:
                w = _softmax(cum)
                aggregate = float(w @ predictions[s])
                cum += _sanitize(-2.0 * eta * (aggregate - observations[s]) * predictions[s])
            else:
                cum += _sanitize(-eta * (predictions[s] - observations[s]) ** 2)
            out[s + 1] = _softmax(cum)
    return out


def batch_weights(strategy, eta, predictions, observations) -> np.ndarray:
    """Closed-form weights after a full history (empty history gives uniform)."""
    predictions = np.asarray(predictions, dtype=float)
    if predictions.size == 0:
        n = predictions.shape[1] if predictions.ndim == 2 else 0
        if n < 1:
            raise ValueError("cannot infer the number of predictors from an empty history")
        return np.full(n, 1.0 / n)
    return batch_weight_trajectory(strategy, eta, predictions, observations)[-1]


@dataclass(frozen=True)
class ModelConstants:
    """Population constants entering the learning-rate formulas.

    ``A_star`` bounds the l1 norm of the sub-linear representation
    coefficients, ``a_star`` their sup (a_star <= A_star), ``L_star`` the l1
    Lipschitz budget of the predictors, ``m_p`` the p-th absolute noise moment,
    ``zeta``/``phi_zeta`` an exponential noise moment, and ``sigma_plus`` the
    noise-scale ceiling.  Fields may stay None when the corresponding case is
    not used.
    """

    A_star: float
    L_star: float
    a_star: float | None = None
    m_p: float | None = None
    p: float | None = None
    zeta: float | None = None
    phi_zeta: float | None = None
    sigma_plus: float = 1.0

    def __post_init__(self):
        if not self.A_star > 0:
            raise ValueError("A_star must be positive")
        if self.L_star < 0:
            raise ValueError("L_star must be nonnegative")
        if self.a_star is not None and not 0 < self.a_star <= self.A_star * (1 + 1e-12):
            raise ValueError("a_star must lie in (0, A_star]")
        if self.m_p is not None and not self.m_p > 0:
            raise ValueError("m_p must be positive")
        if self.p is not None and not self.p > 2:
            raise ValueError("moment order p must exceed 2")
        if self.zeta is not None and not self.zeta > 0:
            raise ValueError("zeta must be positive")
        if self.phi_zeta is not None and not self.phi_zeta >= 1:
            raise ValueError("phi_zeta is a moment of exp(zeta |Z|), hence >= 1")
        if not self.sigma_plus > 0:
            raise ValueError("sigma_plus must be positive")


def eta_corollary(case, constants: ModelConstants, T, N) -> float:
    """Learning rate optimizing the oracle bound, by noise regime.

    case "i"   (4th-moment noise, gradient weights):
        eta = (2 m_4)^(-1/2) (1+L*)^-2 A*^-2 sqrt(log(N)/T)
    case "ii"  (p-th moment noise, loss weights):
        eta = (2 m_p^(2/p))^-1 (1+L*)^-2 A*^-2 (log(N)/T)^(2/p)
    case "iii" (exponential-moment noise, loss weights):
        eta = zeta^2 (2 (1+L*)^2 A*^2)^-1 (log(T / log N))^-2

    Natural logarithms throughout.
    """
    if N < 2:
        raise ValueError("need at least two predictors (log N must be positive)")
    if T < 1:
        raise ValueError("T must be at least 1")
    lam = (1.0 + constants.L_star) ** 2 * constants.A_star**2
    log_n = math.log(N)
    if case == "i":
        if constants.m_p is None or constants.p != 4:
            raise ValueError("case i needs the 4th noise moment (p = 4)")
        return (log_n / T) ** 0.5 / (math.sqrt(2.0 * constants.m_p) * lam)
    if case == "ii":
        if constants.m_p is None or constants.p is None:
            raise ValueError("case ii needs m_p and p > 2")
        return (log_n / T) ** (2.0 / constants.p) / (
            2.0 * constants.m_p ** (2.0 / constants.p) * lam
        )
    if case == "iii":
        if constants.zeta is None:
            raise ValueError("case iii needs the exponential-moment parameter zeta")
        if T <= log_n:
            raise ValueError("case iii needs T > log N")
        return constants.zeta**2 / (2.0 * lam) * math.log(T / log_n) ** -2
    raise ValueError(f"unknown case {case!r}; expected 'i', 'ii' or 'iii'")


def eta_adaptive(case, sigma_plus, T, p=None) -> float:
    """Learning rate of the smoothness-adaptive forecaster (bank of ceil(log T)).

    case "i":   sigma_plus^-2 sqrt(log(ceil(log T)) / T)   (gradient weights)
    case "ii":  sigma_plus^-2 (log(ceil(log T)) / T)^(2/p) (loss weights, p > 2)
    case "iii": sigma_plus^-2 (log T)^-3                   (loss weights)
    """
    if T < 3:
        raise ValueError("T must be at least 3")
    if not sigma_plus > 0:
        raise ValueError("sigma_plus must be positive")
    scale = sigma_plus**-2
    if case == "i":
        return scale * math.sqrt(math.log(math.ceil(math.log(T))) / T)
    if case == "ii":
        if p is None or not p > 2:
            raise ValueError("case ii needs a moment order p > 2")
        return scale * (math.log(math.ceil(math.log(T))) / T) ** (2.0 / p)
    if case == "iii":
        return scale * math.log(T) ** -3
    raise ValueError(f"unknown case {case!r}; expected 'i', 'ii' or 'iii'")
