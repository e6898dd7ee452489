"""One-step-ahead predictors with a bounded-coefficient (Lipschitz) guarantee.

The workhorse is a normalized least mean squares (NLMS) filter of order d:
it predicts with the inner product of its current coefficient estimate and
the last d observations, then takes a normalized gradient step on the squared
error.  After every step the estimate is rescaled onto the l1 ball of radius
``clip``, so each prediction is bounded by ``clip`` times the largest recent
observation; that is the Lipschitz property the aggregation bounds need.

A bank of such filters covers an exponent grid of step sizes
mu_i = c_mu * T^(-2 beta_i / (2 beta_i + 1)), beta_i increasing, so that at
least one member tracks coefficient paths of any smoothness in (0, beta_0).
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NlmsPredictor",
    "ZeroPredictor",
    "FrozenArPredictor",
    "PredictorBankSpec",
    "bank_size",
    "smoothness_grid",
    "step_sizes",
    "build_nlms_bank",
]


class NlmsPredictor:
    """Order-d NLMS filter with l1 clipping.

    Parameters
    ----------
    d : int
        Autoregressive order (length of the observation buffer).
    mu : float
        Gradient step size; mu = 0 freezes the estimate.
    eps : float
        Regularizer added to the input energy in the normalization.
    clip : float
        l1 bound enforced on the coefficient estimate after every update.
    """

    def __init__(self, d, mu, eps=1.0, clip=8.0):
        if d < 1:
            raise ValueError("order d must be at least 1")
        if mu < 0:
            raise ValueError("step size mu must be nonnegative")
        if eps <= 0:
            raise ValueError("regularizer eps must be positive")
        if clip <= 0:
            raise ValueError("l1 bound clip must be positive")
        self.d = int(d)
        self.mu = float(mu)
        self.eps = float(eps)
        self.clip = float(clip)
        self.theta_hat = np.zeros(self.d)
        # last d observations, most recent first, zero-padded at the start
        self.buffer = np.zeros(self.d)

    def predict(self) -> float:
        """Inner product of the current estimate with the buffered past."""
        return float(self.theta_hat @ self.buffer)

    def update(self, x_t: float) -> None:
        """Normalized gradient step on (x_t - prediction)^2, then clip and shift."""
        phi = self.buffer
        e = x_t - float(self.theta_hat @ phi)
        self.theta_hat += self.mu * e * phi / (self.eps + float(phi @ phi))
        l1 = float(np.sum(np.abs(self.theta_hat)))
        if l1 > self.clip:
            self.theta_hat *= self.clip / l1
        self.buffer[1:] = self.buffer[:-1]
        self.buffer[0] = x_t

    def reset(self) -> None:
        self.theta_hat[:] = 0.0
        self.buffer[:] = 0.0


class ZeroPredictor:
    """Baseline that always predicts zero."""

    def __init__(self, d=1):
        self.d = int(d)

    def predict(self) -> float:
        return 0.0

    def update(self, x_t: float) -> None:
        pass

    def reset(self) -> None:
        pass


class FrozenArPredictor:
    """Fixed-coefficient linear predictor; only the buffer advances."""

    def __init__(self, theta):
        self.theta = np.atleast_1d(np.asarray(theta, dtype=float)).copy()
        self.d = self.theta.size
        self.buffer = np.zeros(self.d)

    def predict(self) -> float:
        return float(self.theta @ self.buffer)

    def update(self, x_t: float) -> None:
        self.buffer[1:] = self.buffer[:-1]
        self.buffer[0] = x_t

    def reset(self) -> None:
        self.buffer[:] = 0.0


def bank_size(T, beta_0) -> int:
    """Number of bank members: ceil(log T) for finite beta_0, ceil((log T)^2) else."""
    if T < 3:
        raise ValueError("T must be at least 3")
    if not beta_0 > 0:
        raise ValueError("beta_0 must be positive")
    if math.isinf(beta_0):
        return math.ceil(math.log(T) ** 2)
    return math.ceil(math.log(T))


def smoothness_grid(N, beta_0) -> np.ndarray:
    """Exponents beta_i = (i-1) beta_0 / N, or (i-1)/sqrt(N) when beta_0 is inf."""
    i = np.arange(1, N + 1, dtype=float)
    if math.isinf(beta_0):
        return (i - 1.0) / math.sqrt(N)
    return (i - 1.0) * beta_0 / N


def step_sizes(T, beta_grid, c_mu) -> np.ndarray:
    """mu_i = c_mu * T^(-2 beta_i / (2 beta_i + 1)); strictly decreasing in beta."""
    beta_grid = np.asarray(beta_grid, dtype=float)
    return c_mu * float(T) ** (-2.0 * beta_grid / (2.0 * beta_grid + 1.0))


@dataclass(frozen=True)
class PredictorBankSpec:
    """Static description of an NLMS bank, serializable into experiment configs."""

    N: int
    beta_grid: np.ndarray
    mu_values: np.ndarray
    c_mu: float
    beta_0: float
    d: int
    eps: float
    clip: float

    def __post_init__(self):
        bg = np.ascontiguousarray(np.asarray(self.beta_grid, dtype=float))
        mv = np.ascontiguousarray(np.asarray(self.mu_values, dtype=float))
        if bg.shape != (self.N,) or mv.shape != (self.N,):
            raise ValueError("beta_grid and mu_values must both have length N")
        if np.any(np.diff(mv) >= 0):
            raise ValueError("mu_values must be strictly decreasing")
        bg.setflags(write=False)
        mv.setflags(write=False)
        object.__setattr__(self, "beta_grid", bg)
        object.__setattr__(self, "mu_values", mv)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "beta_grid": self.beta_grid.tolist(),
            "mu_values": self.mu_values.tolist(),
            "c_mu": self.c_mu,
            "beta_0": self.beta_0,
            "d": self.d,
            "eps": self.eps,
            "clip": self.clip,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PredictorBankSpec":
        return cls(
            N=int(data["N"]),
            beta_grid=np.asarray(data["beta_grid"], dtype=float),
            mu_values=np.asarray(data["mu_values"], dtype=float),
            c_mu=float(data["c_mu"]),
            beta_0=float(data["beta_0"]),
            d=int(data["d"]),
            eps=float(data["eps"]),
            clip=float(data["clip"]),
        )


def build_nlms_bank(T, beta_0=0.5, c_mu=0.5, d=3, eps=1.0, clip=8.0):
    """Build the step-size grid and the corresponding live NLMS filters.

    Returns
    -------
    (PredictorBankSpec, list[NlmsPredictor])
        Deterministic given (T, beta_0, c_mu, d, eps, clip).
    """
    N = bank_size(T, beta_0)
    beta_grid = smoothness_grid(N, beta_0)
    mus = step_sizes(T, beta_grid, c_mu)
    spec = PredictorBankSpec(
        N=N,
        beta_grid=beta_grid,
        mu_values=mus,
        c_mu=float(c_mu),
        beta_0=float(beta_0),
        d=int(d),
        eps=float(eps),
        clip=float(clip),
    )
    bank = [NlmsPredictor(d=d, mu=float(mu), eps=eps, clip=clip) for mu in mus]
    return spec, bank
