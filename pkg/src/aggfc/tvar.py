"""Time varying autoregressive (TVAR) processes.

A TVAR path of order ``d`` follows

    X_t = sum_j theta_j((t-1)/T) * X_{t-j} + sigma(t/T) * xi_t,   t = 1..T,

where the coefficient functions ``theta`` and the noise scale ``sigma`` live
on rescaled time u in [0, 1] (extended by constant continuation to u <= 0) and
``xi`` is an i.i.d. standardized innovation sequence.  This module generates
admissible coefficient paths from randomly drawn partial autocorrelations,
validates the uniform stability margin, simulates realizations and computes
the moving-average (impulse) coefficients of the linear representation.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "PacfPath",
    "TvarParams",
    "InnovationSpec",
    "TvarRealization",
    "levinson_durbin",
    "pacf_from_ar",
    "companion_matrix",
    "spectral_radius",
    "check_stability",
    "sample_pacf_paths",
    "synthesize_params",
    "burn_in_length",
    "simulate_tvar",
    "iter_tvar",
    "impulse_coefficients",
]

#: relative slack admitted on the stability margin, so that roots sitting
#: exactly on the boundary circle of radius 1/delta are accepted.
_STABILITY_RTOL = 1e-10


def levinson_durbin(pacf):
    """Convert partial autocorrelations to AR coefficients (step-up recursion).

    Parameters
    ----------
    pacf : array_like
        Reflection coefficients, each strictly inside (-1, 1).

    Returns
    -------
    ndarray
        Coefficients ``theta`` such that ``1 - sum_j theta_j z^j`` has all
        roots strictly outside the closed unit disk.
    """
    pacf = np.atleast_1d(np.asarray(pacf, dtype=float))
    if pacf.ndim != 1 or pacf.size == 0:
        raise ValueError("pacf must be a non-empty 1-d sequence")
    if np.any(np.abs(pacf) >= 1.0):
        raise ValueError("partial autocorrelations must lie strictly in (-1, 1)")
    a = np.empty(0)
    for k in range(1, pacf.size + 1):
        phi = pacf[k - 1]
        nxt = np.empty(k)
        nxt[k - 1] = phi
        if k > 1:
            nxt[: k - 1] = a - phi * a[::-1]
        a = nxt
    return a


def pacf_from_ar(theta):
    """Invert :func:`levinson_durbin` (step-down recursion).

    Raises ``ValueError`` when the coefficients do not correspond to a stable
    model, i.e. when some intermediate reflection coefficient reaches 1 in
    magnitude.
    """
    a = np.atleast_1d(np.asarray(theta, dtype=float)).copy()
    d = a.size
    pacf = np.empty(d)
    for k in range(d, 0, -1):
        phi = a[k - 1]
        if abs(phi) >= 1.0:
            raise ValueError("coefficients are not in the stable region")
        pacf[k - 1] = phi
        if k > 1:
            a = (a[: k - 1] + phi * a[k - 2 :: -1]) / (1.0 - phi * phi)
    return pacf


def companion_matrix(theta):
    """d x d companion matrix of ``1 - sum_j theta_j z^j``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    d = theta.size
    C = np.zeros((d, d))
    C[0, :] = theta
    if d > 1:
        C[1:, :-1] = np.eye(d - 1)
    return C


def spectral_radius(theta):
    """Largest eigenvalue modulus of the companion matrix."""
    return float(np.max(np.abs(np.linalg.eigvals(companion_matrix(theta)))))


def check_stability(theta, delta):
    """True when the AR polynomial has no root inside the disk of radius 1/delta.

    Equivalently, all companion-matrix eigenvalue moduli are at most ``delta``
    (up to a relative tolerance of 1e-10, admitting boundary roots).
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.size < 1:
        raise ValueError("order d must be at least 1")
    return spectral_radius(theta) <= delta * (1.0 + _STABILITY_RTOL)


@dataclass(frozen=True)
class PacfPath:
    """Sampled paths of partial autocorrelations, one per lag.

    ``grid`` has shape (T_grid, d): row k holds the d reflection coefficients
    at rescaled time u = k / (T_grid - 1).  Every entry stays strictly inside
    (-gamma, gamma) for the margin ``gamma`` used at synthesis (all-zero paths
    carry gamma = 0).
    """

    grid: np.ndarray
    gamma: float

    def __post_init__(self):
        grid = np.ascontiguousarray(np.asarray(self.grid, dtype=float))
        if grid.ndim != 2 or grid.shape[0] < 2 or grid.shape[1] < 1:
            raise ValueError("grid must be (T_grid >= 2, d >= 1)")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.gamma == 0.0:
            if np.any(grid != 0.0):
                raise ValueError("gamma = 0 admits only all-zero paths")
        elif np.any(np.abs(grid) >= self.gamma):
            raise ValueError("pacf values must lie strictly inside (-gamma, gamma)")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    @property
    def d(self) -> int:
        return self.grid.shape[1]

    @property
    def n_points(self) -> int:
        return self.grid.shape[0]


@dataclass(frozen=True)
class TvarParams:
    """Sampled TVAR parameter paths with a certified stability margin.

    ``theta`` has shape (T_grid, d) and ``sigma`` shape (T_grid,), both sampled
    on the equispaced grid u = 0, 1/(T_grid-1), ..., 1.  Between grid points
    the paths are linearly interpolated; for u <= 0 they continue with their
    value at u = 0.  Validation requires every grid point to pass
    :func:`check_stability` at margin ``delta`` and the noise scale to stay
    within [rho * sigma_plus, sigma_plus].
    """

    theta: np.ndarray
    sigma: np.ndarray
    delta: float
    rho: float = 0.0
    sigma_plus: float = 1.0

    def __post_init__(self):
        theta = np.ascontiguousarray(np.asarray(self.theta, dtype=float))
        sigma = np.ascontiguousarray(np.asarray(self.sigma, dtype=float))
        if theta.ndim != 2 or theta.shape[0] < 2 or theta.shape[1] < 1:
            raise ValueError("theta must be (T_grid >= 2, d >= 1)")
        if sigma.shape != (theta.shape[0],):
            raise ValueError("sigma must be a (T_grid,) path matching theta")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.sigma_plus <= 0.0:
            raise ValueError("sigma_plus must be positive")
        theta.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "sigma", sigma)
        self.validate()

    def validate(self):
        """Check the stability margin and the noise-scale band; raise on failure."""
        lo = self.rho * self.sigma_plus
        hi = self.sigma_plus
        tol = 1e-12 * max(hi, 1.0)
        if np.any(self.sigma < lo - tol) or np.any(self.sigma > hi + tol):
            raise ValueError(
                "sigma path leaves [rho * sigma_plus, sigma_plus] = "
                f"[{lo:g}, {hi:g}]"
            )
        for k in range(self.theta.shape[0]):
            if not check_stability(self.theta[k], self.delta):
                u = k / (self.theta.shape[0] - 1)
                raise ValueError(
                    f"theta(u) at grid point u={u:.6g} violates the stability "
                    f"margin delta={self.delta:g} "
                    f"(spectral radius {spectral_radius(self.theta[k]):.6g})"
                )

    @property
    def d(self) -> int:
        return self.theta.shape[1]

    @property
    def n_points(self) -> int:
        return self.theta.shape[0]

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_points)

    def theta_at(self, u):
        """Interpolated coefficients at rescaled times ``u`` (scalar or array)."""
        u = np.asarray(u, dtype=float)
        g = self.grid
        out = np.empty(u.shape + (self.d,))
        for j in range(self.d):
            out[..., j] = np.interp(u, g, self.theta[:, j])
        return out

    def sigma_at(self, u):
        """Interpolated noise scale at rescaled times ``u``."""
        return np.interp(np.asarray(u, dtype=float), self.grid, self.sigma)

    @classmethod
    def constant(cls, theta, sigma=1.0, delta=None):
        """Time-invariant parameters; ``delta`` defaults to the spectral radius."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if delta is None:
            delta = max(spectral_radius(theta), 1e-6)
        sigma = float(sigma)
        return cls(
            theta=np.vstack([theta, theta]),
            sigma=np.full(2, sigma),
            delta=float(delta),
            rho=1.0 if sigma > 0 else 0.0,
            sigma_plus=sigma if sigma > 0 else 1.0,
        )

    @classmethod
    def from_pacf_path(cls, path: PacfPath, sigma=1.0, delta=None):
        """Map a :class:`PacfPath` through the step-up recursion, point by point.

        ``sigma`` may be a scalar (constant scale) or a (T_grid,) array.  When
        ``delta`` is omitted it is set to the largest spectral radius found on
        the grid, i.e. the tightest certified margin.
        """
        theta = np.empty_like(path.grid)
        for k in range(path.n_points):
            theta[k] = levinson_durbin(path.grid[k])
        if np.isscalar(sigma):
            sigma_arr = np.full(path.n_points, float(sigma))
        else:
            sigma_arr = np.asarray(sigma, dtype=float)
        if delta is None:
            delta = max(max(spectral_radius(th) for th in theta), 1e-6)
        s_hi = float(np.max(sigma_arr))
        s_lo = float(np.min(sigma_arr))
        return cls(
            theta=theta,
            sigma=sigma_arr,
            delta=float(delta),
            rho=s_lo / s_hi if s_hi > 0 else 0.0,
            sigma_plus=s_hi if s_hi > 0 else 1.0,
        )


@dataclass(frozen=True)
class InnovationSpec:
    """Distribution of the standardized innovations (zero mean, unit variance).

    Families: ``gaussian`` (standard normal), ``student-t`` (nu > 2, rescaled
    by sqrt((nu-2)/nu) to unit variance) and ``uniform`` (on
    [-sqrt(3), sqrt(3)]).
    """

    family: str = "gaussian"
    nu: float = 5.0

    _FAMILIES = ("gaussian", "student-t", "uniform")

    def __post_init__(self):
        if self.family not in self._FAMILIES:
            raise ValueError(
                f"unknown innovation family {self.family!r}; "
                f"expected one of {', '.join(self._FAMILIES)}"
            )
        if self.family == "student-t" and not self.nu > 2.0:
            raise ValueError("student-t requires nu > 2 for a finite variance")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.family == "gaussian":
            return rng.standard_normal(size)
        if self.family == "student-t":
            return rng.standard_t(self.nu, size) * math.sqrt((self.nu - 2.0) / self.nu)
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size)

    @property
    def has_exp_moment(self) -> bool:
        """Whether E[exp(zeta |xi|)] is finite for some zeta > 0."""
        return self.family != "student-t"

    def abs_moment(self, p: float) -> float:
        """E[|xi|^p], infinite for the student-t when p >= nu."""
        if p < 0:
            raise ValueError("p must be nonnegative")
        if self.family == "gaussian":
            return math.exp(
                0.5 * p * math.log(2.0) + math.lgamma((p + 1.0) / 2.0) - 0.5 * math.log(math.pi)
            )
        if self.family == "uniform":
            return math.sqrt(3.0) ** p / (p + 1.0)
        if p >= self.nu:
            return math.inf
        log_m = (
            0.5 * p * math.log(self.nu)
            + math.lgamma((p + 1.0) / 2.0)
            + math.lgamma((self.nu - p) / 2.0)
            - 0.5 * math.log(math.pi)
            - math.lgamma(self.nu / 2.0)
        )
        return math.exp(log_m) * ((self.nu - 2.0) / self.nu) ** (p / 2.0)

    def exp_moment(self, zeta: float) -> float:
        """E[exp(zeta |xi|)]; infinite for the student-t family."""
        if zeta <= 0:
            raise ValueError("zeta must be positive")
        if self.family == "gaussian":
            # 2 exp(zeta^2/2) Phi(zeta) for the folded normal
            return math.exp(0.5 * zeta * zeta) * (1.0 + math.erf(zeta / math.sqrt(2.0)))
        if self.family == "uniform":
            a = math.sqrt(3.0)
            return (math.exp(zeta * a) - 1.0) / (zeta * a)
        return math.inf


@dataclass(frozen=True)
class TvarRealization:
    """One simulated path together with its noise-scale trace and provenance."""

    x: np.ndarray
    sigma_trace: np.ndarray
    seed: int
    burn_in: int

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x, dtype=float))
        s = np.ascontiguousarray(np.asarray(self.sigma_trace, dtype=float))
        if x.shape != s.shape or x.ndim != 1:
            raise ValueError("x and sigma_trace must be 1-d arrays of equal length")
        x.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "sigma_trace", s)

    @property
    def T(self) -> int:
        return self.x.shape[0]


def sample_pacf_paths(d, T_grid=1024, gamma=0.9, n_harmonics=3, seed=0, amplitude=0.7) -> PacfPath:
    """Draw smooth random reflection-coefficient paths bounded by ``gamma``.

    Each lag's path is gamma * tanh(q(u)) for a random trigonometric
    polynomial q with ``n_harmonics`` harmonics and coefficient scale
    ``amplitude`` (harmonic m damped by 1/m), evaluated on ``T_grid``
    equispaced points of [0, 1].  Deterministic given ``seed``.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if n_harmonics < 1:
        raise ValueError("n_harmonics must be at least 1")
    rng = np.random.default_rng(seed)
    u = np.linspace(0.0, 1.0, T_grid)
    grid = np.empty((T_grid, d))
    for j in range(d):
        q = np.full(T_grid, amplitude * rng.standard_normal())
        for m in range(1, n_harmonics + 1):
            am, bm = amplitude * rng.standard_normal(2)
            q += (am * np.cos(2.0 * np.pi * m * u) + bm * np.sin(2.0 * np.pi * m * u)) / m
        grid[:, j] = gamma * np.tanh(q)
    return PacfPath(grid=grid, gamma=gamma)


def synthesize_params(
    d=3, T_grid=1024, gamma=0.9, n_harmonics=3, seed=0, sigma=1.0
) -> TvarParams:
    """Random admissible parameter paths: PACF synthesis plus step-up mapping."""
    path = sample_pacf_paths(d, T_grid=T_grid, gamma=gamma, n_harmonics=n_harmonics, seed=seed)
    return TvarParams.from_pacf_path(path, sigma=sigma)


def burn_in_length(delta, tol=1e-12) -> int:
    """Steps needed for delta1^B < tol with delta1 = (1 + delta)/2."""
    delta1 = 0.5 * (1.0 + delta)
    return max(1, math.ceil(math.log(tol) / math.log(delta1)))


def simulate_tvar(params: TvarParams, T, innovations=None, seed=0) -> TvarRealization:
    """Simulate X_1..X_T from stable parameter paths.

    The recursion starts from zeros and runs a burn-in with the parameters
    frozen at u = 0 until the influence of the zero start is below 1e-12
    (geometric rate (1 + delta)/2), which approximates the unique solution
    that is bounded in probability.  Bit-identical replay for equal
    (params, T, innovations, seed).
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    params.validate()
    innovations = innovations or InnovationSpec()
    burn_in = burn_in_length(params.delta)
    rng = np.random.default_rng(seed)
    noise = innovations.draw(rng, burn_in + T)
    t_idx = np.arange(1, T + 1, dtype=float)
    theta_path = params.theta_at((t_idx - 1.0) / T)
    sigma_path = params.sigma_at(t_idx / T)
    theta0 = params.theta_at(0.0)
    sigma0 = float(params.sigma_at(0.0))
    x = kernels.simulate_path(
        np.ascontiguousarray(theta_path),
        np.ascontiguousarray(sigma_path),
        np.ascontiguousarray(theta0),
        sigma0,
        noise,
        burn_in,
    )
    return TvarRealization(x=x, sigma_trace=sigma_path, seed=int(seed), burn_in=burn_in)


def iter_tvar(params: TvarParams, T, innovations=None, seed=0):
    """Yield (x_t, sigma(t/T)) one step at a time with O(d) working state.

    Same recursion and random stream as :func:`simulate_tvar`, but nothing of
    length T is ever materialized, so the consumer side can run with a
    horizon-independent footprint.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    params.validate()
    innovations = innovations or InnovationSpec()
    burn_in = burn_in_length(params.delta)
    rng = np.random.default_rng(seed)
    d = params.d
    theta0 = params.theta_at(0.0)
    sigma0 = float(params.sigma_at(0.0))
    buf = np.zeros(d)
    # accumulate the inner products exactly like the batch kernel does, so the
    # two paths replay bit-identically from the same seed
    for _ in range(burn_in):
        val = sigma0 * float(innovations.draw(rng, 1)[0])
        for k in range(d):
            val += theta0[k] * buf[k]
        buf[1:] = buf[:-1]
        buf[0] = val
    for t in range(1, T + 1):
        th = params.theta_at((t - 1.0) / T)
        sg = float(params.sigma_at(t / T))
        val = sg * float(innovations.draw(rng, 1)[0])
        for k in range(d):
            val += th[k] * buf[k]
        yield val, sg
        buf[1:] = buf[:-1]
        buf[0] = val


def impulse_coefficients(params: TvarParams, T, t, j_max) -> np.ndarray:
    """Coefficients a_{t,T}(0..j_max) of the moving-average representation.

    a_{t,T}(j) is the response of X_t to a unit impulse injected at time
    t - j, obtained by running the homogeneous recursion forward; a(0) = 1.
    """
    if not 1 <= t <= T:
        raise ValueError("need 1 <= t <= T")
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    params.validate()
    # coefficients driving steps s = t - j_max .. t, sampled at (s - 1)/T and
    # clamped to theta(0) for s - 1 <= 0
    s = np.arange(t - j_max, t + 1, dtype=float)
    theta_win = params.theta_at((s - 1.0) / T)
    return kernels.impulse_response(np.ascontiguousarray(theta_win), params.d, int(j_max))
