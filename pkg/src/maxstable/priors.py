"""Priors over (degree, interior weights) and margin parameters.

The degree prior is a truncated discrete Weibull with shape d-1; the
weights prior is uniform over the feasible polytope (a symmetric Dirichlet
over interior weights plus slack, truncated to feasible vertex
completions).  Margin priors center scale and location kernels on
empirical-Bayes estimates of the block-maxima norming sequences.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .angular import MultiIndexGrid, complete_vertex_masses, validate_bp
from .core import MARGIN_FAMILIES
from .errors import (
    ConfigError,
    DomainError,
    InfeasibleWeightsError,
    StructuralError,
)

DEFAULT_K_CAP = {2: 40, 3: 15}

_FEASIBILITY_ATTEMPTS = 10**5


# --------------------------------------------------------------------------
# degree prior
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DegreePrior:
    """Truncated discrete Weibull pmf on the polynomial degree k.

    lambda(k) is proportional to r^((k-k_min)^(d-1)) - r^((k-k_min+1)^(d-1))
    with r = exp(-q), renormalized on [k_min, k_cap]; at d=2 this is the
    geometric distribution with ratio r.
    """

    d: int
    q: float
    k_min: int = None
    k_cap: int = None

    def __post_init__(self):
        if self.d < 2:
            raise StructuralError(f"dimension must be >= 2, got {self.d}")
        if not self.q > 0.0:
            raise StructuralError(f"tail rate q must be positive, got {self.q}")
        k_min = self.d + 1 if self.k_min is None else self.k_min
        k_cap = DEFAULT_K_CAP.get(self.d, 12) if self.k_cap is None else self.k_cap
        if k_min < self.d:
            raise StructuralError(f"k_min must be at least d, got {k_min}")
        if k_cap < k_min:
            raise StructuralError(f"k_cap {k_cap} below k_min {k_min}")
        object.__setattr__(self, "k_min", k_min)
        object.__setattr__(self, "k_cap", k_cap)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_cap + 1)

    def _pmf(self) -> np.ndarray:
        return _degree_pmf(self.d, self.q, self.k_min, self.k_cap)


@lru_cache(maxsize=None)
def _degree_pmf(d: int, q: float, k_min: int, k_cap: int) -> np.ndarray:
    k = np.arange(k_min, k_cap + 1, dtype=float)
    shape = d - 1
    raw = np.exp(-q * (k - k_min) ** shape) - np.exp(-q * (k - k_min + 1) ** shape)
    pmf = raw / raw.sum()
    pmf.setflags(write=False)
    return pmf


def degree_log_pmf(prior: DegreePrior, k: int) -> float:
    if k < prior.k_min or k > prior.k_cap:
        raise DomainError(
            f"degree {k} outside the prior support [{prior.k_min}, {prior.k_cap}]"
        )
    return float(np.log(prior._pmf()[k - prior.k_min]))


def degree_sample(prior: DegreePrior, rng) -> int:
    from .simulate import _as_generator

    gen = _as_generator(rng)
    cdf = np.cumsum(prior._pmf())
    idx = min(int(np.searchsorted(cdf, gen.uniform())), prior.k_cap - prior.k_min)
    return prior.k_min + idx


# --------------------------------------------------------------------------
# weights prior
# --------------------------------------------------------------------------

def weights_sample(k: int, d: int, rng, max_attempts: int = _FEASIBILITY_ATTEMPTS) -> np.ndarray:
    """Uniform draw from the feasible interior-weight polytope.

    Samples (weights, slack) from a flat Dirichlet and keeps draws whose
    vertex completion is feasible; the slack coordinate is the total vertex
    mass, so accepted weight vectors are uniform over the polytope.
    """
    from .simulate import _as_generator

    gen = _as_generator(rng)
    size = len(MultiIndexGrid(d, k))
    batch = 256
    attempts = 0
    while attempts < max_attempts:
        draws = gen.dirichlet(np.ones(size + 1), size=batch)[:, :size]
        for row in draws:
            attempts += 1
            try:
                complete_vertex_masses(row, k, d)
            except InfeasibleWeightsError:
                continue
            return row
    raise InfeasibleWeightsError(
        f"no feasible weight vector in {max_attempts} attempts at d={d}, k={k}; "
        "use a smaller degree"
    )


def weights_log_density(k: int, d: int, phi) -> float:
    """Log prior density of interior weights, up to the polytope constant.

    The prior is uniform over the feasible set, so the value is 0.0 on
    feasible points and -inf otherwise; only differences enter MH ratios.
    """
    phi = np.asarray(phi, dtype=float)
    size = len(MultiIndexGrid(d, k))
    if phi.shape != (size,):
        raise StructuralError(f"weights have shape {phi.shape}, expected ({size},)")
    if phi.min(initial=0.0) < 0.0 or phi.sum() > 1.0 + 1e-12:
        return -math.inf
    try:
        model = complete_vertex_masses(phi, k, d)
    except InfeasibleWeightsError:
        return -math.inf
    return 0.0 if validate_bp(model).ok else -math.inf


# --------------------------------------------------------------------------
# empirical-Bayes estimators of the norming sequences
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EBEstimates:
    """Norming-sequence estimates: sigma_hat targets a_m, mu_hat targets b_m."""

    sigma_hat: np.ndarray
    mu_hat: np.ndarray = None
    provenance: str = ""
    degenerate: bool = False

    def __post_init__(self):
        sig = np.atleast_1d(np.asarray(self.sigma_hat, dtype=float))
        object.__setattr__(self, "sigma_hat", sig)
        if self.mu_hat is not None:
            object.__setattr__(self, "mu_hat", np.atleast_1d(np.asarray(self.mu_hat, dtype=float)))


def _checked_raw(raw_data, m: int) -> np.ndarray:
    rows = np.asarray(raw_data, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DomainError(f"expected a non-empty data matrix, got shape {rows.shape}")
    if m < 2:
        raise DomainError(f"block size must be at least 2, got {m}")
    if rows.shape[0] < m:
        raise DomainError(f"need at least m={m} rows, got {rows.shape[0]}")
    return rows


def _left_quantile(column: np.ndarray, p: float) -> float:
    """F_hat^{<-}(p) = inf{x : F_hat(x) >= p}: the ceil(N p)-th order statistic."""
    n = len(column)
    rank = max(int(math.ceil(n * p)), 1)
    return float(np.partition(column, rank - 1)[rank - 1])


def eb_frechet_scale(raw_data, m: int) -> EBEstimates:
    """Scale estimates sigma_hat_j = F_hat_j^{<-}(1 - 1/m) for heavy tails."""
    rows = _checked_raw(raw_data, m)
    if np.any(rows <= 0.0):
        raise DomainError("heavy-tail scale estimation needs positive data")
    p = 1.0 - 1.0 / m
    sig = np.array([_left_quantile(rows[:, j], p) for j in range(rows.shape[1])])
    return EBEstimates(sigma_hat=sig, provenance="frechet-scale")


def gumbel_formula(quantile, survival_integral, m):
    """(mu_hat, sigma_hat) from the quantile and the integrated survival above it.

    Kept as a free function of the two summaries so the estimator can be
    evaluated on an exact cdf as well as on the empirical one.
    """
    return quantile, m * survival_integral


def eb_gumbel_loc_scale(raw_data, m: int) -> EBEstimates:
    """mu_hat = F_hat^{<-}(1-1/m); sigma_hat = m * integral of 1-F_hat above it."""
    rows = _checked_raw(raw_data, m)
    p = 1.0 - 1.0 / m
    mus = np.empty(rows.shape[1])
    sigs = np.empty(rows.shape[1])
    for j in range(rows.shape[1]):
        col = rows[:, j]
        mu = _left_quantile(col, p)
        # integral of the empirical survival over (mu, inf)
        survival = float(np.clip(col - mu, 0.0, None).mean())
        mus[j], sigs[j] = gumbel_formula(mu, survival, m)
    degenerate = bool(np.any(sigs <= 0.0))
    return EBEstimates(sigma_hat=sigs, mu_hat=mus, provenance="gumbel", degenerate=degenerate)


def eb_weibull_loc_scale(raw_data, m: int, gamma_hat=None) -> EBEstimates:
    """Short-tail estimates from log-spacings of the top order statistics.

    With N = n*m and Z_(s) the s-th order statistic per coordinate:
    xi_l = (1/n) sum_{i=0}^{n-1} (log Z_(N-i) - log Z_(N-n))^l, the negative
    moment tail index gamma_minus = (xi_2 - 2 xi_1^2) / (2 (xi_2 - xi_1^2)),
    sigma_hat = Z_(N-n) * xi_1 * (1 - gamma_minus) / (-gamma_hat), and
    mu_hat = Z_(N-n) + sigma_hat.  gamma_hat defaults to gamma_minus.
    """
    rows = _checked_raw(raw_data, m)
    n = rows.shape[0] // m
    if n < 2:
        raise DomainError(f"need at least 2 blocks (rows >= 2m = {2 * m}), got {rows.shape[0]}")
    rows = rows[: n * m]
    gamma_hat = None if gamma_hat is None else np.atleast_1d(np.asarray(gamma_hat, dtype=float))
    mus = np.empty(rows.shape[1])
    sigs = np.empty(rows.shape[1])
    for j in range(rows.shape[1]):
        top = np.sort(rows[:, j])[n * (m - 1) - 1:]
        if top[0] <= 0.0:
            raise DomainError(
                f"coordinate {j}: top order statistics must be positive for log-spacings"
            )
        spacings = np.log(top[1:]) - math.log(top[0])
        xi1 = float(spacings.mean())
        xi2 = float((spacings**2).mean())
        var = xi2 - xi1**2
        if var <= 0.0:
            raise DomainError(
                f"coordinate {j}: zero variance of log-spacings, tail index undefined"
            )
        gamma_minus = (xi2 - 2.0 * xi1**2) / (2.0 * var)
        if gamma_minus >= 0.0:
            raise DomainError(
                f"coordinate {j}: nonnegative tail-index estimate {gamma_minus:.4f}; "
                "data are not short-tailed"
            )
        g = gamma_minus if gamma_hat is None else float(gamma_hat[j % len(gamma_hat)])
        sigs[j] = top[0] * xi1 * (1.0 - gamma_minus) / (-g)
        mus[j] = top[0] + sigs[j]
    return EBEstimates(sigma_hat=sigs, mu_hat=mus, provenance="weibull")


# --------------------------------------------------------------------------
# margin prior
# --------------------------------------------------------------------------

def _log_gamma22(t: np.ndarray) -> np.ndarray:
    """Gamma(2, 2) log-kernel: positive on (0, inf), mode at 1/2, mean 1."""
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, -np.inf)
    pos = t > 0.0
    out[pos] = math.log(4.0) + np.log(t[pos]) - 2.0 * t[pos]
    return out


def _log_logistic(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    return -a - 2.0 * np.log1p(np.exp(-a))


@dataclass(frozen=True)
class MarginPriorConfig:
    """Family-specific prior over margin parameters, centered on EB estimates.

    shape_bounds is required for the Weibull family (compact support within
    (1, inf)); the heavy-tail family uses a full-support Gamma(2, 2) shape
    prior by default.
    """

    family: str
    estimates: EBEstimates
    shape_bounds: tuple = None

    def __post_init__(self):
        if self.family not in MARGIN_FAMILIES:
            raise ConfigError(
                f"unknown margin family {self.family!r}; expected one of {MARGIN_FAMILIES}"
            )
        if np.any(self.estimates.sigma_hat <= 0.0):
            raise ConfigError("scale estimates must be positive")
        if self.family in ("gumbel", "weibull") and self.estimates.mu_hat is None:
            raise ConfigError(f"{self.family} margins need location estimates")
        if self.family == "weibull":
            if self.shape_bounds is None:
                raise ConfigError(
                    "weibull margins need compact shape-prior bounds within (1, inf)"
                )
            lo, hi = self.shape_bounds
            if not (1.0 < lo < hi < math.inf):
                raise ConfigError(
                    f"weibull shape bounds must satisfy 1 < lo < hi < inf, got {self.shape_bounds}"
                )
        elif self.shape_bounds is not None and self.family == "gumbel":
            raise ConfigError("gumbel margins take no shape prior")


def _log_shape_prior(cfg: MarginPriorConfig, shape: np.ndarray) -> float:
    if cfg.family == "frechet":
        return float(_log_gamma22(shape).sum())
    lo, hi = cfg.shape_bounds
    if np.any(shape < lo) or np.any(shape > hi):
        return -math.inf
    return -len(shape) * math.log(hi - lo)


def data_prior_log_density(cfg: MarginPriorConfig, theta: dict) -> float:
    """Log density of the data-dependent margin prior at theta.

    theta maps "scale" (all families), "shape" (frechet, weibull), and
    "loc" (gumbel, weibull) to parameter vectors.
    """
    sig_hat = cfg.estimates.sigma_hat
    scale = np.atleast_1d(np.asarray(theta["scale"], dtype=float))
    if np.any(scale <= 0.0):
        return -math.inf
    total = float(_log_gamma22(scale / sig_hat).sum() - np.log(sig_hat).sum())
    if cfg.family in ("frechet", "weibull"):
        shape = np.atleast_1d(np.asarray(theta["shape"], dtype=float))
        if np.any(shape <= 0.0):
            return -math.inf
        total += _log_shape_prior(cfg, shape)
    if cfg.family in ("gumbel", "weibull"):
        mu_hat = cfg.estimates.mu_hat
        loc = np.atleast_1d(np.asarray(theta["loc"], dtype=float))
        total += float(_log_logistic((loc - mu_hat) / sig_hat).sum() - np.log(sig_hat).sum())
    return total


# --------------------------------------------------------------------------
# configuration document
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PriorConfig:
    """Bundle of the degree prior plus margin-prior settings for a fit."""

    degree: DegreePrior
    family: str = None                  # None = simple margins, no margin prior
    eb_estimator: str = None
    eb_block_size: int = None
    shape_bounds: tuple = None

    def margin_config(self, raw_data) -> MarginPriorConfig:
        if self.family is None:
            raise ConfigError("simple-margin fits have no margin prior")
        estimates = compute_eb(self.eb_estimator, raw_data, self.eb_block_size)
        return MarginPriorConfig(
            family=self.family, estimates=estimates, shape_bounds=self.shape_bounds
        )


_EB_ESTIMATORS = ("frechet-scale", "gumbel", "weibull")


def compute_eb(estimator: str, raw_data, m: int) -> EBEstimates:
    if estimator == "frechet-scale":
        return eb_frechet_scale(raw_data, m)
    if estimator == "gumbel":
        return eb_gumbel_loc_scale(raw_data, m)
    if estimator == "weibull":
        return eb_weibull_loc_scale(raw_data, m)
    raise ConfigError(f"unknown EB estimator {estimator!r}; expected one of {_EB_ESTIMATORS}")


def prior_config_from_dict(doc: dict, d: int) -> PriorConfig:
    """Parse {"degree": {...}, "margins": {...}, "eb": {...}} into a PriorConfig."""
    if not isinstance(doc, dict):
        raise ConfigError(f"prior config must be an object, got {type(doc).__name__}")
    degree_doc = doc.get("degree", {})
    try:
        degree = DegreePrior(
            d=d,
            q=float(degree_doc.get("q", 1.0)),
            k_min=degree_doc.get("k_min"),
            k_cap=degree_doc.get("k_cap"),
        )
    except StructuralError as exc:
        raise ConfigError(f"invalid degree prior: {exc}") from exc
    margins = doc.get("margins") or {}
    family = margins.get("family")
    eb = doc.get("eb") or {}
    bounds = margins.get("shape_bounds")
    cfg = PriorConfig(
        degree=degree,
        family=family,
        eb_estimator=eb.get("estimator"),
        eb_block_size=None if eb.get("m") is None else int(eb["m"]),
        shape_bounds=None if bounds is None else (float(bounds[0]), float(bounds[1])),
    )
    if family is not None:
        if family not in MARGIN_FAMILIES:
            raise ConfigError(f"unknown margin family {family!r}")
        if cfg.eb_estimator is None or cfg.eb_block_size is None:
            raise ConfigError("margin fits need eb.estimator and eb.m in the prior config")
        if family == "weibull" and cfg.shape_bounds is None:
            raise ConfigError(
                "weibull margins need compact shape-prior bounds within (1, inf)"
            )
    return cfg
