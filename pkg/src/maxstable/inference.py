"""Trans-dimensional MCMC over (degree, interior weights, margin parameters).

The sampler is Metropolis-within-Gibbs.  Interior weights move by a random
walk on the additive log-ratio chart of the composition (weights plus
slack), with the chart Jacobian in the acceptance ratio and infeasible
vertex completions rejected.  Margin parameters move by log-scale random
walks (positive parameters) and plain random walks (locations).  Degree
moves pair exact Bernstein degree elevation with a Dirichlet perturbation
going up, and a least-squares projection onto the lower-degree basis with
the same perturbation going down; both proposal densities are evaluated
exactly, so the acceptance ratio is standard Metropolis-Hastings.

Randomness is keyed per iteration: iteration t of chain c uses the Philox
stream (c + 1) * 2**40 + t of the run seed, which makes interrupted chains
resumable bit for bit.
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .angular import (
    AngularBP,
    MultiIndexGrid,
    complete_vertex_masses,
    degree_elevate,
    elevation_matrix,
    weights_to_pickands2,
)
from .core import MARGIN_FAMILIES, MarginSpec, ModelSpec, _log_density_rows, log_likelihood_report
from .errors import (
    ConfigError,
    CorruptArtifactError,
    DomainError,
    InfeasibleWeightsError,
    SupportError,
)
from .priors import (
    DegreePrior,
    MarginPriorConfig,
    PriorConfig,
    compute_eb,
    data_prior_log_density,
    degree_log_pmf,
    weights_sample,
)
from .simulate import SeededRng

__all__ = [
    "ChainState",
    "SamplerConfig",
    "Chain",
    "run_mcmc",
    "predictive_density",
    "posterior_summary",
    "posterior_mean_model",
    "state_record",
    "parse_chain_line",
    "chain_from_records",
]

FAMILIES = ("simple",) + MARGIN_FAMILIES

_FAMILY_PARAMS = {
    "simple": (),
    "frechet": ("shape", "scale"),
    "gumbel": ("scale", "loc"),
    "weibull": ("shape", "scale", "loc"),
}

_INIT_ATTEMPTS = 10**4
_INIT_JITTER = 0.01
_CHAIN_STREAM = 1 << 40

_MOVES = ("weights", "margins", "degree")


# --------------------------------------------------------------------------
# state and configuration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainState:
    """One point of the posterior: degree, interior weights, margins, caches."""

    k: int
    phi: np.ndarray
    theta: dict | None
    log_likelihood: float
    log_prior: float

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float).copy()
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def log_posterior(self) -> float:
        return self.log_likelihood + self.log_prior

    def angular_model(self, d: int) -> AngularBP:
        return complete_vertex_masses(self.phi, self.k, d)


@dataclass(frozen=True)
class SamplerConfig:
    """Run-length, proposal-scale, and stream settings for one MCMC run."""

    iterations: int
    burnin: int = 0
    thinning: int = 1
    weight_step: float = 0.6
    margin_step: float = 0.04
    transdim_prob: float = 0.15
    transdim_conc: float = 50.0
    seed: int = 0
    chains: int = 1

    def __post_init__(self):
        if self.iterations < 0 or self.burnin < 0:
            raise ConfigError("iterations and burn-in must be nonnegative")
        if self.iterations > 0 and self.iterations <= self.burnin:
            raise ConfigError(
                f"iterations ({self.iterations}) must exceed burn-in ({self.burnin})"
            )
        if self.iterations == 0 and self.burnin != 0:
            raise ConfigError("a zero-iteration run cannot have burn-in")
        if self.thinning < 1:
            raise ConfigError("thinning must be at least 1")
        if not 0.0 <= self.transdim_prob <= 1.0:
            raise ConfigError("trans-dimensional move probability must be in [0, 1]")
        if self.weight_step <= 0.0 or self.margin_step <= 0.0 or self.transdim_conc <= 0.0:
            raise ConfigError("proposal scales must be positive")
        if self.chains < 1:
            raise ConfigError("chain count must be at least 1")


@dataclass
class Chain:
    """Retained post-burn-in states plus per-move acceptance bookkeeping."""

    d: int
    family: str
    states: list
    iterations: list
    acceptance: dict
    final_state: ChainState = None
    final_iteration: int = 0

    def __len__(self):
        return len(self.states)

    def acceptance_rates(self) -> dict:
        return {
            move: (acc / prop if prop else math.nan)
            for move, (acc, prop) in self.acceptance.items()
        }

    def records(self):
        for it, state in zip(self.iterations, self.states):
            yield state_record(state, it)


def _iteration_rng(seed: int, chain_index: int, iteration: int) -> np.random.Generator:
    return SeededRng(seed, stream=(chain_index + 1) * _CHAIN_STREAM + iteration).generator()


# --------------------------------------------------------------------------
# posterior evaluation
# --------------------------------------------------------------------------

@dataclass
class _Posterior:
    """Evaluates log prior and log likelihood for proposed states."""

    data: np.ndarray
    d: int
    family: str
    degree_prior: DegreePrior
    margin_cfg: MarginPriorConfig | None

    def margins(self, theta: dict | None) -> MarginSpec | None:
        return margins_from_theta(self.family, theta)

    def evaluate(self, k: int, phi: np.ndarray, theta: dict | None):
        """(log_likelihood, log_prior); an infeasible point returns (-inf, -inf).

        The weights prior is uniform over the feasible polytope, so it
        contributes 0 beyond the feasibility check itself.
        """
        log_prior = degree_log_pmf(self.degree_prior, k)
        try:
            model = complete_vertex_masses(phi, k, self.d)
        except InfeasibleWeightsError:
            return -math.inf, -math.inf
        if theta is not None:
            log_prior += data_prior_log_density(self.margin_cfg, theta)
            if not np.isfinite(log_prior):
                return -math.inf, -math.inf
        value, _ = log_likelihood_report(ModelSpec(model, self.margins(theta)), self.data)
        return value, log_prior


def margins_from_theta(family: str, theta: dict | None) -> MarginSpec | None:
    if family == "simple":
        return None
    if family == "frechet":
        return MarginSpec.frechet(shape=theta["shape"], scale=theta["scale"])
    if family == "gumbel":
        return MarginSpec.gumbel(scale=theta["scale"], loc=theta["loc"])
    return MarginSpec.weibull(shape=theta["shape"], scale=theta["scale"], loc=theta["loc"])


def _composition(phi: np.ndarray) -> np.ndarray:
    return np.concatenate([phi, [max(1.0 - float(phi.sum()), 0.0)]])


def _dirichlet_logpdf(x: np.ndarray, alpha: np.ndarray) -> float:
    if np.any((x <= 0.0) & (alpha > 1.0)) or np.any(x < 0.0):
        return -math.inf
    terms = np.where(alpha == 1.0, 0.0, (alpha - 1.0) * np.log(np.maximum(x, 1e-300)))
    return float(terms.sum() + gammaln(alpha.sum()) - gammaln(alpha).sum())


# --------------------------------------------------------------------------
# moves
# --------------------------------------------------------------------------

def _move_weights(state, post, cfg, gen, counts):
    counts["weights"][1] += 1
    p = _composition(state.phi)
    z = np.log(p[:-1]) - math.log(p[-1])
    z = z + cfg.weight_step * gen.standard_normal(len(z))
    shifted = np.concatenate([z, [0.0]])
    shifted -= shifted.max()
    q = np.exp(shifted)
    q /= q.sum()
    draw = gen.uniform()
    if q.min() <= 0.0:
        return state
    phi2 = q[:-1]
    loglik, logprior = post.evaluate(state.k, phi2, state.theta)
    log_accept = (
        loglik + logprior - state.log_posterior
        + float(np.log(q).sum() - np.log(p).sum())
    )
    if math.log(draw) < log_accept:
        counts["weights"][0] += 1
        return ChainState(state.k, phi2, state.theta, loglik, logprior)
    return state


def _move_margins(state, post, cfg, gen, counts):
    counts["margins"][1] += 1
    theta2 = {}
    hastings = 0.0
    for key in _FAMILY_PARAMS[post.family]:
        value = state.theta[key]
        noise = cfg.margin_step * gen.standard_normal(len(value))
        if key == "loc":
            theta2[key] = value + noise
        else:
            theta2[key] = value * np.exp(noise)
            hastings += float(noise.sum())
    draw = gen.uniform()
    loglik, logprior = post.evaluate(state.k, state.phi, theta2)
    log_accept = loglik + logprior - state.log_posterior + hastings
    if math.log(draw) < log_accept:
        counts["margins"][0] += 1
        return ChainState(state.k, state.phi, theta2, loglik, logprior)
    return state


def _elevated_center(phi: np.ndarray, k: int, d: int) -> np.ndarray:
    """Composition at degree k+1 representing the same angular measure."""
    model = complete_vertex_masses(phi, k, d)
    return _composition(np.asarray(degree_elevate(model).interior_weight))


def _projected_center(phi: np.ndarray, k: int, d: int) -> np.ndarray:
    """Composition at degree k-1 from least squares on the elevation map."""
    mat = elevation_matrix(d, k - 1)
    x, *_ = np.linalg.lstsq(mat, np.asarray(phi, dtype=float), rcond=None)
    x = np.clip(x, 0.0, None)
    total = float(x.sum())
    if total >= 1.0:
        x *= (1.0 - 1e-9) / total
    return _composition(x)


def _move_degree(state, post, cfg, gen, counts):
    prior = post.degree_prior
    can_up = state.k < prior.k_cap
    can_down = state.k > prior.k_min
    if not (can_up or can_down):
        return state
    counts["degree"][1] += 1
    if can_up and can_down:
        go_up = gen.uniform() < 0.5
        log_p_fwd = math.log(0.5)
    else:
        go_up = can_up
        log_p_fwd = 0.0
    if go_up:
        k2 = state.k + 1
        center_fwd = _elevated_center(state.phi, state.k, post.d)
    else:
        k2 = state.k - 1
        center_fwd = _projected_center(state.phi, state.k, post.d)
    alpha_fwd = cfg.transdim_conc * center_fwd + 1.0
    comp2 = gen.dirichlet(alpha_fwd)
    draw = gen.uniform()
    if comp2.min() <= 0.0:
        return state
    phi2 = comp2[:-1]
    loglik, logprior = post.evaluate(k2, phi2, state.theta)
    if not np.isfinite(loglik + logprior):
        return state
    if go_up:
        center_rev = _projected_center(phi2, k2, post.d)
        log_p_rev = math.log(0.5) if k2 < prior.k_cap else 0.0
    else:
        center_rev = _elevated_center(phi2, k2, post.d)
        log_p_rev = math.log(0.5) if k2 > prior.k_min else 0.0
    alpha_rev = cfg.transdim_conc * center_rev + 1.0
    log_accept = (
        loglik + logprior - state.log_posterior
        + log_p_rev - log_p_fwd
        + _dirichlet_logpdf(_composition(state.phi), alpha_rev)
        - _dirichlet_logpdf(comp2, alpha_fwd)
    )
    if math.log(draw) < log_accept:
        counts["degree"][0] += 1
        return ChainState(k2, phi2, state.theta, loglik, logprior)
    return state


def _sweep(state, post, cfg, gen, counts):
    state = _move_weights(state, post, cfg, gen, counts)
    if state.theta is not None:
        state = _move_margins(state, post, cfg, gen, counts)
    if cfg.transdim_prob > 0.0 and post.degree_prior.k_cap > post.degree_prior.k_min:
        if gen.uniform() < cfg.transdim_prob:
            state = _move_degree(state, post, cfg, gen, counts)
    return state


# --------------------------------------------------------------------------
# initialization
# --------------------------------------------------------------------------

def _initial_theta(post, attempt: int, gen) -> dict | None:
    if post.family == "simple":
        return None
    est = post.margin_cfg.estimates
    d = post.d
    sig = np.broadcast_to(est.sigma_hat, (d,)).astype(float)
    mu = None if est.mu_hat is None else np.broadcast_to(est.mu_hat, (d,)).astype(float)
    theta = {}
    if post.family in ("frechet", "weibull"):
        if post.family == "weibull":
            lo, hi = post.margin_cfg.shape_bounds
            mid = 0.5 * (lo + hi)
            theta["shape"] = np.full(d, mid) if attempt == 0 else gen.uniform(lo, hi, d)
        else:
            theta["shape"] = np.ones(d) if attempt == 0 else gen.gamma(2.0, 0.5, d)
    theta["scale"] = sig.copy() if attempt == 0 else sig * gen.gamma(2.0, 0.5, d)
    if post.family in ("gumbel", "weibull"):
        theta["loc"] = mu.copy() if attempt == 0 else mu + sig * gen.logistic(size=d)
    return theta


def _initial_state(post, cfg, chain_index: int) -> ChainState:
    """Near-independence start at the smallest degree, EB-centered margins.

    The independence model itself sits on the boundary of the weight
    simplex where the log-ratio chart is undefined, so a small interior
    jitter is added (scaling feasible weights toward zero stays feasible).
    """
    gen = _iteration_rng(cfg.seed, chain_index, 0)
    k0 = post.degree_prior.k_min
    for attempt in range(_INIT_ATTEMPTS):
        phi = _INIT_JITTER * weights_sample(k0, post.d, gen)
        theta = _initial_theta(post, attempt, gen)
        loglik, logprior = post.evaluate(k0, phi, theta)
        if np.isfinite(loglik + logprior):
            return ChainState(k0, phi, theta, loglik, logprior)
    raise DomainError(
        f"no feasible initial state after {_INIT_ATTEMPTS} attempts; "
        "the data may sit outside the reachable support of the margin family"
    )


def _check_support(rows: np.ndarray, family: str) -> None:
    bad = np.argwhere(~np.isfinite(rows))
    if len(bad):
        i, j = bad[0]
        raise SupportError(
            f"row {i} coordinate {j} is not finite", row=int(i), coordinate=int(j)
        )
    if family in ("simple", "frechet"):
        bad = np.argwhere(rows <= 0.0)
        if len(bad):
            i, j = bad[0]
            raise SupportError(
                f"row {i} coordinate {j} is not positive, outside the "
                f"{family} support",
                row=int(i),
                coordinate=int(j),
            )


# --------------------------------------------------------------------------
# the sampler
# --------------------------------------------------------------------------

def run_mcmc(
    data,
    family: str,
    priors: PriorConfig,
    cfg: SamplerConfig,
    raw_data=None,
    chain_index: int = 0,
    sink=None,
    resume=None,
) -> Chain:
    """Sample the posterior over (k, weights, margins) for one chain.

    raw_data supplies the pre-blocking observations for empirical-Bayes
    margin centering (defaults to data itself).  sink, when given, is
    called with each retained state record as it is produced.  resume is a
    previously written record; iteration then continues from its index
    with identical results to an uninterrupted run.
    """
    rows = np.asarray(data, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DomainError(f"expected a non-empty data matrix, got shape {rows.shape}")
    d = rows.shape[1]
    if d < 2:
        raise DomainError("need at least two coordinates")
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if priors.degree.d != d:
        raise ConfigError(
            f"degree prior built for d={priors.degree.d} but data has d={d}"
        )
    _check_support(rows, family)

    if family == "simple":
        margin_cfg = None
    else:
        if priors.family not in (None, family):
            raise ConfigError(
                f"prior config names family {priors.family!r} but the fit uses {family!r}"
            )
        if priors.eb_estimator is None or priors.eb_block_size is None:
            raise ConfigError("margin fits need eb.estimator and eb.m in the prior config")
        raw = rows if raw_data is None else np.asarray(raw_data, dtype=float)
        estimates = compute_eb(priors.eb_estimator, raw, priors.eb_block_size)
        if len(estimates.sigma_hat) != d:
            raise ConfigError(
                f"EB estimates cover {len(estimates.sigma_hat)} coordinates, data has {d}"
            )
        margin_cfg = MarginPriorConfig(
            family=family, estimates=estimates, shape_bounds=priors.shape_bounds
        )

    post = _Posterior(rows, d, family, priors.degree, margin_cfg)
    counts = {move: [0, 0] for move in _MOVES}

    if resume is not None:
        state, start = _state_from_resume_record(resume, post)
    else:
        state = _initial_state(post, cfg, chain_index)
        start = 0

    retained: list = []
    iterations: list = []

    def keep(it: int, st: ChainState) -> None:
        retained.append(st)
        iterations.append(it)
        if sink is not None:
            sink(state_record(st, it))

    if cfg.iterations == 0:
        keep(0, state)
        return Chain(d, family, retained, iterations, counts, state, 0)

    for it in range(start + 1, cfg.iterations + 1):
        gen = _iteration_rng(cfg.seed, chain_index, it)
        state = _sweep(state, post, cfg, gen, counts)
        if it > cfg.burnin and (it - cfg.burnin) % cfg.thinning == 0:
            keep(it, state)

    return Chain(d, family, retained, iterations, counts, state, cfg.iterations)


def _state_from_resume_record(record: dict, post) -> tuple:
    phi = np.asarray(record["phi"], dtype=float)
    theta = record.get("theta")
    if theta is not None:
        theta = {key: np.asarray(val, dtype=float) for key, val in theta.items()}
    loglik, logprior = post.evaluate(int(record["k"]), phi, theta)
    state = ChainState(int(record["k"]), phi, theta, loglik, logprior)
    if abs(state.log_posterior - float(record["logpost"])) > 1e-6:
        raise CorruptArtifactError(
            "resume record log-posterior does not match recomputation; "
            "the chain file does not belong to this data/prior configuration"
        )
    return state, int(record["iter"])


# --------------------------------------------------------------------------
# persistence records
# --------------------------------------------------------------------------

def state_record(state: ChainState, iteration: int) -> dict:
    theta = state.theta
    if theta is not None:
        theta = {key: [float(v) for v in vec] for key, vec in theta.items()}
    return {
        "iter": int(iteration),
        "k": int(state.k),
        "phi": [float(v) for v in state.phi],
        "theta": theta,
        "logpost": float(state.log_posterior),
    }


def parse_chain_line(text: str, line_number: int) -> dict:
    """Parse one JSONL chain line; corrupt lines carry their line number."""
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptArtifactError(
            f"chain line {line_number} is not valid JSON: {exc}", line=line_number
        ) from None
    if not isinstance(record, dict):
        raise CorruptArtifactError(
            f"chain line {line_number} is not an object", line=line_number
        )
    for key in ("iter", "k", "phi", "logpost"):
        if key not in record:
            raise CorruptArtifactError(
                f"chain line {line_number} is missing {key!r}", line=line_number
            )
    return record


def chain_from_records(records, d: int, family: str) -> Chain:
    """Rebuild a chain from persisted records for diagnosis.

    Restored states carry the recorded total log posterior in the
    likelihood slot (the split is not persisted); summaries and predictive
    densities only use the total.
    """
    states = []
    iterations = []
    for record in records:
        theta = record.get("theta")
        if theta is not None:
            theta = {key: np.asarray(val, dtype=float) for key, val in theta.items()}
        states.append(
            ChainState(
                int(record["k"]),
                np.asarray(record["phi"], dtype=float),
                theta,
                float(record["logpost"]),
                0.0,
            )
        )
        iterations.append(int(record["iter"]))
    counts = {move: [0, 0] for move in _MOVES}
    last = states[-1] if states else None
    last_iter = iterations[-1] if iterations else 0
    return Chain(d, family, states, iterations, counts, last, last_iter)


# --------------------------------------------------------------------------
# predictive density and summaries
# --------------------------------------------------------------------------

def _group_states(states):
    """Collapse repeated states (rejection streaks) keeping multiplicities.

    Returns (groups, inverse): groups is a list of (state, multiplicity),
    inverse maps each input position to its group index.
    """
    positions: dict = {}
    groups: list = []
    inverse = np.empty(len(states), dtype=np.intp)
    for i, state in enumerate(states):
        theta_key = None
        if state.theta is not None:
            theta_key = tuple(
                (key, state.theta[key].tobytes()) for key in sorted(state.theta)
            )
        key = (state.k, state.phi.tobytes(), theta_key)
        at = positions.get(key)
        if at is None:
            at = len(groups)
            positions[key] = at
            groups.append([state, 0])
        groups[at][1] += 1
        inverse[i] = at
    return [(state, mult) for state, mult in groups], inverse


def _support_mask(family: str, theta: dict | None, pts: np.ndarray) -> np.ndarray:
    mask = np.all(np.isfinite(pts), axis=1)
    if family in ("simple", "frechet"):
        mask &= np.all(pts > 0.0, axis=1)
    elif family == "weibull":
        mask &= np.all(pts < np.asarray(theta["loc"], dtype=float), axis=1)
    return mask


def state_log_density_rows(
    d: int, family: str, state: ChainState, pts: np.ndarray
) -> np.ndarray:
    """Per-row log density under one state; out-of-support rows give -inf."""
    values = np.full(len(pts), -math.inf)
    mask = _support_mask(family, state.theta, pts)
    if mask.any():
        spec = ModelSpec(
            state.angular_model(d), margins_from_theta(family, state.theta)
        )
        inside, bad = _log_density_rows(spec, pts[mask])
        if bad is not None:
            raise DomainError("support mask missed an invalid row")
        values[mask] = inside
    return values


def predictive_density(chain: Chain, x) -> np.ndarray | float:
    """Posterior predictive density: the state-average of exp(log density).

    States where a point leaves the support contribute zero there.
    """
    if not chain.states:
        raise DomainError("predictive density needs a nonempty chain")
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != chain.d:
        raise DomainError(f"points have {pts.shape[1]} coordinates, chain has {chain.d}")
    grouped, _ = _group_states(chain.states)
    logs = np.empty((len(grouped), len(pts)))
    for i, (state, multiplicity) in enumerate(grouped):
        logs[i] = state_log_density_rows(chain.d, chain.family, state, pts) + math.log(
            multiplicity
        )
    with np.errstate(divide="ignore"):
        out = np.exp(logsumexp(logs, axis=0) - math.log(len(chain.states)))
    return float(out[0]) if single else out


def posterior_mean_model(chain: Chain) -> AngularBP:
    """Exact posterior-mean angular measure via common-degree elevation."""
    if not chain.states:
        raise DomainError("posterior mean needs a nonempty chain")
    grouped, _ = _group_states(chain.states)
    top = max(state.k for state, _ in grouped)
    total = len(chain.states)
    vertex = np.zeros(chain.d)
    weights = np.zeros(len(MultiIndexGrid(chain.d, top)))
    for state, multiplicity in grouped:
        model = state.angular_model(chain.d)
        while model.k < top:
            model = degree_elevate(model)
        share = multiplicity / total
        vertex += share * np.asarray(model.vertex_mass)
        weights += share * np.asarray(model.interior_weight)
    return AngularBP(chain.d, top, vertex, weights)


def _quantile_block(matrix: np.ndarray) -> dict:
    return {
        "mean": matrix.mean(axis=0).tolist(),
        "q05": np.quantile(matrix, 0.05, axis=0).tolist(),
        "q50": np.quantile(matrix, 0.50, axis=0).tolist(),
        "q95": np.quantile(matrix, 0.95, axis=0).tolist(),
    }


def posterior_summary(chain: Chain, grid_points: int = 101) -> dict:
    """Serializable posterior report: degree pmf, function bands, margins.

    Pickands and angular-density grids (with central 90% bands) are
    produced for d=2; higher dimensions report the degree and margin
    blocks only.
    """
    if not chain.states:
        raise DomainError("posterior summary needs a nonempty chain")
    total = len(chain.states)
    out: dict = {"d": chain.d, "family": chain.family, "states": total}

    degree_counts: dict = {}
    for state in chain.states:
        degree_counts[state.k] = degree_counts.get(state.k, 0) + 1
    out["degree_pmf"] = {str(k): degree_counts[k] / total for k in sorted(degree_counts)}

    grouped, expand = _group_states(chain.states)

    if chain.d == 2:
        from ._kernels import _ref

        tgrid = np.linspace(0.0, 1.0, grid_points)
        interior = tgrid[1:-1]
        a_rows = np.empty((len(grouped), grid_points))
        h_rows = np.empty((len(grouped), len(interior)))
        for i, (state, _) in enumerate(grouped):
            model = state.angular_model(2)
            beta = np.asarray(weights_to_pickands2(model).beta, dtype=float)
            a_rows[i] = _ref.pickands_derivs2(beta, tgrid)[0]
            h_rows[i] = _interior_density_grid(model, interior)
        out["pickands"] = {"grid": tgrid.tolist(), **_quantile_block(a_rows[expand])}
        out["angular_density"] = {
            "grid": interior.tolist(),
            **_quantile_block(h_rows[expand]),
        }

    if chain.family != "simple":
        margins: dict = {}
        for key in _FAMILY_PARAMS[chain.family]:
            stacked = np.stack([state.theta[key] for state in chain.states])
            margins[key] = _quantile_block(stacked)
        out["margins"] = margins
    return out


def _interior_density_grid(model: AngularBP, interior: np.ndarray) -> np.ndarray:
    from scipy.stats import beta as beta_dist

    grid = MultiIndexGrid(2, model.k)
    alphas = np.array(grid.indices, dtype=float)
    phi = np.asarray(model.interior_weight)
    dens = np.zeros(len(interior))
    for weight, alpha in zip(phi, alphas):
        if weight > 0.0:
            dens += weight * beta_dist.pdf(interior, alpha[0], alpha[1])
    return dens
