"""Distances between fitted and reference laws, and the consistency harness.

Monte Carlo estimators (Hellinger, Kullback-Leibler) accept angular models,
full model specifications, or posterior chains (whose predictive density is
the state average); deterministic distances (angular Kolmogorov-Smirnov,
angular L1) act on bivariate angular models directly.  run_experiment ties
data generation, empirical-Bayes centering, MCMC, and metric evaluation
into a per-(grid point, seed) report with median trajectories.
"""

import math
import os
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate
from scipy.special import betainc

from .angular import AngularBP, MultiIndexGrid, angular_density
from .core import ModelSpec, _log_density_rows
from .errors import CapabilityError, ConfigError, DomainError, StructuralError
from .inference import (
    Chain,
    SamplerConfig,
    posterior_mean_model,
    predictive_density,
    run_mcmc,
)
from .priors import PriorConfig, compute_eb, prior_config_from_dict
from .simulate import (
    EXAMPLE_NAMES,
    SeededRng,
    block_maxima,
    example_attractor,
    example_norming,
    gen_example,
    sample_maxstable,
    sample_simple_maxstable,
    _as_generator,
)

__all__ = [
    "MCDistance",
    "hellinger_mc",
    "kl_mc",
    "angular_cdf2",
    "ks_angular2",
    "l1_angular",
    "ExperimentConfig",
    "MetricReport",
    "experiment_config_from_dict",
    "run_experiment",
]

_SUPPORT_FLAG_SHARE = 0.01


# --------------------------------------------------------------------------
# density adapters
# --------------------------------------------------------------------------

def _as_spec(obj):
    if isinstance(obj, ModelSpec):
        return obj
    if isinstance(obj, AngularBP):
        return ModelSpec(obj)
    return None


def _spec_log_rows(spec: ModelSpec, pts: np.ndarray) -> np.ndarray:
    """Per-row log density with -inf outside the margin support."""
    margins = spec.margins
    mask = np.all(np.isfinite(pts), axis=1)
    if margins is None or margins.family == "frechet":
        mask &= np.all(pts > 0.0, axis=1)
    elif margins.family == "weibull":
        mask &= np.all(pts < margins.loc, axis=1)
    values = np.full(len(pts), -math.inf)
    if mask.any():
        inside, bad = _log_density_rows(spec, pts[mask])
        if bad is not None:
            raise DomainError("support mask missed an invalid row")
        values[mask] = inside
    return values


class _Density:
    """Uniform sampling/evaluation facade over models and posterior chains."""

    def __init__(self, obj):
        spec = _as_spec(obj)
        if spec is not None:
            self.d = spec.angular.d
            self._spec = spec
            self._chain = None
        elif isinstance(obj, Chain):
            if not obj.states:
                raise DomainError("cannot evaluate an empty chain")
            self.d = obj.d
            self._spec = None
            self._chain = obj
        else:
            raise ConfigError(
                f"expected an angular model, a model spec, or a chain, got {type(obj).__name__}"
            )

    def log_rows(self, pts: np.ndarray) -> np.ndarray:
        if self._spec is not None:
            return _spec_log_rows(self._spec, pts)
        with np.errstate(divide="ignore"):
            return np.log(predictive_density(self._chain, pts))

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        if self._spec is not None:
            return sample_maxstable(self._spec, gen, n=n)
        from .inference import _group_states, margins_from_theta

        grouped, _ = _group_states(self._chain.states)
        weights = np.array([mult for _, mult in grouped], dtype=float)
        counts = gen.multinomial(n, weights / weights.sum())
        parts = []
        for (state, _), count in zip(grouped, counts):
            if count == 0:
                continue
            spec = ModelSpec(
                state.angular_model(self.d),
                margins_from_theta(self._chain.family, state.theta),
            )
            parts.append(sample_maxstable(spec, gen, n=int(count)))
        return np.concatenate(parts, axis=0)


# --------------------------------------------------------------------------
# Monte Carlo divergences
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MCDistance:
    """Monte Carlo distance estimate.

    value is the distance (square root for Hellinger, plain for KL),
    squared/se describe the averaged directional estimates, and
    support_flag marks runs where over 1% of draws from one law fell
    outside the other's support.
    """

    value: float
    squared: float
    se: float
    support_flag: bool


def _half_hellinger(p: _Density, q: _Density, n: int, gen) -> tuple:
    x = p.sample(gen, n)
    log_p = p.log_rows(x)
    log_q = q.log_rows(x)
    ratio = np.exp(0.5 * (log_q - log_p))
    missing = float(np.mean(~np.isfinite(log_q)))
    est = 1.0 - float(ratio.mean())
    se = float(ratio.std(ddof=1) / math.sqrt(n))
    return est, se, missing > _SUPPORT_FLAG_SHARE


def hellinger_mc(model_a, model_b, n_samples: int, rng) -> MCDistance:
    """Squared Hellinger distance 1 - E_a[sqrt(g_b/g_a)], symmetrized.

    Sampling from each side in turn averages the two directional
    estimates; the standard error combines both directions.
    """
    if n_samples < 2:
        raise DomainError("need at least 2 Monte Carlo samples")
    gen = _as_generator(rng)
    pa, qb = _Density(model_a), _Density(model_b)
    if pa.d != qb.d:
        raise StructuralError(f"dimension mismatch: {pa.d} vs {qb.d}")
    est_ab, se_ab, flag_ab = _half_hellinger(pa, qb, n_samples, gen)
    est_ba, se_ba, flag_ba = _half_hellinger(qb, pa, n_samples, gen)
    squared = 0.5 * (est_ab + est_ba)
    se = 0.5 * math.hypot(se_ab, se_ba)
    return MCDistance(
        value=math.sqrt(max(squared, 0.0)),
        squared=squared,
        se=se,
        support_flag=flag_ab or flag_ba,
    )


def kl_mc(model_a, model_b, n_samples: int, rng) -> MCDistance:
    """Kullback-Leibler divergence E_a[log(g_a/g_b)] with its standard error."""
    if n_samples < 2:
        raise DomainError("need at least 2 Monte Carlo samples")
    gen = _as_generator(rng)
    pa, qb = _Density(model_a), _Density(model_b)
    if pa.d != qb.d:
        raise StructuralError(f"dimension mismatch: {pa.d} vs {qb.d}")
    x = pa.sample(gen, n_samples)
    diffs = pa.log_rows(x) - qb.log_rows(x)
    missing = float(np.mean(~np.isfinite(diffs)))
    if missing > 0.0:
        return MCDistance(math.inf, math.inf, math.inf, missing > _SUPPORT_FLAG_SHARE)
    est = float(diffs.mean())
    se = float(diffs.std(ddof=1) / math.sqrt(n_samples))
    return MCDistance(value=est, squared=est, se=se, support_flag=False)


# --------------------------------------------------------------------------
# deterministic angular distances (d = 2)
# --------------------------------------------------------------------------

def angular_cdf2(model: AngularBP, t) -> np.ndarray:
    """Exact angular cdf H(t) = P(W_1 <= t) of a bivariate model.

    H(t) = vertex mass at t=0 plus the regularized Beta mixture for t < 1;
    H(1) = 1.
    """
    if model.d != 2:
        raise CapabilityError("angular cdf evaluation is bivariate only")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise DomainError("cdf arguments must lie in [0, 1]")
    out = np.full(t.shape, float(model.vertex_mass[1]))
    grid = MultiIndexGrid(2, model.k)
    for weight, alpha in zip(model.interior_weight, grid.indices):
        if weight > 0.0:
            out += weight * betainc(alpha[0], alpha[1], t)
    out[t >= 1.0] = 1.0
    return out


def ks_angular2(a: AngularBP, b: AngularBP, grid_points: int = 10**4) -> float:
    """Sup distance between bivariate angular cdfs over a dense grid.

    The grid spans [0, 1) plus both endpoints; the cdfs are evaluated
    exactly, so the only looseness is the grid resolution.
    """
    if a.d != 2 or b.d != 2:
        raise CapabilityError("angular Kolmogorov-Smirnov distance is bivariate only")
    t = np.append(np.linspace(0.0, 1.0, grid_points, endpoint=False), 1.0)
    gaps = np.abs(angular_cdf2(a, t) - angular_cdf2(b, t))
    return float(gaps.max(initial=0.0))


def l1_angular(a: AngularBP, b: AngularBP, qmc_power: int = 16) -> float:
    """L1 distance: interior density integral plus vertex-mass differences.

    d=2 uses adaptive quadrature (absolute tolerance 1e-6); d=3 uses a
    fixed Sobol rule with 2**qmc_power points, accurate to roughly 1e-5.
    """
    if a.d != b.d:
        raise StructuralError(f"dimension mismatch: {a.d} vs {b.d}")
    vertex_gap = float(np.abs(np.asarray(a.vertex_mass) - np.asarray(b.vertex_mass)).sum())
    if a.d == 2:
        def gap(t):
            return abs(angular_density(a, [t]) - angular_density(b, [t]))

        interior, _ = integrate.quad(gap, 0.0, 1.0, epsabs=1e-6, epsrel=1e-9, limit=400)
        return vertex_gap + float(interior)
    if a.d == 3:
        from scipy.stats import qmc

        sob = qmc.Sobol(2, scramble=True, seed=1905).random(2**qmc_power)
        u, v = sob[:, 0], sob[:, 1]
        w1 = u
        w2 = (1.0 - u) * v
        jac = 1.0 - u
        keep = (w1 > 0.0) & (w2 > 0.0) & (w1 + w2 < 1.0)
        pts = np.stack([w1[keep], w2[keep]], axis=1)
        vals = np.array(
            [abs(angular_density(a, p) - angular_density(b, p)) for p in pts]
        )
        interior = float((vals * jac[keep]).sum() / len(sob))
        return vertex_gap + interior
    raise CapabilityError("angular L1 distance supports d = 2 and d = 3 only")


# --------------------------------------------------------------------------
# experiment harness
# --------------------------------------------------------------------------

_METRICS = ("ks_angular2", "l1_angular", "hellinger_predictive", "scale_rel_err")


@dataclass(frozen=True)
class ExperimentConfig:
    """One consistency experiment: generator, grids, seeds, sampler, metrics.

    Within-model experiments sweep the sample size grid; example-based
    (misspecified) experiments sweep the block-size grid at the fixed
    block count n_grid[0].
    """

    generator: dict
    n_grid: tuple
    seeds: tuple
    sampler: SamplerConfig
    priors: PriorConfig
    family: str = "simple"
    m_grid: tuple = ()
    metrics: tuple = ("ks_angular2",)
    hellinger_samples: int = 4000

    def __post_init__(self):
        kind = self.generator.get("kind")
        if kind not in ("within-model", "example"):
            raise ConfigError(f"generator kind must be within-model or example, got {kind!r}")
        if kind == "example" and self.generator.get("name") not in EXAMPLE_NAMES:
            raise ConfigError(
                f"unknown example {self.generator.get('name')!r}; "
                f"expected one of {EXAMPLE_NAMES}"
            )
        if not self.n_grid or not all(int(n) > 0 for n in self.n_grid):
            raise ConfigError("n grid must be nonempty and positive")
        if kind == "example" and (not self.m_grid or not all(int(m) > 1 for m in self.m_grid)):
            raise ConfigError("example experiments need a block-size grid with m > 1")
        unknown = set(self.metrics) - set(_METRICS)
        if unknown:
            raise ConfigError(f"unknown metrics {sorted(unknown)}; expected from {_METRICS}")
        object.__setattr__(self, "n_grid", tuple(int(v) for v in self.n_grid))
        object.__setattr__(self, "m_grid", tuple(int(v) for v in self.m_grid))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def axis_name(self) -> str:
        return "n" if self.generator.get("kind") == "within-model" else "m"

    @property
    def axis_values(self) -> tuple:
        return self.n_grid if self.axis_name == "n" else self.m_grid


@dataclass
class MetricReport:
    """Per-cell metric values with median trajectories and trend flags."""

    axis_name: str
    axis_values: tuple
    metrics: tuple
    cells: list
    medians: dict
    decreasing: dict

    def to_dict(self) -> dict:
        return {
            "axis_name": self.axis_name,
            "axis_values": list(self.axis_values),
            "metrics": list(self.metrics),
            "cells": self.cells,
            "medians": {
                metric: {str(axis): val for axis, val in by_axis.items()}
                for metric, by_axis in self.medians.items()
            },
            "decreasing": dict(self.decreasing),
        }


def _truth_model(generator: dict) -> AngularBP:
    model = generator.get("model")
    if isinstance(model, AngularBP):
        return model
    if isinstance(model, dict):
        return AngularBP.from_dict(model)
    raise ConfigError("within-model experiments need a truth model")


def experiment_config_from_dict(doc: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from its JSON document form."""
    if not isinstance(doc, dict):
        raise ConfigError("experiment config must be a JSON object")
    for key in ("generator", "n_grid", "seeds", "sampler", "priors"):
        if key not in doc:
            raise ConfigError(f"experiment config is missing {key!r}")
    generator = doc["generator"]
    if not isinstance(generator, dict):
        raise ConfigError("generator must be an object")
    if generator.get("kind") == "within-model":
        d = _truth_model(generator).d
    else:
        d = 2
    try:
        sampler = SamplerConfig(**doc["sampler"])
    except TypeError as exc:
        raise ConfigError(f"bad sampler config: {exc}") from None
    priors = prior_config_from_dict(doc["priors"], d)
    kwargs = dict(
        generator=generator,
        n_grid=tuple(doc["n_grid"]),
        seeds=tuple(doc["seeds"]),
        sampler=sampler,
        priors=priors,
    )
    for key in ("family", "m_grid", "metrics", "hellinger_samples"):
        if key in doc:
            value = doc[key]
            kwargs[key] = tuple(value) if isinstance(value, list) else value
    return ExperimentConfig(**kwargs)


def _run_cell(cfg: ExperimentConfig, axis_value: int, seed: int, idx: int) -> dict:
    """One (grid point, seed) cell; returns {metric: value}."""
    data_rng = SeededRng(seed, stream=900_000 + idx)
    sampler = replace(cfg.sampler, seed=seed)
    out = {}
    if cfg.axis_name == "n":
        truth = _truth_model(cfg.generator)
        data = sample_simple_maxstable(truth, data_rng, n=axis_value)
        chain = run_mcmc(data, cfg.family, cfg.priors, sampler)
        mean_model = posterior_mean_model(chain)
        if "ks_angular2" in cfg.metrics:
            out["ks_angular2"] = ks_angular2(mean_model, truth)
        if "l1_angular" in cfg.metrics:
            out["l1_angular"] = l1_angular(mean_model, truth)
        return out

    name = cfg.generator["name"]
    rho = tuple(cfg.generator.get("rho", (1.0, 2.0)))
    m = axis_value
    n_blocks = cfg.n_grid[0]
    raw = gen_example(name, n_blocks * m, data_rng, rho=rho)
    data = block_maxima(raw, m)
    priors = replace(cfg.priors, eb_block_size=m)
    if "scale_rel_err" in cfg.metrics:
        norming = example_norming(name, m, rho)
        if norming is None:
            raise CapabilityError(f"no closed-form norming sequence for example {name!r}")
        estimates = compute_eb(priors.eb_estimator, raw, m)
        out["scale_rel_err"] = float(np.max(np.abs(estimates.sigma_hat / norming[0] - 1.0)))
    needs_chain = {"hellinger_predictive", "ks_angular2"} & set(cfg.metrics)
    if needs_chain:
        chain = run_mcmc(data, cfg.family, priors, sampler, raw_data=raw)
        if "hellinger_predictive" in cfg.metrics:
            target = example_attractor(name, m, rho)
            dist = hellinger_mc(
                chain,
                target,
                cfg.hellinger_samples,
                SeededRng(seed, stream=950_000 + idx),
            )
            out["hellinger_predictive"] = dist.value
        if "ks_angular2" in cfg.metrics:
            out["ks_angular2"] = ks_angular2(
                posterior_mean_model(chain), target.angular
            )
    return out


def _median_trajectories(cfg: ExperimentConfig, cells: list) -> tuple:
    medians: dict = {}
    decreasing: dict = {}
    for metric in cfg.metrics:
        by_axis = {}
        for axis in cfg.axis_values:
            values = [
                cell["value"]
                for cell in cells
                if cell["metric"] == metric
                and cell["axis"] == axis
                and cell["value"] is not None
            ]
            if values:
                by_axis[axis] = float(np.median(values))
        medians[metric] = by_axis
        path = [by_axis[a] for a in cfg.axis_values if a in by_axis]
        decreasing[metric] = len(path) == len(cfg.axis_values) and all(
            later < earlier for earlier, later in zip(path, path[1:])
        )
    return medians, decreasing


def run_experiment(cfg: ExperimentConfig, workers: int = None) -> MetricReport:
    """Run every (grid point, seed) cell and assemble median trajectories.

    Cell failures are recorded in place of values, never fatal.  workers
    defaults to the MAXSTABLE_THREADS environment cap (serial when unset).
    """
    tasks = [
        (axis, seed, idx)
        for idx, axis in enumerate(cfg.axis_values)
        for seed in cfg.seeds
    ]

    def one(task):
        axis, seed, idx = task
        try:
            values = _run_cell(cfg, axis, seed, idx)
            return [
                {"axis": axis, "seed": seed, "metric": metric, "value": value, "error": None}
                for metric, value in values.items()
            ]
        except Exception as exc:  # per-cell isolation is the contract
            return [
                {
                    "axis": axis,
                    "seed": seed,
                    "metric": metric,
                    "value": None,
                    "error": f"{type(exc).__name__}: {exc}",
                }
                for metric in cfg.metrics
            ]

    if workers is None:
        workers = int(os.environ.get("MAXSTABLE_THREADS", "1"))
    if workers > 1 and len(tasks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, tasks))
    else:
        results = [one(task) for task in tasks]

    cells = [cell for group in results for cell in group]
    medians, decreasing = _median_trajectories(cfg, cells)
    return MetricReport(
        axis_name=cfg.axis_name,
        axis_values=cfg.axis_values,
        metrics=cfg.metrics,
        cells=cells,
        medians=medians,
        decreasing=decreasing,
    )
