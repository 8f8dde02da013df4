"""Exact simulation of max-stable vectors and the benchmark data generators.

Simple max-stable draws use the arrival-time spectral construction: with
standard Poisson arrivals G_1 < G_2 < ... and iid angular draws W_i,
Y_j = max_i d W_ij / G_i, stopping once d / G_i falls below min_j Y_j so
that no later arrival can change any coordinate.  The benchmark generators
produce iid rows from three bivariate laws in the max-domain of attraction
of known limits, via conditional-cdf inversion.
"""

import math
from dataclasses import dataclass

import numpy as np

from .angular import AngularBP, uniform_model
from .core import MarginSpec, ModelSpec, Partition, margin_inverse
from .errors import CapabilityError, ConfigError, DomainError, StructuralError

EXAMPLE_NAMES = ("exp-pareto", "joe-b5-pareto", "biv-exponential")

_ARRIVAL_CHUNK = 8
_MAX_ARRIVALS = 10**7


@dataclass(frozen=True)
class SeededRng:
    """Counter-based random stream: (seed, stream) fully determine the output."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % 2**64, self.stream % 2**64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def split(self, stream: int) -> "SeededRng":
        return SeededRng(self.seed, stream)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return SeededRng(int(rng)).generator()
    raise ConfigError(f"expected SeededRng, Generator, or integer seed, got {type(rng).__name__}")


@dataclass(frozen=True)
class BlockConfig:
    """Block-maxima layout: n blocks of m consecutive rows."""

    m: int
    n: int

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise StructuralError(f"block config needs m >= 1 and n >= 1, got m={self.m}, n={self.n}")


# --------------------------------------------------------------------------
# angular and max-stable sampling
# --------------------------------------------------------------------------

def sample_angular(model: AngularBP, rng, n: int = None):
    """Draw from the angular measure: vertex atoms plus the Dirichlet mixture.

    Returns a single simplex point for n=None, else an (n, d) array.
    """
    gen = _as_generator(rng)
    single = n is None
    count = 1 if single else int(n)
    d = model.d
    probs = np.concatenate([model.vertex_mass, model.interior_weight])
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    which = gen.choice(len(probs), size=count, p=probs)
    out = np.zeros((count, d))
    vertex = which < d
    out[vertex, which[vertex]] = 1.0
    grid = model.grid.indices
    for pos in np.unique(which[~vertex]):
        alpha = np.asarray(grid[pos - d], dtype=float)
        rows = np.flatnonzero(which == pos)
        out[rows] = gen.dirichlet(alpha, size=len(rows))
    return out[0] if single else out


def sample_simple_maxstable(
    model: AngularBP,
    rng,
    n: int = None,
    return_partition: bool = False,
    max_arrivals: int = _MAX_ARRIVALS,
):
    """Exact simple max-stable draws (unit Frechet margins) via arrival times.

    Returns a point for n=None, else an (n, d) array; with
    return_partition=True also returns the co-maximum partition(s): the
    grouping of coordinates by the arrival that achieved their maximum.
    Raising the arrival cap never changes the draws, it only postpones the
    failure diagnostic.
    """
    gen = _as_generator(rng)
    single = n is None
    count = 1 if single else int(n)
    d = model.d
    y = np.zeros((count, d))
    src = np.full((count, d), -1, dtype=np.int64)      # arrival id of each max
    gamma = np.zeros(count)
    done_arrivals = np.zeros(count, dtype=np.int64)
    active = np.arange(count)
    while active.size:
        if done_arrivals.max(initial=0) >= max_arrivals:
            raise CapabilityError(
                f"spectral sampler did not stop within {max_arrivals} arrivals"
            )
        a = active.size
        gaps = gen.exponential(size=(a, _ARRIVAL_CHUNK))
        arr = gamma[active, None] + np.cumsum(gaps, axis=1)
        w = sample_angular(model, gen, n=a * _ARRIVAL_CHUNK).reshape(a, _ARRIVAL_CHUNK, d)
        contrib = d * w / arr[:, :, None]
        best = contrib.max(axis=1)
        offset = contrib.argmax(axis=1)
        improved = best > y[active]
        ids = done_arrivals[active, None] + offset
        rows = active[:, None].repeat(d, axis=1)
        y[rows[improved], np.nonzero(improved)[1]] = best[improved]
        src[rows[improved], np.nonzero(improved)[1]] = ids[improved]
        gamma[active] = arr[:, -1]
        done_arrivals[active] += _ARRIVAL_CHUNK
        finished = d / gamma[active] < y[active].min(axis=1)
        active = active[~finished]
    if not return_partition:
        return y[0] if single else y
    partitions = []
    for i in range(count):
        blocks = {}
        for j in range(d):
            blocks.setdefault(int(src[i, j]), []).append(j)
        partitions.append(Partition(tuple(tuple(b) for b in blocks.values())))
    if single:
        return y[0], partitions[0]
    return y, partitions


def sample_maxstable(model: ModelSpec, rng, n: int = None):
    """Max-stable draws with the model's margins (inverse-transform of a simple draw)."""
    angular = model.angular if isinstance(model, ModelSpec) else model
    margins = model.margins if isinstance(model, ModelSpec) else None
    y = sample_simple_maxstable(angular, rng, n=n)
    return margin_inverse(margins, y)


# --------------------------------------------------------------------------
# benchmark generators (bivariate, iid rows)
# --------------------------------------------------------------------------

def _sum_form_pareto1(gen: np.random.Generator, n: int) -> np.ndarray:
    """Rows from F(u) = 1 - 1/u1 - 1/u2 + 1/(u1 + u2 - 1) on [1, inf)^2.

    Margins are unit Pareto; the conditional cdf of U2 given U1 = u inverts
    in closed form: F(u2 | u1) = 1 - u1^2 (u1 + u2 - 1)^-2.
    """
    v = gen.uniform(size=(n, 2))
    u1 = 1.0 / (1.0 - v[:, 0])
    u2 = 1.0 - u1 + u1 / np.sqrt(1.0 - v[:, 1])
    return np.stack([u1, u2], axis=1)


def _joe_b5_uniform(gen: np.random.Generator, n: int, theta: float) -> np.ndarray:
    """Copula rows from C(u, v) = 1 - (p + q - pq)^(1/theta), p=(1-u)^theta.

    The conditional cdf dC/du has no closed inverse; solved by bisection to
    1e-12, vectorized over rows.
    """
    u = gen.uniform(size=n)
    q = gen.uniform(size=n)
    p = (1.0 - u) ** theta

    def conditional(v: np.ndarray) -> np.ndarray:
        s = (1.0 - v) ** theta
        inner = p + s - p * s
        return inner ** (1.0 / theta - 1.0) * (1.0 - u) ** (theta - 1.0) * (1.0 - s)

    lo = np.zeros(n)
    hi = np.ones(n)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = conditional(mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if float((hi - lo).max()) < 1e-12:
            break
    return np.stack([u, 0.5 * (lo + hi)], axis=1)


def gen_example(name: str, n: int, rng, rho=(1.0, 2.0), theta: float = 3.0) -> np.ndarray:
    """iid rows from one of the named benchmark distributions.

    "exp-pareto": polynomial sum form with Pareto(rho_j) margins;
    "joe-b5-pareto": Joe/B5 copula (parameter theta) with Pareto(rho_j)
    margins; "biv-exponential": the same sum form with Exp(1) margins.
    """
    if name not in EXAMPLE_NAMES:
        raise ConfigError(f"unknown example {name!r}; expected one of {EXAMPLE_NAMES}")
    gen = _as_generator(rng)
    if n < 1:
        raise DomainError(f"need n >= 1 rows, got {n}")
    rho = np.asarray(rho, dtype=float)
    if name != "biv-exponential" and np.any(rho <= 0.0):
        raise DomainError("Pareto margin indices must be positive")
    if name == "exp-pareto":
        u = _sum_form_pareto1(gen, n)
        return u ** (1.0 / rho)
    if name == "biv-exponential":
        u = _sum_form_pareto1(gen, n)
        return np.log(u)
    cop = _joe_b5_uniform(gen, n, theta)
    return (1.0 - cop) ** (-1.0 / rho)


def example_norming(name: str, m: int, rho=(1.0, 2.0)):
    """Analytic norming (a_m, b_m) of the block maxima where available.

    Returns None for the Joe/B5 case (no closed norming; estimate
    empirically instead).
    """
    if name not in EXAMPLE_NAMES:
        raise ConfigError(f"unknown example {name!r}; expected one of {EXAMPLE_NAMES}")
    if m < 2:
        raise DomainError(f"block size must be at least 2, got {m}")
    rho = np.asarray(rho, dtype=float)
    if name == "exp-pareto":
        return (m - 1.0) ** (1.0 / rho), np.zeros(2)
    if name == "biv-exponential":
        return np.ones(2), np.full(2, math.log(m - 1.0))
    return None


def example_attractor(name: str, m: int, rho=(1.0, 2.0)) -> ModelSpec:
    """Max-stable law attracting the (unnormalized) block maxima of size m.

    The sum-form cases share the uniform angular measure; margins carry the
    norming.  The Joe/B5 limit (logistic Pickands) is not a finite
    Bernstein model, so it has no exact representation here.
    """
    norming = example_norming(name, m, rho)
    if norming is None:
        raise CapabilityError(
            "the Joe/B5 limit is logistic; it has no exact finite-degree representation"
        )
    a_m, b_m = norming
    if name == "exp-pareto":
        margins = MarginSpec.frechet(shape=list(rho), scale=list(a_m))
    else:
        margins = MarginSpec.gumbel(scale=[1.0, 1.0], loc=list(b_m))
    return ModelSpec(uniform_model(), margins)


def example_pickands(name: str, theta: float = 3.0):
    """Pickands function of the limiting dependence structure, as a callable."""
    if name in ("exp-pareto", "biv-exponential"):
        return lambda t: 1.0 - t + t * t
    if name == "joe-b5-pareto":
        return lambda t: (t**theta + (1.0 - t) ** theta) ** (1.0 / theta)
    raise ConfigError(f"unknown example {name!r}; expected one of {EXAMPLE_NAMES}")


# --------------------------------------------------------------------------
# block maxima
# --------------------------------------------------------------------------

def block_maxima(data, cfg) -> np.ndarray:
    """Componentwise maxima over consecutive blocks; tail rows are discarded.

    cfg is a BlockConfig or a plain block size (then n = rows // m).
    """
    rows = np.asarray(data, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DomainError(f"expected a non-empty data matrix, got shape {rows.shape}")
    if isinstance(cfg, BlockConfig):
        m, n = cfg.m, cfg.n
    else:
        m = int(cfg)
        if m < 1:
            raise DomainError(f"block size must be positive, got {m}")
        n = rows.shape[0] // m
    if n < 1 or rows.shape[0] < m * n:
        raise DomainError(
            f"need at least {m * n} rows for {n} blocks of {m}, got {rows.shape[0]}"
        )
    return rows[: m * n].reshape(n, m, rows.shape[1]).max(axis=1)
