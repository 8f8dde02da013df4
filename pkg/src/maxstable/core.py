"""Exact joint densities for max-stable vectors with polynomial angular measures.

The simple (unit-Frechet) density combines the exponent function with sums
over set partitions of its mixed coordinate derivatives; parametric margins
enter through a smooth change of variables.  Scalar entry points use an
independent special-function stack, while bulk row evaluation dispatches to
vectorized paths (and, at d=2, to the compiled kernel backend).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special as _sps
from scipy.integrate import quad

from ._special import betainc_reg, log_dirichlet_pdf
from .angular import AngularBP, _grid_array, pickands, weights_to_pickands2
from .errors import (
    CapabilityError,
    DomainError,
    StructuralError,
    SupportError,
)

# Set-partition enumeration grows like the Bell numbers; beyond this the
# density sum is no longer practical to evaluate exactly.
PARTITION_D_MAX = 8

MARGIN_FAMILIES = ("frechet", "gumbel", "weibull")


# ---------------------------------------------------------------------------
# set partitions


@dataclass(frozen=True)
class Partition:
    """Set partition of coordinate indices {0, ..., d-1}.

    Blocks are stored in canonical form: each block ascending, blocks
    ordered by their least element.  Arbitrary block order is accepted at
    construction and canonicalized.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for block in self.blocks:
            if len(block) == 0:
                raise StructuralError("partition blocks must be non-empty")
            for i in block:
                if not isinstance(i, (int, np.integer)) or i < 0:
                    raise StructuralError(
                        f"partition entries must be non-negative integers, got {i!r}"
                    )
                if i in seen:
                    raise StructuralError(f"index {i} appears in more than one block")
                seen.add(i)
        canon = tuple(
            sorted((tuple(sorted(int(i) for i in b)) for b in self.blocks), key=lambda b: b[0])
        )
        object.__setattr__(self, "blocks", canon)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def indices(self) -> tuple[int, ...]:
        return tuple(sorted(i for b in self.blocks for i in b))

    def __iter__(self):
        return iter(self.blocks)


@lru_cache(maxsize=None)
def enumerate_partitions(d: int) -> tuple[Partition, ...]:
    """All set partitions of {0, ..., d-1} in a fixed canonical order.

    The all-singletons partition comes first and the single-block partition
    last.  Raises CapabilityError above PARTITION_D_MAX.
    """
    if d < 1:
        raise DomainError(f"dimension must be at least 1, got {d}")
    if d > PARTITION_D_MAX:
        raise CapabilityError(
            f"set-partition enumeration is capped at d={PARTITION_D_MAX}, got d={d}"
        )
    out: list[Partition] = []

    def extend(i: int, blocks: list[list[int]]) -> None:
        if i == d:
            out.append(Partition(tuple(tuple(b) for b in blocks)))
            return
        blocks.append([i])
        extend(i + 1, blocks)
        blocks.pop()
        for b in blocks:
            b.append(i)
            extend(i + 1, blocks)
            b.pop()

    extend(0, [])
    return tuple(out)


@lru_cache(maxsize=None)
def _index_subsets(d: int) -> tuple[tuple[int, ...], ...]:
    out: list[tuple[int, ...]] = []
    for size in range(1, d + 1):
        out.extend(itertools.combinations(range(d), size))
    return tuple(out)


# ---------------------------------------------------------------------------
# exponent-function derivatives


def _checked_point(y, d: int) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.shape != (d,):
        raise DomainError(f"expected a point of dimension {d}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError("point coordinates must be strictly positive and finite")
    return arr


def _checked_index_set(I, d: int) -> tuple[int, ...]:
    idx = tuple(sorted(int(i) for i in I))
    if len(idx) == 0:
        raise DomainError("index set must be non-empty")
    if len(set(idx)) != len(idx):
        raise DomainError(f"index set has repeated entries: {idx}")
    if idx[0] < 0 or idx[-1] >= d:
        raise DomainError(f"index set {idx} out of range for dimension {d}")
    return idx


def _cone_prob_qmc(beta: tuple[int, ...], ratios: np.ndarray) -> float:
    """P(U_i <= ratios_i * T for all i) for (T, U) ~ Dirichlet(beta), by QMC."""
    from .angular import _dirichlet_qmc

    draws = _dirichlet_qmc(tuple(int(b) for b in beta))
    inside = np.all(draws[:, 1:] <= ratios[None, :] * draws[:, :1], axis=1)
    return float(inside.mean())


def _nu_scalar(model: AngularBP, w: np.ndarray, idx: tuple[int, ...]) -> float:
    """Angular part of the derivative: -V_I(y) = ||y||^(-|I|-1) * nu_I(y/||y||).

    Interior components contribute through the cone probability
    P(U_i <= (w_i / x) T for i outside I) with (T, U) ~ Dirichlet(a_I + 1,
    alpha_outside); for a single outside coordinate this is a Beta tail.
    """
    d, k = model.d, model.k
    n_i = len(idx)
    n_c = d - n_i
    total = 0.0
    if n_i == 1:
        j = idx[0]
        total += d * float(model.vertex_mass[j]) / float(w[j]) ** 2
    grid = _grid_array(d, k)
    cols = np.array(idx)
    comp = np.array([i for i in range(d) if i not in idx])
    for alpha, phi in zip(grid, model.interior_weight):
        if phi <= 0.0:
            continue
        if n_c == 0:
            total += phi * d * math.exp(log_dirichlet_pdf(w, alpha))
            continue
        a_sub = alpha[cols]
        a_tot = int(a_sub.sum())
        x = float(w[cols].sum())
        if n_i == 1:
            dir_part = 1.0
        else:
            dir_part = math.exp(log_dirichlet_pdf(w[cols] / x, a_sub))
        if n_c == 1:
            cone = 1.0 - betainc_reg(a_tot + 1, k - a_tot, x)
        elif n_c == 2:
            a, b = comp
            cone = float(
                _cone_prob(
                    a_tot + 1,
                    int(alpha[a]),
                    int(alpha[b]),
                    np.array([w[a] / x]),
                    np.array([w[b] / x]),
                )[0]
            )
        else:
            cone = _cone_prob_qmc((a_tot + 1, *alpha[comp]), w[comp] / x)
        total += phi * d * (a_tot / k) * x ** (-(n_i + 1)) * dir_part * cone
    return total


def neg_V_I(model: AngularBP, y, I) -> float:
    """Mixed partial derivative of -V at y with respect to the coordinates in I.

    Coordinate indices are 0-based.  Always non-negative; for singleton I it
    includes the vertex-mass contribution d * p_j / y_j^2.
    """
    idx = _checked_index_set(I, model.d)
    arr = _checked_point(y, model.d)
    s = float(arr.sum())
    w = arr / s
    return _nu_scalar(model, w, idx) / s ** (len(idx) + 1)


def exponent_V(model: AngularBP, y) -> float:
    """Exponent function V(y) = d * E[max_j W_j / y_j] under the angular measure.

    Closed form at d=2; quasi-Monte Carlo through the Pickands evaluator
    otherwise.
    """
    arr = _checked_point(y, model.d)
    c = 1.0 / arr
    r = float(c.sum())
    c = c / r
    return r * pickands(model, c[1:])


def log_density_simple(model: AngularBP, y) -> float:
    """Log density at y of the simple max-stable law with angular model `model`.

    Evaluates exp(-V) times the sum over set partitions of products of
    mixed derivatives of -V, in log space.
    """
    arr = _checked_point(y, model.d)
    parts = enumerate_partitions(model.d)
    s = float(arr.sum())
    w = arr / s
    log_s = math.log(s)
    log_nu: dict[tuple[int, ...], float] = {}
    for idx in _index_subsets(model.d):
        val = _nu_scalar(model, w, idx)
        log_nu[idx] = math.log(val) if val > 0.0 else -math.inf
    big_v = exponent_V(model, arr)
    terms = []
    for part in parts:
        acc = 0.0
        for block in part.blocks:
            lv = log_nu[block]
            if lv == -math.inf:
                acc = -math.inf
                break
            acc += lv - (len(block) + 1) * log_s
        if acc > -math.inf:
            terms.append(acc)
    if not terms:
        return -math.inf
    return float(_sps.logsumexp(np.array(terms)) - big_v)


# ---------------------------------------------------------------------------
# bulk row evaluation

_GL_ORDER = 32


@lru_cache(maxsize=None)
def _gl01(order: int = _GL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


def _cone_prob(bj: int, ba: int, bb: int, ra: np.ndarray, rb: np.ndarray) -> np.ndarray:
    """P(c_j W_j >= c_a W_a and c_j W_j >= c_b W_b) for W ~ Dirichlet(bj, ba, bb).

    ra = c_j / c_a and rb = c_j / c_b, vectorized; np.inf entries are allowed
    and make the corresponding constraint vacuous.
    """
    t_both = 1.0 / (1.0 + ra + rb)
    t_a = 1.0 / (1.0 + ra)
    t_b = 1.0 / (1.0 + rb)
    m1 = np.minimum(t_a, t_b)
    m2 = np.maximum(t_a, t_b)
    out = 1.0 - _sps.betainc(bj, ba + bb, m2)
    lbeta = _sps.betaln(bj, ba + bb)
    x01, w01 = _gl01()

    def piece(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        width = hi - lo
        t = lo[:, None] + width[:, None] * x01[None, :]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            u = t / (1.0 - t)
            upper = np.clip(ra[:, None] * u, 0.0, 1.0)
            lower = np.clip(1.0 - rb[:, None] * u, 0.0, 1.0)
            inner = _sps.betainc(ba, bb, upper) - _sps.betainc(ba, bb, lower)
            pdf = np.exp((bj - 1) * np.log(t) + (ba + bb - 1) * np.log1p(-t) - lbeta)
            vals = (inner * pdf * w01[None, :]).sum(axis=1) * width
        return np.where(width > 0.0, vals, 0.0)

    return out + piece(t_both, m1) + piece(m1, m2)


def _square_query(dense: np.ndarray, n: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear interpolation on the uniform [0, 1]^2 grid with n cells per side."""
    gx = np.clip(x, 0.0, 1.0) * n
    gy = np.clip(y, 0.0, 1.0) * n
    i = np.minimum(gx.astype(np.intp), n - 1)
    j = np.minimum(gy.astype(np.intp), n - 1)
    u = gx - i
    v = gy - j
    return (
        dense[i, j] * (1.0 - u) * (1.0 - v)
        + dense[i + 1, j] * u * (1.0 - v)
        + dense[i, j + 1] * (1.0 - u) * v
        + dense[i + 1, j + 1] * u * v
    )


def _singleton_factor_exact(model: AngularBP, w: np.ndarray, j: int) -> np.ndarray:
    """S_j(w) = sum_alpha phi_alpha (alpha_j / k) P(cone_j at w), exactly."""
    a, b = [i for i in range(3) if i != j]
    with np.errstate(divide="ignore", invalid="ignore"):
        ra = w[:, a] / w[:, j]
        rb = w[:, b] / w[:, j]
    acc = np.zeros(len(w))
    grid = _grid_array(3, model.k)
    for alpha, phi in zip(grid, model.interior_weight):
        if phi <= 0.0:
            continue
        acc += (
            phi
            * (alpha[j] / model.k)
            * _cone_prob(int(alpha[j]) + 1, int(alpha[a]), int(alpha[b]), ra, rb)
        )
    return acc


@lru_cache(maxsize=4)
def _cone_basis3(k: int, n: int) -> np.ndarray:
    """Per-degree cone-probability tables, shape (len(grid), 3, n+1, n+1).

    Entry [pos, j] holds (alpha_j / k) P(cone_j) for grid index alpha at the
    ratio-square nodes.  Stored float32: the rounding is far below the
    interpolation error, and the tensor is reused by every degree-k model.
    """
    side = np.arange(n + 1) / n
    ua, ub = np.meshgrid(side, side, indexing="ij")
    with np.errstate(divide="ignore"):
        ra = (ua / (1.0 - ua)).ravel()
        rb = (ub / (1.0 - ub)).ravel()
    grid = _grid_array(3, k)
    out = np.empty((grid.shape[0], 3, n + 1, n + 1), dtype=np.float32)
    for pos, alpha in enumerate(grid):
        for j in range(3):
            a, b = [i for i in range(3) if i != j]
            vals = (alpha[j] / k) * _cone_prob(
                int(alpha[j]) + 1, int(alpha[a]), int(alpha[b]), ra, rb
            )
            out[pos, j] = vals.reshape(n + 1, n + 1)
    return out


class _ConeTable3:
    """Singleton cone factors S_j of a trivariate model.

    S_j is a function of the coordinate ratios alone, tabulated over the
    compactified ratio square (u_a, u_b) = (r_a / (1 + r_a), r_b / (1 + r_b))
    with r_i = w_i / w_j, where it is smooth up to the closed boundary.  The
    derivative and exponent identities follow as
    nu_j(w) = 3 (p_j + S_j(w)) / w_j^2 and V(y) = sum_j y_j (-V_j)(y).
    Node values are exact and linear in the weights, so per-model tables are
    a contraction against the cached per-degree basis; queries interpolate
    bilinearly.
    """

    __slots__ = ("n", "tables", "vm")

    def __init__(self, model: AngularBP, n: int) -> None:
        self.n = n
        self.vm = np.asarray(model.vertex_mass, dtype=float)
        basis = _cone_basis3(model.k, n)
        dense = np.tensordot(np.asarray(model.interior_weight, dtype=float), basis, axes=(0, 0))
        self.tables = [dense[j] for j in range(3)]

    def singleton_factors(self, w: np.ndarray) -> np.ndarray:
        """S_j(w) for j = 0, 1, 2 over rows of simplex points, shape (n, 3)."""
        out = np.empty((len(w), 3))
        for j in range(3):
            a, b = [i for i in range(3) if i != j]
            ua = w[:, a] / (w[:, a] + w[:, j])
            ub = w[:, b] / (w[:, b] + w[:, j])
            out[:, j] = _square_query(self.tables[j], self.n, ua, ub)
        return out


_TABLE_CACHE: dict[tuple, _ConeTable3] = {}


def _cone_table3_for(model: AngularBP, n: int = 256) -> _ConeTable3:
    key = (
        model.k,
        model.vertex_mass.tobytes(),
        model.interior_weight.tobytes(),
        n,
    )
    table = _TABLE_CACHE.get(key)
    if table is None:
        table = _ConeTable3(model, n)
        _TABLE_CACHE[key] = table
    return table


def _nu_singletons3(model: AngularBP, w: np.ndarray, table: _ConeTable3) -> np.ndarray:
    """nu_j(w) for j = 0, 1, 2 over rows of simplex points, shape (n, 3)."""
    factors = table.singleton_factors(w)
    return 3.0 * (table.vm[None, :] + factors) / w**2


def _exponent_rows3(rows: np.ndarray, nu_singles: np.ndarray, s: np.ndarray) -> np.ndarray:
    """V(y) over rows via the Euler identity V = sum_j y_j * (-V_j)."""
    return (rows * nu_singles).sum(axis=1) / s**2


def _log_nu_rows3(
    model: AngularBP, w: np.ndarray, idx: tuple[int, ...], nu_singles: np.ndarray
) -> np.ndarray:
    """log nu_I(w) over rows of simplex points w, -inf where the value is zero."""
    k = model.k
    n_i = len(idx)
    if n_i == 1:
        acc = nu_singles[:, idx[0]].copy()
    else:
        acc = np.zeros(len(w))
        grid = _grid_array(3, model.k)
        for alpha, phi in zip(grid, model.interior_weight):
            if phi <= 0.0:
                continue
            if n_i == 3:
                lognorm = math.lgamma(k) - sum(math.lgamma(int(a)) for a in alpha)
                logpdf = lognorm + ((alpha - 1.0) * np.log(w)).sum(axis=1)
                acc += phi * 3.0 * np.exp(logpdf)
                continue
            a_sub = alpha[list(idx)]
            a_tot = int(a_sub.sum())
            x = w[:, list(idx)].sum(axis=1)
            a0, a1 = int(a_sub[0]), int(a_sub[1])
            z = w[:, idx[0]] / x
            dir_part = np.exp(
                (a0 - 1.0) * np.log(z)
                + (a1 - 1.0) * np.log1p(-z)
                - _sps.betaln(a0, a1)
            )
            tail = 1.0 - _sps.betainc(a_tot + 1, k - a_tot, x)
            acc += phi * 3.0 * (a_tot / k) * x ** (-(n_i + 1)) * dir_part * tail
    with np.errstate(divide="ignore"):
        return np.where(acc > 0.0, np.log(np.maximum(acc, 1e-300)), -np.inf)


def _logpdf3_rows(model: AngularBP, rows: np.ndarray) -> np.ndarray:
    s = rows.sum(axis=1)
    w = rows / s[:, None]
    log_s = np.log(s)
    table = _cone_table3_for(model)
    nu_singles = _nu_singletons3(model, w, table)
    big_v = _exponent_rows3(rows, nu_singles, s)
    log_nu = {
        idx: _log_nu_rows3(model, w, idx, nu_singles) for idx in _index_subsets(3)
    }
    terms = []
    for part in enumerate_partitions(3):
        acc = np.zeros(len(rows))
        for block in part.blocks:
            acc = acc + log_nu[block] - (len(block) + 1) * log_s
        terms.append(acc)
    stacked = np.stack(terms, axis=0)
    with np.errstate(invalid="ignore"):
        return _sps.logsumexp(stacked, axis=0) - big_v


def _log_density_simple_rows(model: AngularBP, rows: np.ndarray) -> np.ndarray:
    """Vectorized log_density_simple over rows; rows must be strictly positive."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != model.d:
        raise DomainError(f"expected rows of shape (n, {model.d}), got {rows.shape}")
    if not np.all(np.isfinite(rows)) or np.any(rows <= 0.0):
        raise DomainError("row coordinates must be strictly positive and finite")
    if model.d == 2:
        from . import _kernels

        beta = np.asarray(weights_to_pickands2(model).beta, dtype=float)
        return _kernels.backend.simple_logpdf2(beta, np.ascontiguousarray(rows))
    if model.d == 3:
        return _logpdf3_rows(model, rows)
    return np.array([log_density_simple(model, row) for row in rows])


# ---------------------------------------------------------------------------
# margins


def _margin_array(value, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        raise StructuralError(f"{name} must be a scalar or a vector")
    if not np.all(np.isfinite(arr)):
        raise StructuralError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class MarginSpec:
    """Parametric margins attached coordinatewise to a simple max-stable vector.

    family is one of "frechet" (shape rho > 0, scale sigma > 0, support x > 0),
    "gumbel" (scale sigma > 0, location mu, support all reals), or "weibull"
    (shape omega > 0, scale sigma > 0, location mu, support x < mu).  Parameter
    vectors broadcast against the data dimension.
    """

    family: str
    scale: np.ndarray
    loc: np.ndarray = field(default=None)
    shape: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        if self.family not in MARGIN_FAMILIES:
            raise StructuralError(
                f"unknown margin family {self.family!r}; expected one of {MARGIN_FAMILIES}"
            )
        scale = _margin_array(self.scale, "scale")
        if np.any(scale <= 0.0):
            raise StructuralError("scale parameters must be positive")
        object.__setattr__(self, "scale", scale)
        if self.family == "frechet":
            if self.loc is not None and np.any(_margin_array(self.loc, "loc") != 0.0):
                raise StructuralError("frechet margins have fixed location zero")
            object.__setattr__(self, "loc", np.zeros(1))
        else:
            loc = _margin_array(0.0 if self.loc is None else self.loc, "loc")
            object.__setattr__(self, "loc", loc)
        if self.family == "gumbel":
            if self.shape is not None:
                raise StructuralError("gumbel margins take no shape parameter")
            object.__setattr__(self, "shape", None)
        else:
            if self.shape is None:
                raise StructuralError(f"{self.family} margins require a shape parameter")
            shape = _margin_array(self.shape, "shape")
            if np.any(shape <= 0.0):
                raise StructuralError("shape parameters must be positive")
            object.__setattr__(self, "shape", shape)

    @classmethod
    def frechet(cls, shape, scale) -> "MarginSpec":
        return cls(family="frechet", scale=scale, shape=shape)

    @classmethod
    def gumbel(cls, scale, loc) -> "MarginSpec":
        return cls(family="gumbel", scale=scale, loc=loc)

    @classmethod
    def weibull(cls, shape, scale, loc) -> "MarginSpec":
        return cls(family="weibull", scale=scale, loc=loc, shape=shape)

    def to_dict(self) -> dict:
        out = {"family": self.family, "scale": [float(v) for v in self.scale]}
        out["loc"] = None if self.family == "frechet" else [float(v) for v in self.loc]
        out["shape"] = None if self.shape is None else [float(v) for v in self.shape]
        return out

    @classmethod
    def from_dict(cls, payload: dict) -> "MarginSpec":
        try:
            family = payload["family"]
            scale = payload["scale"]
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed margin payload: {exc}") from exc
        return cls(
            family=family,
            scale=scale,
            loc=payload.get("loc"),
            shape=payload.get("shape"),
        )


def _margin_rows(margins: MarginSpec | None, x: np.ndarray):
    """Transform rows to the unit-Frechet scale.

    Returns (u, log_jacobian, bad), where bad is (row, coordinate) for the
    first support violation (u and log_jacobian are then invalid) or None.
    """
    if margins is None:
        ok = np.isfinite(x) & (x > 0.0)
        if not ok.all():
            row, coord = np.argwhere(~ok)[0]
            return x, np.zeros(len(x)), (int(row), int(coord))
        return x, np.zeros(len(x)), None
    scale = margins.scale
    if margins.family == "frechet":
        ok = np.isfinite(x) & (x > 0.0)
        if not ok.all():
            row, coord = np.argwhere(~ok)[0]
            return x, None, (int(row), int(coord))
        shape = margins.shape
        z = x / scale
        u = z**shape
        logj = (np.log(shape) - np.log(scale) + (shape - 1.0) * np.log(z)).sum(axis=1)
        return u, logj, None
    if margins.family == "gumbel":
        ok = np.isfinite(x)
        if not ok.all():
            row, coord = np.argwhere(~ok)[0]
            return x, None, (int(row), int(coord))
        z = (x - margins.loc) / scale
        u = np.exp(z)
        logj = (z - np.log(scale)).sum(axis=1)
        return u, logj, None
    ok = np.isfinite(x) & (x < margins.loc)
    if not ok.all():
        row, coord = np.argwhere(~ok)[0]
        return x, None, (int(row), int(coord))
    shape = margins.shape
    z = (margins.loc - x) / scale
    u = z ** (-shape)
    logj = (np.log(shape) - np.log(scale) - (shape + 1.0) * np.log(z)).sum(axis=1)
    return u, logj, None


def margin_inverse(margins: MarginSpec | None, u):
    """Map unit-Frechet values back to the margin scale (inverse of margin_transform)."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("unit-Frechet values must be positive and finite")
    if margins is None:
        return arr
    if margins.family == "frechet":
        return margins.scale * arr ** (1.0 / margins.shape)
    if margins.family == "gumbel":
        return margins.loc + margins.scale * np.log(arr)
    return margins.loc - margins.scale * arr ** (-1.0 / margins.shape)


def margin_transform(margins: MarginSpec | None, x):
    """Map x to the unit-Frechet scale, with the log Jacobian of the map.

    Accepts a point (d,) or rows (n, d); returns (u, logJ) with logJ scalar
    for a point.  Raises SupportError naming the offending coordinate (and
    row) when x leaves the margin support.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    rows = arr[None, :] if single else arr
    if rows.ndim != 2:
        raise DomainError(f"expected a point or rows, got shape {arr.shape}")
    u, logj, bad = _margin_rows(margins, rows)
    if bad is not None:
        row, coord = bad
        family = "simple" if margins is None else margins.family
        where = f"coordinate {coord}" if single else f"row {row}, coordinate {coord}"
        raise SupportError(
            f"{where}: value {rows[row, coord]!r} outside the {family} margin support",
            row=None if single else row,
            coordinate=coord,
        )
    if single:
        return u[0], float(logj[0])
    return u, logj


@dataclass(frozen=True)
class ModelSpec:
    """Angular dependence model plus (optional) parametric margins.

    margins=None means the simple case: unit-Frechet margins, support (0, inf)^d.
    """

    angular: AngularBP
    margins: MarginSpec | None = None

    def to_dict(self) -> dict:
        return {
            "angular": self.angular.to_dict(),
            "margins": None if self.margins is None else self.margins.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelSpec":
        try:
            angular = AngularBP.from_dict(payload["angular"])
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed model payload: {exc}") from exc
        margins = payload.get("margins")
        return cls(
            angular=angular,
            margins=None if margins is None else MarginSpec.from_dict(margins),
        )


def log_density(model: ModelSpec, x) -> float:
    """Log density of the max-stable law with the given angular model and margins."""
    angular = model.angular if isinstance(model, ModelSpec) else model
    margins = model.margins if isinstance(model, ModelSpec) else None
    u, logj = margin_transform(margins, x)
    return log_density_simple(angular, u) + logj


def _log_density_rows(model: ModelSpec, rows: np.ndarray) -> tuple[np.ndarray, tuple | None]:
    """Per-row log density; on a support violation returns (invalid, (row, coord))."""
    angular = model.angular if isinstance(model, ModelSpec) else model
    margins = model.margins if isinstance(model, ModelSpec) else None
    u, logj, bad = _margin_rows(margins, rows)
    if bad is not None:
        return np.full(len(rows), -np.inf), bad
    return _log_density_simple_rows(angular, u) + logj, None


def log_likelihood(model: ModelSpec, data) -> float:
    """Sum of log densities over data rows; -inf if any row leaves the support."""
    value, _ = log_likelihood_report(model, data)
    return value


def log_likelihood_report(model: ModelSpec, data) -> tuple[float, int | None]:
    """Like log_likelihood, also identifying the first out-of-support row."""
    rows = np.asarray(data, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise DomainError(f"expected a non-empty data matrix, got shape {rows.shape}")
    values, bad = _log_density_rows(model, rows)
    if bad is not None:
        return -math.inf, bad[0]
    return float(values.sum()), None


# ---------------------------------------------------------------------------
# partition probabilities


def _bernstein012(beta: np.ndarray, t: float) -> tuple[float, float, float]:
    """Value, first, and second derivative of a Bernstein polynomial at t."""
    k = len(beta) - 1

    def de_casteljau(coeffs: np.ndarray) -> float:
        b = coeffs.copy()
        for _ in range(len(b) - 1):
            b = b[:-1] * (1.0 - t) + b[1:] * t
        return float(b[0])

    d1 = k * np.diff(beta)
    d2 = (k - 1) * np.diff(d1) if k >= 2 else np.zeros(1)
    return de_casteljau(beta), de_casteljau(d1), de_casteljau(d2)


def partition_probability(model: AngularBP, partition) -> float:
    """Probability that the spectral decomposition realizes the given co-max partition.

    Adaptive quadrature at d=2 and deterministic quasi-Monte Carlo with a
    corner-favoring Dirichlet proposal at d=3.
    """
    part = partition if isinstance(partition, Partition) else Partition(
        tuple(tuple(b) for b in partition)
    )
    if part.indices() != tuple(range(model.d)):
        raise StructuralError(
            f"partition {part.blocks} does not cover all {model.d} coordinates"
        )
    if model.d == 2:
        beta = np.asarray(weights_to_pickands2(model).beta, dtype=float)
        if part.n_blocks == 2:

            def integrand(t: float) -> float:
                a, a1, _ = _bernstein012(beta, t)
                return (a - t * a1) * (a + (1.0 - t) * a1) / a**2

        else:

            def integrand(t: float) -> float:
                a, _, a2 = _bernstein012(beta, t)
                return a2 * t * (1.0 - t) / a

        value, _ = quad(integrand, 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, limit=200)
        return float(value)
    if model.d == 3:
        return _partition_probability3(model, part)
    raise CapabilityError(
        f"partition_probability supports d <= 3, got d={model.d}"
    )


_PARTITION_QMC_LOG2 = 15


@lru_cache(maxsize=8)
def _corner_dirichlet_qmc(log2_n: int = _PARTITION_QMC_LOG2):
    """Deterministic Dirichlet(1/2, 1/2, 1/2) points with their log density."""
    from .angular import _sobol_uniforms

    u = _sobol_uniforms(2, log2_n)
    u = np.clip(u, 2.0**-32, 1.0 - 2.0**-32)
    v0 = _sps.betaincinv(0.5, 1.0, u[:, 0])
    v1 = _sps.betaincinv(0.5, 0.5, u[:, 1])
    w = np.empty((len(u), 3))
    w[:, 0] = v0
    w[:, 1] = (1.0 - v0) * v1
    w[:, 2] = 1.0 - w[:, 0] - w[:, 1]
    w = np.clip(w, 1e-12, None)
    w /= w.sum(axis=1, keepdims=True)
    logpdf = math.lgamma(1.5) - 3 * math.lgamma(0.5) - 0.5 * np.log(w).sum(axis=1)
    w.setflags(write=False)
    logpdf.setflags(write=False)
    return w, logpdf


def _partition_probability3(model: AngularBP, part: Partition) -> float:
    w, logq = _corner_dirichlet_qmc()
    table = _cone_table3_for(model)
    nu_singles = _nu_singletons3(model, w, table)
    log_v = np.log((w * nu_singles).sum(axis=1))
    acc = math.lgamma(part.n_blocks) - part.n_blocks * log_v - logq
    for block in part.blocks:
        acc = acc + _log_nu_rows3(model, w, block, nu_singles)
    return float(np.exp(acc).mean())
