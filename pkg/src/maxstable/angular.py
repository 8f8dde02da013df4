"""Angular measures on the unit simplex in polynomial and spline form.

An angular measure here is a probability measure on the (d-1)-simplex with
all coordinate means equal to 1/d, carrying point masses only at the d
vertices plus an absolutely continuous interior part.  The interior density
is a mixture of Dirichlet densities with integer parameter vectors summing
to the degree k (a Bernstein polynomial on the simplex), so the whole
measure is determined by the vertex masses and the mixture weights.

For d = 2 the same object can be presented as a Pickands dependence
function, either as a Bernstein polynomial (degree k, k+1 coefficients) or
as a quadratic B-spline (k coefficients on a clamped uniform knot vector),
and as an angular cdf in linear-spline histogram form.  The conversion maps
between these presentations are exact and are inverses of each other.
"""

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import BSpline
from scipy.special import betaincinv

from ._special import betainc_reg, log_dirichlet_pdf
from .errors import ConstraintError, DomainError, InfeasibleWeightsError, StructuralError

__all__ = [
    "MultiIndexGrid",
    "AngularBP",
    "PickandsBP2",
    "PickandsBS2",
    "AngularHist2",
    "ValidationReport",
    "multi_index_grid",
    "validate_bp",
    "complete_vertex_masses",
    "angular_density",
    "angular_mean",
    "pickands",
    "bp_pickands_to_weights2",
    "weights_to_pickands2",
    "bs_to_pickands2",
    "pickands_bs_to_hist2",
    "degree_elevate",
    "elevation_matrix",
    "dependence_summaries2",
    "uniform_model",
    "independence_model",
]

LINEAR_TOL = 1e-12        # exact linear identities
QUAD_TOL = 1e-8           # quadrature-derived checks
QMC_LOG2_POINTS = 16      # fixed-seed low-discrepancy sample size, 2**16

K_MIN_OFFSET = 1          # minimum admissible degree is d + 1 (nonempty grid)


# --------------------------------------------------------------------------
# multi-index grid
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _grid_indices(d: int, k: int) -> tuple:
    """All alpha in {1..k-d+1}^d with sum k, lexicographic in alpha_{1:d-1}."""
    out = []
    for head in itertools.product(range(1, k - d + 2), repeat=d - 1):
        last = k - sum(head)
        if 1 <= last <= k - d + 1:
            out.append(head + (last,))
    return tuple(out)


@dataclass(frozen=True)
class MultiIndexGrid:
    """Ordered index set of the degree-k Dirichlet mixture in dimension d."""

    d: int
    k: int
    indices: tuple = field(init=False)

    def __post_init__(self):
        if self.d < 2:
            raise StructuralError(f"dimension must be >= 2, got {self.d}")
        if self.k < self.d:
            raise StructuralError(f"degree must be at least the dimension, got k={self.k}, d={self.d}")
        object.__setattr__(self, "indices", _grid_indices(self.d, self.k))

    def __len__(self):
        return len(self.indices)

    def position(self, alpha) -> int:
        return _grid_positions(self.d, self.k)[tuple(alpha)]


@lru_cache(maxsize=None)
def _grid_positions(d: int, k: int) -> dict:
    return {a: i for i, a in enumerate(_grid_indices(d, k))}


def multi_index_grid(d: int, k: int) -> MultiIndexGrid:
    return MultiIndexGrid(d, k)


@lru_cache(maxsize=None)
def _grid_array(d: int, k: int) -> np.ndarray:
    arr = np.array(_grid_indices(d, k), dtype=np.int64)
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------
# angular measure in Bernstein form
# --------------------------------------------------------------------------

def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AngularBP:
    """Angular measure: vertex masses plus Dirichlet-mixture interior weights.

    Parameters
    ----------
    d, k : int
        Dimension and degree.
    vertex_mass : array-like, shape (d,)
        Point masses at the simplex vertices e_1..e_d.
    interior_weight : array-like, shape (binomial(k-1, d-1),)
        Mixture weights, ordered as in ``multi_index_grid(d, k)``.

    Construction checks shapes only; run :func:`validate_bp` for the full
    constraint set.
    """

    d: int
    k: int
    vertex_mass: np.ndarray
    interior_weight: np.ndarray

    def __post_init__(self):
        grid = multi_index_grid(self.d, self.k)
        vm = _frozen_array(self.vertex_mass)
        w = _frozen_array(self.interior_weight)
        if vm.shape != (self.d,):
            raise StructuralError(f"vertex_mass has shape {vm.shape}, expected ({self.d},)")
        if w.shape != (len(grid),):
            raise StructuralError(
                f"interior_weight has length {w.shape[0]}, grid of (d={self.d}, k={self.k}) "
                f"needs {len(grid)}"
            )
        object.__setattr__(self, "vertex_mass", vm)
        object.__setattr__(self, "interior_weight", w)

    @property
    def grid(self) -> MultiIndexGrid:
        return multi_index_grid(self.d, self.k)

    # ---- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        grid = self.grid
        return {
            "d": self.d,
            "k": self.k,
            "vertex_mass": [float(v) for v in self.vertex_mass],
            "interior": [
                {"alpha": list(map(int, a)), "w": float(w)}
                for a, w in zip(grid.indices, self.interior_weight)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "AngularBP":
        try:
            d, k = int(doc["d"]), int(doc["k"])
            vm = doc["vertex_mass"]
            entries = doc["interior"]
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed angular model document: {exc}") from exc
        grid = multi_index_grid(d, k)
        w = np.zeros(len(grid))
        for entry in entries:
            alpha = tuple(int(a) for a in entry["alpha"])
            if alpha not in _grid_positions(d, k):
                raise StructuralError(f"alpha {alpha} is not a degree-{k} index in dimension {d}")
            w[grid.position(alpha)] = float(entry["w"])
        return cls(d, k, vm, w)

    @classmethod
    def from_json(cls, text: str) -> "AngularBP":
        return cls.from_dict(json.loads(text))


def uniform_model() -> AngularBP:
    """The d=2 model with uniform angular density and no vertex mass."""
    return AngularBP(2, 2, [0.0, 0.0], [1.0])


def independence_model(d: int = 2, k: int = None) -> AngularBP:
    """All angular mass at the vertices: independent unit-Frechet coordinates."""
    k = d + K_MIN_OFFSET if k is None else k
    grid = multi_index_grid(d, k)
    return AngularBP(d, k, np.full(d, 1.0 / d), np.zeros(len(grid)))


# --------------------------------------------------------------------------
# validation and vertex completion
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple  # of (constraint name, residual magnitude)

    def __bool__(self):
        return self.ok


def _column_moments(model: AngularBP) -> np.ndarray:
    """For each coordinate j: sum_alpha (alpha_j / k) * w_alpha."""
    grid = _grid_array(model.d, model.k)
    if grid.size == 0:
        return np.zeros(model.d)
    return model.interior_weight @ (grid / model.k)


def validate_bp(model: AngularBP) -> ValidationReport:
    """Check nonnegativity and the two linear constraints defining validity.

    The constraints are: total mass one (interior weights plus vertex masses),
    and per-coordinate mean 1/d, both within 1e-12; vertex masses must lie in
    [0, 1/d] and interior weights must be nonnegative.

    Returns
    -------
    ValidationReport
        ``ok`` is True iff no violation; each violation carries its residual.
    """
    bad = []
    w, vm, d = model.interior_weight, model.vertex_mass, model.d
    neg = -min(w.min(initial=0.0), 0.0)
    if neg > LINEAR_TOL:
        bad.append(("nonnegative interior weights", float(neg)))
    lo = -min(vm.min(), 0.0)
    hi = max(vm.max() - 1.0 / d, 0.0)
    if lo > LINEAR_TOL or hi > LINEAR_TOL:
        bad.append(("vertex masses in [0, 1/d]", float(max(lo, hi))))
    r1 = abs(w.sum() - (1.0 - vm.sum()))
    if r1 > LINEAR_TOL:
        bad.append(("R1 total mass", float(r1)))
    r2 = np.abs(_column_moments(model) - (1.0 / d - vm))
    if r2.max(initial=0.0) > LINEAR_TOL:
        bad.append(("R2 coordinate means", float(r2.max())))
    return ValidationReport(not bad, tuple(bad))


def complete_vertex_masses(interior_weight, k: int, d: int) -> AngularBP:
    """Derive the unique vertex masses making the interior weights valid.

    Sets vertex_mass[j] = 1/d - sum_l (l/k) * (total weight with alpha_j = l).
    Total mass one then holds automatically because every alpha sums to k.

    Raises
    ------
    InfeasibleWeightsError
        If any completed mass falls below -1e-12 (no valid completion), with
        the offending values attached.
    """
    grid = _grid_array(d, k)
    w = np.asarray(interior_weight, dtype=float)
    if w.shape != (grid.shape[0],):
        raise StructuralError(
            f"interior weights have shape {w.shape}, expected ({grid.shape[0]},)"
        )
    if w.size and w.min() < -LINEAR_TOL:
        raise DomainError("interior weights must be nonnegative")
    vm = 1.0 / d - (w @ (grid / k) if w.size else np.zeros(d))
    if vm.min() < -LINEAR_TOL:
        raise InfeasibleWeightsError(
            f"interior weights are infeasible: completed vertex masses {vm.tolist()} "
            f"fall outside [0, 1/{d}]",
            vertex_mass=vm,
        )
    return AngularBP(d, k, np.clip(vm, 0.0, None), w)


# --------------------------------------------------------------------------
# density, means, Pickands function
# --------------------------------------------------------------------------

def _as_simplex_point(t, d: int) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (d - 1,):
        raise DomainError(f"expected a point with {d - 1} coordinates, got shape {t.shape}")
    return t


def angular_density(model: AngularBP, t) -> float:
    """Interior angular density at t (first d-1 simplex coordinates).

    Evaluated as a log-sum-exp over the Dirichlet mixture so that large
    degrees do not underflow.  Boundary points are rejected.
    """
    t = _as_simplex_point(t, model.d)
    s = t.sum()
    if t.min() <= 0.0 or s >= 1.0:
        raise DomainError(f"density is defined on the open simplex interior, got {t.tolist()}")
    full = np.append(t, 1.0 - s)
    terms = [
        math.log(w) + log_dirichlet_pdf(full, alpha)
        for w, alpha in zip(model.interior_weight, model.grid.indices)
        if w > 0.0
    ]
    if not terms:
        return 0.0
    top = max(terms)
    return math.exp(top) * math.fsum(math.exp(v - top) for v in terms)


def angular_mean(model: AngularBP) -> np.ndarray:
    """Coordinate means of the measure via the exact component moments."""
    return model.vertex_mass + _column_moments(model)


@lru_cache(maxsize=None)
def _gauss_legendre_01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def angular_mean_numeric(model: AngularBP) -> np.ndarray:
    """Coordinate means by numerical integration of the interior density.

    d=2 uses adaptive quadrature; d=3 uses a tensor Gauss-Legendre rule over
    the triangle, exact for the polynomial integrand.  Independent of the
    linear-constraint algebra, so it cross-checks validate_bp.
    """
    if model.d == 2:
        first, _ = quad(lambda v: v * angular_density(model, v), 0.0, 1.0,
                        epsabs=1e-12, limit=200)
        second, _ = quad(lambda v: (1.0 - v) * angular_density(model, v), 0.0, 1.0,
                         epsabs=1e-12, limit=200)
        interior = np.array([first, second])
    elif model.d == 3:
        n = max(20, model.k)
        x, wx = _gauss_legendre_01(n)
        # map the unit square onto the triangle {u > 0, v > 0, u + v < 1}
        u = np.broadcast_to(x[:, None], (n, n))
        v = x[None, :] * (1.0 - u)
        jac = (wx[:, None] * wx[None, :]) * (1.0 - u)
        dens = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                dens[i, j] = angular_density(model, (u[i, j], v[i, j]))
        interior = np.array([
            float((u * dens * jac).sum()),
            float((v * dens * jac).sum()),
            float(((1.0 - u - v) * dens * jac).sum()),
        ])
    else:
        raise DomainError("numeric means implemented for d in {2, 3} only")
    return model.vertex_mass + interior


def _pickands_bp2_closed(model: AngularBP, t: float) -> float:
    """A(t) = 1 - t + 2 p0 t + 2 sum_a w_a [t I_t(a1,a2) - (a1/k) I_t(a1+1,a2)]."""
    p0 = model.vertex_mass[1]
    acc = 0.0
    for w, alpha in zip(model.interior_weight, model.grid.indices):
        if w == 0.0:
            continue
        a1, a2 = alpha
        acc += w * (t * betainc_reg(a1, a2, t) - (a1 / model.k) * betainc_reg(a1 + 1, a2, t))
    return 1.0 - t + 2.0 * p0 * t + 2.0 * acc


@lru_cache(maxsize=None)
def _sobol_uniforms(dim: int, log2_n: int) -> np.ndarray:
    from scipy.stats import qmc

    pts = qmc.Sobol(d=dim, scramble=False).random_base2(log2_n)
    pts.setflags(write=False)
    return pts


@lru_cache(maxsize=None)
def _dirichlet_qmc(alpha: tuple, log2_n: int = QMC_LOG2_POINTS) -> np.ndarray:
    """Deterministic Dirichlet(alpha) point set via inverse-cdf stick breaking."""
    d = len(alpha)
    u = _sobol_uniforms(d - 1, log2_n)
    n = u.shape[0]
    out = np.empty((n, d))
    rest = np.ones(n)
    tail = sum(alpha)
    for j in range(d - 1):
        tail -= alpha[j]
        frac = betaincinv(alpha[j], tail, u[:, j])
        out[:, j] = rest * frac
        rest = rest * (1.0 - frac)
    out[:, d - 1] = rest
    out.setflags(write=False)
    return out


def _mixture_expected_max(model: AngularBP, c: np.ndarray) -> float:
    """E_H[max_j c_j w_j] for nonnegative coefficient vector c."""
    acc = float(model.vertex_mass @ c)
    for w, alpha in zip(model.interior_weight, model.grid.indices):
        if w == 0.0:
            continue
        draws = _dirichlet_qmc(alpha)
        acc += w * float(np.mean(np.max(draws * c, axis=1)))
    return acc


def pickands(model: AngularBP, t) -> float:
    """Pickands dependence function A(t), t in the closed lower-left simplex.

    For d=2 the value is exact (Beta cdf formulas); for d >= 3 it is a
    deterministic quasi-Monte Carlo average over the mixture with 2^16
    points.  The result is clamped to the admissible envelope
    [max(t_1, .., t_{d-1}, 1 - sum t), 1].
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (model.d - 1,):
        raise DomainError(f"expected {model.d - 1} coordinates, got shape {t.shape}")
    rest = 1.0 - t.sum()
    if t.min() < 0.0 or rest < -1e-15:
        raise DomainError(f"point {t.tolist()} outside the unit simplex")
    if model.d == 2:
        val = _pickands_bp2_closed(model, float(t[0]))
    else:
        c = np.concatenate(([max(rest, 0.0)], t))
        val = model.d * _mixture_expected_max(model, c)
    lower = max(float(t.max()), max(rest, 0.0))
    return min(1.0, max(val, lower))


# --------------------------------------------------------------------------
# d=2 conversions: Bernstein weights <-> Pickands coefficients
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PickandsBP2:
    """Bivariate Pickands function as a degree-k Bernstein polynomial.

    beta holds the k+1 control values; valid coefficients satisfy the
    endpoint conditions and discrete convexity checked by :meth:`validate`.
    """

    k: int
    beta: np.ndarray

    def __post_init__(self):
        beta = _frozen_array(self.beta)
        if beta.shape != (self.k + 1,):
            raise StructuralError(f"beta has length {beta.shape[0]}, expected {self.k + 1}")
        object.__setattr__(self, "beta", beta)

    def validate(self) -> ValidationReport:
        b, k = self.beta, self.k
        bad = []
        end = max(abs(b[0] - 1.0), abs(b[-1] - 1.0))
        if end > LINEAR_TOL:
            bad.append(("R5 endpoint values", float(end)))
        over = max(b.max() - 1.0, 0.0)
        if over > LINEAR_TOL:
            bad.append(("R5 upper bound", float(over)))
        second = b[2:] - 2.0 * b[1:-1] + b[:-2]
        neg = -min(second.min(initial=0.0), 0.0)
        if neg > LINEAR_TOL:
            bad.append(("R7 convexity", float(neg)))
        p0 = (k * b[1] - k + 1.0) / 2.0
        p1 = (k * b[-2] - k + 1.0) / 2.0
        out = max(-min(p0, p1, 0.0), max(p0, p1) - 0.5, 0.0)
        if out > LINEAR_TOL:
            bad.append(("R6 boundary slopes", float(out)))
        return ValidationReport(not bad, tuple(bad))

    def __call__(self, t: float) -> float:
        t = float(t)
        k = self.k
        basis = np.array([math.comb(k, j) * t**j * (1.0 - t) ** (k - j) for j in range(k + 1)])
        return float(self.beta @ basis)

    def to_dict(self) -> dict:
        return {"k": self.k, "beta": [float(b) for b in self.beta]}

    @classmethod
    def from_dict(cls, doc: dict) -> "PickandsBP2":
        return cls(int(doc["k"]), doc["beta"])


def bp_pickands_to_weights2(p: PickandsBP2) -> AngularBP:
    """Recover the angular measure from Bernstein Pickands coefficients.

    Uses the exact coefficient maps: vertex masses from the boundary slopes,
    interior weights from scaled second differences.
    """
    rep = p.validate()
    if not rep.ok:
        raise ConstraintError(f"invalid Pickands coefficients: {rep.violations}")
    b, k = p.beta, p.k
    p1 = (k * b[k - 1] - k + 1.0) / 2.0  # mass at e1
    p0 = (k * b[1] - k + 1.0) / 2.0      # mass at e2
    w = (k / 2.0) * (b[2:] - 2.0 * b[1:-1] + b[:-2])
    return AngularBP(2, k, [p1, p0], np.clip(w, 0.0, None))


def weights_to_pickands2(model: AngularBP) -> PickandsBP2:
    """Bernstein coefficients of the Pickands function of a bivariate model."""
    if model.d != 2:
        raise DomainError("Pickands coefficient map is bivariate only")
    k = model.k
    p1, p0 = model.vertex_mass
    beta = np.empty(k + 1)
    beta[0] = 1.0
    beta[1] = (k - 1.0 + 2.0 * p0) / k
    for j in range(1, k):
        beta[j + 1] = 2.0 * beta[j] - beta[j - 1] + (2.0 / k) * model.interior_weight[j - 1]
    return PickandsBP2(k, beta)


# --------------------------------------------------------------------------
# d=2 B-spline forms
# --------------------------------------------------------------------------

def _hist_knots(k: int) -> np.ndarray:
    inner = np.arange(1, k - 2) / (k - 2)
    return np.concatenate(([0.0, 0.0], inner, [1.0, 1.0]))


def _pickands_knots(k: int) -> np.ndarray:
    inner = np.arange(1, k - 2) / (k - 2)
    return np.concatenate(([0.0, 0.0, 0.0], inner, [1.0, 1.0, 1.0]))


@dataclass(frozen=True)
class PickandsBS2:
    """Bivariate Pickands function as a clamped quadratic B-spline (order 3)."""

    k: int
    beta: np.ndarray

    def __post_init__(self):
        if self.k < 4:
            raise StructuralError(f"B-spline form needs k >= 4, got {self.k}")
        beta = _frozen_array(self.beta)
        if beta.shape != (self.k,):
            raise StructuralError(f"beta has length {beta.shape[0]}, expected {self.k}")
        object.__setattr__(self, "beta", beta)

    @property
    def knots(self) -> np.ndarray:
        return _pickands_knots(self.k)

    def validate(self) -> ValidationReport:
        b, k = self.beta, self.k
        bad = []
        end = max(abs(b[0] - 1.0), abs(b[-1] - 1.0))
        if end > LINEAR_TOL:
            bad.append(("R10 endpoint values", float(end)))
        over = max(b.max() - 1.0, 0.0)
        if over > LINEAR_TOL:
            bad.append(("R10 upper bound", float(over)))
        # R11 endpoint slopes give vertex masses in [0, 1/2]
        p0 = (b[1] - 1.0) * (k - 2.0) + 0.5
        p1 = (b[-2] - 1.0) * (k - 2.0) + 0.5
        out = max(-min(p0, p1, 0.0), max(p0, p1) - 0.5, 0.0)
        if out > LINEAR_TOL:
            bad.append(("R11 boundary slopes", float(out)))
        conv = [b[2] - 3.0 * b[1] + 2.0 * b[0], 2.0 * b[-1] - 3.0 * b[-2] + b[-3]]
        conv.extend(b[j] - 2.0 * b[j - 1] + b[j - 2] for j in range(3, k - 1))
        neg = -min(min(conv), 0.0)
        if neg > LINEAR_TOL:
            bad.append(("R12 convexity", float(neg)))
        return ValidationReport(not bad, tuple(bad))

    def __call__(self, t: float) -> float:
        spline = BSpline(self.knots, self.beta, 2, extrapolate=False)
        return float(spline(min(max(float(t), 0.0), 1.0)))

    def to_dict(self) -> dict:
        return {"k": self.k, "beta": [float(b) for b in self.beta]}

    @classmethod
    def from_dict(cls, doc: dict) -> "PickandsBS2":
        return cls(int(doc["k"]), doc["beta"])


@dataclass(frozen=True)
class AngularHist2:
    """Bivariate angular cdf as a clamped linear B-spline (order 2)."""

    k: int
    eta: np.ndarray

    def __post_init__(self):
        if self.k < 4:
            raise StructuralError(f"B-spline form needs k >= 4, got {self.k}")
        eta = _frozen_array(self.eta)
        if eta.shape != (self.k - 1,):
            raise StructuralError(f"eta has length {eta.shape[0]}, expected {self.k - 1}")
        object.__setattr__(self, "eta", eta)

    @property
    def knots(self) -> np.ndarray:
        return _hist_knots(self.k)

    def validate(self) -> ValidationReport:
        e, k = self.eta, self.k
        bad = []
        mono = -min(np.diff(e).min(initial=0.0), 0.0)
        rng = max(-e[0], e[-1] - 1.0, 0.0)
        if mono > LINEAR_TOL or rng > LINEAR_TOL:
            bad.append(("R8 monotone values in [0, 1]", float(max(mono, rng))))
        r9 = abs(e[0] + 2.0 * e[1:-1].sum() + e[-1] - (k - 2.0))
        if r9 > LINEAR_TOL:
            bad.append(("R9 mean constraint", float(r9)))
        return ValidationReport(not bad, tuple(bad))

    def __call__(self, t: float) -> float:
        """Angular cdf value; equals 1 at t = 1 (vertex atom included)."""
        t = float(t)
        if t >= 1.0:
            return 1.0
        spline = BSpline(self.knots, self.eta, 1, extrapolate=False)
        return float(spline(max(t, 0.0)))

    def to_dict(self) -> dict:
        return {"k": self.k, "eta": [float(v) for v in self.eta]}

    @classmethod
    def from_dict(cls, doc: dict) -> "AngularHist2":
        return cls(int(doc["k"]), doc["eta"])


def bs_to_pickands2(h: AngularHist2) -> PickandsBS2:
    """Integrate the spline angular cdf into spline Pickands coefficients.

    beta_j = 1 + sum_{i<j} (eta_i - 1/2) (tau_{i+3} - tau_{i+1}) on the
    order-3 knot vector.
    """
    rep = h.validate()
    if not rep.ok:
        raise ConstraintError(f"invalid angular histogram coefficients: {rep.violations}")
    tau = _pickands_knots(h.k)
    beta = np.empty(h.k)
    beta[0] = 1.0
    for j in range(1, h.k):
        beta[j] = beta[j - 1] + (h.eta[j - 1] - 0.5) * (tau[j + 2] - tau[j])
    return PickandsBS2(h.k, beta)


def pickands_bs_to_hist2(p: PickandsBS2) -> AngularHist2:
    """Differentiate spline Pickands coefficients back to the angular cdf."""
    rep = p.validate()
    if not rep.ok:
        raise ConstraintError(f"invalid Pickands spline coefficients: {rep.violations}")
    tau = _hist_knots(p.k)
    eta = np.empty(p.k - 1)
    for j in range(1, p.k):
        eta[j - 1] = 0.5 + (p.beta[j] - p.beta[j - 1]) / (tau[j + 1] - tau[j - 1])
    return AngularHist2(p.k, eta)


# --------------------------------------------------------------------------
# degree elevation
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def elevation_matrix(d: int, k: int) -> np.ndarray:
    """Linear map of interior weights from degree k to degree k+1.

    Row order is the degree-(k+1) grid, columns the degree-k grid; built from
    the identity Dir(t; a) = sum_j (a_j / k) Dir(t; a + e_j).
    """
    lo = multi_index_grid(d, k)
    hi_pos = _grid_positions(d, k + 1)
    mat = np.zeros((len(hi_pos), len(lo)))
    for col, alpha in enumerate(lo.indices):
        for j in range(d):
            up = list(alpha)
            up[j] += 1
            mat[hi_pos[tuple(up)], col] = alpha[j] / k
    mat.setflags(write=False)
    return mat


def degree_elevate(model: AngularBP) -> AngularBP:
    """Re-express the same measure with degree k+1 (density unchanged)."""
    w = elevation_matrix(model.d, model.k) @ model.interior_weight
    return AngularBP(model.d, model.k + 1, model.vertex_mass, w)


# --------------------------------------------------------------------------
# dependence summaries
# --------------------------------------------------------------------------

def _as_pickands_callable(p):
    if isinstance(p, AngularBP):
        if p.d != 2:
            raise DomainError("dependence summaries are bivariate only")
        return lambda t: pickands(p, t)
    if isinstance(p, (PickandsBP2, PickandsBS2)):
        return p
    if callable(p):
        return p
    raise DomainError(f"cannot interpret {type(p).__name__} as a Pickands function")


def dependence_summaries2(p) -> tuple:
    """(extremal coefficient, upper tail dependence, Spearman's rho) for d=2.

    The extremal coefficient is 2 A(1/2), the tail dependence 2 - 2 A(1/2),
    and Spearman's rho is 12 * int (1 + A)^-2 dt - 3 by adaptive quadrature.
    """
    a = _as_pickands_callable(p)
    mid = float(a(0.5))
    integral, _ = quad(lambda t: (1.0 + a(t)) ** -2.0, 0.0, 1.0, epsabs=1e-9, limit=200)
    return 2.0 * mid, 2.0 - 2.0 * mid, 12.0 * integral - 3.0
