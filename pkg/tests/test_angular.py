import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maxstable.angular import (
    AngularBP,
    AngularHist2,
    MultiIndexGrid,
    PickandsBP2,
    PickandsBS2,
    angular_density,
    angular_mean,
    angular_mean_numeric,
    bp_pickands_to_weights2,
    bs_to_pickands2,
    complete_vertex_masses,
    degree_elevate,
    dependence_summaries2,
    elevation_matrix,
    independence_model,
    pickands,
    pickands_bs_to_hist2,
    uniform_model,
    validate_bp,
    weights_to_pickands2,
)
from maxstable.errors import (
    ConstraintError,
    DomainError,
    InfeasibleWeightsError,
    StructuralError,
)

import _oracles as O
from conftest import make_model


# --------------------------------------------------------------------------
# grid
# --------------------------------------------------------------------------

def test_grid_sizes_match_simplex_lattice_counts():
    assert len(MultiIndexGrid(2, 2)) == 1
    assert len(MultiIndexGrid(2, 5)) == 4
    assert len(MultiIndexGrid(3, 3)) == 1
    assert len(MultiIndexGrid(3, 6)) == math.comb(5, 2)
    grid = MultiIndexGrid(3, 5)
    for alpha in grid.indices:
        assert sum(alpha) == 5 and min(alpha) >= 1
        assert grid.indices[grid.position(alpha)] == alpha


def test_grid_rejects_degree_below_dimension():
    with pytest.raises(StructuralError):
        MultiIndexGrid(3, 2)
    with pytest.raises(StructuralError):
        MultiIndexGrid(1, 5)


# --------------------------------------------------------------------------
# validation and completion
# --------------------------------------------------------------------------

@pytest.mark.parametrize("d,k", [(2, 2), (2, 7), (3, 3), (3, 6)])
def test_random_completed_models_validate(d, k):
    model = make_model(d, k, seed=d * 100 + k)
    report = validate_bp(model)
    assert report.ok, report.violations
    assert np.allclose(angular_mean(model), 1.0 / d, atol=1e-12)


def test_validate_flags_broken_total_mass():
    model = AngularBP(2, 2, [0.2, 0.2], [0.7])
    report = validate_bp(model)
    assert not report.ok
    assert any("R1" in name for name, _ in report.violations)


def test_validate_flags_broken_coordinate_means():
    # total mass one but means skewed away from 1/2
    model = AngularBP(2, 3, [0.3, 0.0], [0.7, 0.0])
    report = validate_bp(model)
    assert not report.ok
    assert any("R2" in name for name, _ in report.violations)


def test_validate_flags_negative_weights_and_vertex_range():
    report = validate_bp(AngularBP(2, 3, [0.6, -0.1], [0.25, 0.25]))
    names = [name for name, _ in report.violations]
    assert any("vertex" in n for n in names)


def test_completion_means_exact():
    for d, k, seed in [(2, 5, 1), (3, 7, 2), (3, 4, 3)]:
        model = make_model(d, k, seed)
        assert np.allclose(angular_mean(model), 1.0 / d, atol=1e-14)
        numeric = angular_mean_numeric(model)
        assert np.allclose(numeric, 1.0 / d, atol=1e-7)


def test_completion_rejects_infeasible_weights():
    # all weight on one corner index forces a negative vertex mass
    grid = MultiIndexGrid(2, 6)
    w = np.zeros(len(grid))
    w[grid.position((5, 1))] = 1.0
    with pytest.raises(InfeasibleWeightsError):
        complete_vertex_masses(w, 6, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 3), st.integers(0, 6))
def test_completion_means_property(seed, d, extra):
    model = make_model(d, d + extra + (1 if d == 2 else 0), seed)
    assert validate_bp(model).ok
    assert np.allclose(angular_mean(model), 1.0 / d, atol=1e-12)


# --------------------------------------------------------------------------
# density and means
# --------------------------------------------------------------------------

def test_uniform_density_is_flat():
    u = uniform_model()
    for t in (0.1, 0.33, 0.9):
        assert angular_density(u, t) == pytest.approx(1.0, abs=1e-14)


def test_density_matches_oracle_mixture():
    model = make_model(3, 6, seed=9)
    pts = np.array([[0.2, 0.3], [0.5, 0.1], [0.05, 0.9]])
    for t in pts:
        full = np.array([t[0], t[1], 1.0 - t.sum()])
        assert angular_density(model, t) == pytest.approx(
            float(O.mixture_density(model, full)[0]), rel=1e-12
        )


def test_density_rejects_boundary():
    with pytest.raises(DomainError):
        angular_density(uniform_model(), 0.0)
    with pytest.raises(DomainError):
        angular_density(make_model(3, 5, 1), (0.5, 0.5))


# --------------------------------------------------------------------------
# Pickands function
# --------------------------------------------------------------------------

def test_pickands_uniform_closed_form():
    u = uniform_model()
    for t in np.linspace(0.0, 1.0, 11):
        assert pickands(u, [t]) == pytest.approx(1.0 - t + t * t, abs=1e-14)


def test_pickands_independence_is_one():
    for d in (2, 3):
        model = independence_model(d)
        for _ in range(5):
            t = np.random.default_rng(_).dirichlet(np.ones(d))[: d - 1]
            assert pickands(model, t) == pytest.approx(1.0, abs=1e-12)


def test_pickands_envelope_and_endpoints():
    model = make_model(2, 6, seed=4)
    assert pickands(model, [0.0]) == pytest.approx(1.0, abs=1e-14)
    assert pickands(model, [1.0]) == pytest.approx(1.0, abs=1e-14)
    for t in np.linspace(0.01, 0.99, 21):
        val = pickands(model, [t])
        assert max(t, 1.0 - t) - 1e-12 <= val <= 1.0 + 1e-12


def test_pickands_matches_quadrature_oracle():
    model = make_model(2, 7, seed=11)
    for t in (0.15, 0.5, 0.85):
        assert pickands(model, [t]) == pytest.approx(
            O.pickands_numeric2(model, t), abs=1e-12
        )


def test_pickands_convex_on_grid():
    model = make_model(2, 9, seed=5)
    grid = np.linspace(0.0, 1.0, 101)
    vals = np.array([pickands(model, [t]) for t in grid])
    second = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
    assert second.min() > -1e-10


def test_pickands_trivariate_oracle():
    model = make_model(3, 5, seed=8)
    y = np.array([0.8, 1.4, 0.6])
    r = float((1.0 / y).sum())
    c = (1.0 / y) / r
    val = model.d * O.exponent_v_numeric(model, y) / (model.d * r)
    assert pickands(model, c[1:]) == pytest.approx(val, abs=5e-5)


# --------------------------------------------------------------------------
# conversions, d=2
# --------------------------------------------------------------------------

def test_uniform_maps_to_known_bernstein_coefficients():
    p = weights_to_pickands2(uniform_model())
    assert p.k == 2
    assert np.allclose(p.beta, [1.0, 0.5, 1.0], atol=1e-15)
    assert p.validate().ok


def test_bp_roundtrip_is_identity():
    for seed in range(6):
        model = make_model(2, 4 + seed, seed=seed)
        p = weights_to_pickands2(model)
        assert p.validate().ok, p.validate().violations
        back = bp_pickands_to_weights2(p)
        assert back.k == model.k
        assert np.allclose(back.vertex_mass, model.vertex_mass, atol=1e-12)
        assert np.allclose(back.interior_weight, model.interior_weight, atol=1e-12)


def test_bp_coefficients_evaluate_to_pickands():
    model = make_model(2, 6, seed=13)
    p = weights_to_pickands2(model)
    for t in (0.2, 0.5, 0.9):
        assert p(t) == pytest.approx(pickands(model, [t]), abs=1e-12)


def test_invalid_bernstein_coefficients_rejected():
    concave = PickandsBP2(3, [1.0, 0.7, 0.95, 1.0])
    assert not concave.validate().ok
    with pytest.raises(ConstraintError):
        bp_pickands_to_weights2(concave)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_bp_roundtrip_property(seed, k):
    model = make_model(2, k, seed)
    back = bp_pickands_to_weights2(weights_to_pickands2(model))
    assert np.allclose(back.interior_weight, model.interior_weight, atol=1e-10)
    assert np.allclose(back.vertex_mass, model.vertex_mass, atol=1e-10)


def test_spline_hist_of_uniform_measure():
    k = 7
    # linear spline coefficients of the identity cdf are the knot values
    eta = np.concatenate([[0.0], np.arange(1, k - 2) / (k - 2), [1.0]])
    hist = AngularHist2(k, eta)
    assert hist.validate().ok
    p = bs_to_pickands2(hist)
    assert p.validate().ok
    for t in np.linspace(0.0, 1.0, 17):
        assert p(t) == pytest.approx(1.0 - t + t * t, abs=1e-13)


def test_spline_roundtrip_is_identity():
    rng = np.random.default_rng(17)
    for k in (4, 6, 11):
        # monotone coefficients in [0, 1] with the mean pinned by shifting
        raw = np.sort(rng.uniform(0.0, 1.0, size=k - 1))
        raw[0], raw[-1] = 0.0, 1.0
        # project onto the mean constraint by a convex pull toward identity
        ident = np.concatenate([[0.0], np.arange(1, k - 2) / (k - 2), [1.0]])
        target = k - 2.0
        def total(v):
            return v[0] + 2.0 * v[1:-1].sum() + v[-1]
        lam = (target - total(raw)) / (total(ident) - total(raw)) if total(ident) != total(raw) else 0.0
        lam = min(max(lam, 0.0), 1.0)
        eta = (1.0 - lam) * raw + lam * ident
        if abs(total(eta) - target) > 1e-12:
            continue
        hist = AngularHist2(k, eta)
        assert hist.validate().ok, hist.validate().violations
        back = pickands_bs_to_hist2(bs_to_pickands2(hist))
        assert np.allclose(back.eta, hist.eta, atol=1e-12)


def test_spline_validation_rejects_nonmonotone_hist():
    eta = np.array([0.0, 0.6, 0.4, 1.0, 1.0])
    bad = AngularHist2(6, eta)
    assert not bad.validate().ok
    with pytest.raises(ConstraintError):
        bs_to_pickands2(bad)


# --------------------------------------------------------------------------
# degree elevation
# --------------------------------------------------------------------------

def test_elevation_matrix_columns_are_stochastic():
    for d, k in [(2, 3), (3, 5)]:
        mat = elevation_matrix(d, k)
        assert np.allclose(mat.sum(axis=0), 1.0, atol=1e-14)


@pytest.mark.parametrize("d,k", [(2, 4), (3, 5)])
def test_elevation_preserves_measure(d, k):
    model = make_model(d, k, seed=23)
    lifted = degree_elevate(model)
    assert lifted.k == k + 1
    assert validate_bp(lifted).ok
    rng = np.random.default_rng(5)
    for _ in range(10):
        w = rng.dirichlet(np.ones(d))
        t = w[: d - 1]
        assert angular_density(lifted, t) == pytest.approx(
            angular_density(model, t), rel=1e-12
        )
    if d == 2:
        for t in (0.25, 0.6):
            assert pickands(lifted, [t]) == pytest.approx(pickands(model, [t]), abs=1e-13)


# --------------------------------------------------------------------------
# dependence summaries
# --------------------------------------------------------------------------

def test_summaries_uniform():
    theta, chi, rho = dependence_summaries2(uniform_model())
    assert theta == pytest.approx(1.5, abs=1e-12)
    assert chi == pytest.approx(0.5, abs=1e-12)
    assert rho == pytest.approx(O.SPEARMAN_UNIFORM2, abs=1e-9)


def test_summaries_independence():
    theta, chi, rho = dependence_summaries2(independence_model(2))
    assert theta == pytest.approx(2.0, abs=1e-12)
    assert chi == pytest.approx(0.0, abs=1e-12)
    assert rho == pytest.approx(0.0, abs=1e-8)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def test_angular_json_roundtrip():
    model = make_model(3, 6, seed=31)
    doc = json.loads(model.to_json())
    back = AngularBP.from_json(json.dumps(doc))
    assert back.d == model.d and back.k == model.k
    assert np.array_equal(back.vertex_mass, model.vertex_mass)
    assert np.array_equal(back.interior_weight, model.interior_weight)


def test_angular_from_dict_rejects_bad_alpha():
    doc = uniform_model().to_dict()
    doc["interior"][0]["alpha"] = [3, 1]
    with pytest.raises(StructuralError):
        AngularBP.from_dict(doc)


def test_arrays_are_frozen():
    model = uniform_model()
    with pytest.raises(ValueError):
        model.vertex_mass[0] = 0.3
