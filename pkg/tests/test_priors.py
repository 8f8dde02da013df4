"""Tests for the degree/weights priors and the empirical-Bayes estimators."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from maxstable.angular import validate_bp
from maxstable.errors import (
    ConfigError,
    DomainError,
    InfeasibleWeightsError,
    StructuralError,
)
from maxstable.priors import (
    DegreePrior,
    EBEstimates,
    MarginPriorConfig,
    compute_eb,
    data_prior_log_density,
    degree_log_pmf,
    degree_sample,
    eb_frechet_scale,
    eb_gumbel_loc_scale,
    eb_weibull_loc_scale,
    gumbel_formula,
    prior_config_from_dict,
    weights_log_density,
    weights_sample,
)
from maxstable.simulate import SeededRng


# --------------------------------------------------------------------------
# degree prior
# --------------------------------------------------------------------------

def test_degree_pmf_normalizes():
    prior = DegreePrior(d=3, q=0.7)
    logs = [degree_log_pmf(prior, k) for k in prior.support]
    assert math.isclose(sum(math.exp(v) for v in logs), 1.0, rel_tol=1e-12)


def test_degree_pmf_geometric_at_d2():
    prior = DegreePrior(d=2, q=0.4)
    pmf = np.exp([degree_log_pmf(prior, k) for k in prior.support])
    ratios = pmf[1:] / pmf[:-1]
    assert np.allclose(ratios, math.exp(-0.4), rtol=1e-10)


def test_degree_pmf_tail_bound_d3():
    # the shape-2 truncated pmf keeps a Gaussian-type tail
    prior = DegreePrior(d=3, q=0.2)
    pmf = np.exp([degree_log_pmf(prior, k) for k in prior.support])
    for k in prior.support:
        tail = pmf[k - prior.k_min :].sum()
        assert tail <= 2.0 * math.exp(-0.2 * (k - prior.k_min) ** 2) + 1e-12


def test_degree_defaults_and_validation():
    assert DegreePrior(d=2, q=1.0).k_cap == 40
    assert DegreePrior(d=3, q=1.0).k_cap == 15
    assert DegreePrior(d=2, q=1.0).k_min == 3
    with pytest.raises(StructuralError):
        DegreePrior(d=2, q=0.0)
    with pytest.raises(StructuralError):
        DegreePrior(d=2, q=1.0, k_min=5, k_cap=4)
    with pytest.raises(StructuralError):
        DegreePrior(d=1, q=1.0)


def test_degree_log_pmf_outside_support():
    prior = DegreePrior(d=2, q=1.0, k_cap=9)
    with pytest.raises(DomainError):
        degree_log_pmf(prior, 2)
    with pytest.raises(DomainError):
        degree_log_pmf(prior, 10)


def test_degree_sample_matches_pmf():
    prior = DegreePrior(d=2, q=0.8, k_cap=12)
    gen = SeededRng(7).generator()
    draws = np.array([degree_sample(prior, gen) for _ in range(20000)])
    pmf = np.exp([degree_log_pmf(prior, k) for k in prior.support])
    for k, p in zip(prior.support, pmf):
        freq = float((draws == k).mean())
        se = math.sqrt(p * (1 - p) / len(draws))
        assert abs(freq - p) <= 4 * se + 1e-4


def test_degree_sample_deterministic():
    prior = DegreePrior(d=3, q=0.5)
    a = [degree_sample(prior, SeededRng(3).generator()) for _ in range(5)]
    b = [degree_sample(prior, SeededRng(3).generator()) for _ in range(5)]
    assert a == b


# --------------------------------------------------------------------------
# weights prior
# --------------------------------------------------------------------------

@pytest.mark.parametrize("d,k", [(2, 5), (2, 12), (3, 6)])
def test_weights_sample_feasible(d, k):
    gen = SeededRng(11, stream=d).generator()
    for _ in range(50):
        phi = weights_sample(k, d, gen)
        assert weights_log_density(k, d, phi) == 0.0
        from maxstable.angular import complete_vertex_masses

        assert validate_bp(complete_vertex_masses(phi, k, d)).ok


def test_weights_sample_exhaustion():
    with pytest.raises(InfeasibleWeightsError):
        weights_sample(6, 2, SeededRng(0).generator(), max_attempts=0)


def test_weights_log_density_rejections():
    from maxstable.angular import MultiIndexGrid

    k, d = 5, 2
    size = len(MultiIndexGrid(d, k))
    with pytest.raises(StructuralError):
        weights_log_density(k, d, np.zeros(size + 1))
    neg = np.zeros(size)
    neg[0] = -0.1
    assert weights_log_density(k, d, neg) == -math.inf
    big = np.full(size, 1.0)
    assert weights_log_density(k, d, big) == -math.inf
    # all mass on a corner index overloads one coordinate mean
    corner = np.zeros(size)
    corner[MultiIndexGrid(d, k).position((4, 1))] = 0.9
    assert weights_log_density(k, d, corner) == -math.inf
    assert weights_log_density(k, d, np.zeros(size)) == 0.0


# --------------------------------------------------------------------------
# empirical-Bayes estimators
# --------------------------------------------------------------------------

def test_frechet_scale_hand_example():
    col = np.arange(1.0, 101.0)
    rng = np.random.default_rng(5)
    rng.shuffle(col)
    est = eb_frechet_scale(col[:, None], m=10)
    assert est.sigma_hat.shape == (1,)
    assert est.sigma_hat[0] == 90.0
    assert est.provenance == "frechet-scale"
    assert est.mu_hat is None


def test_frechet_scale_is_scale_equivariant():
    rng = np.random.default_rng(12)
    data = rng.pareto(2.0, size=(500, 2)) + 1.0
    base = eb_frechet_scale(data, m=20)
    scaled = eb_frechet_scale(3.5 * data, m=20)
    assert np.allclose(scaled.sigma_hat, 3.5 * base.sigma_hat, rtol=1e-14)


def test_frechet_scale_validation():
    with pytest.raises(DomainError):
        eb_frechet_scale(np.ones((50, 2)), m=1)
    with pytest.raises(DomainError):
        eb_frechet_scale(np.ones((3, 2)), m=10)
    with pytest.raises(DomainError):
        eb_frechet_scale(np.array([[1.0], [0.0], [2.0]]), m=2)
    with pytest.raises(DomainError):
        eb_frechet_scale(np.ones(10), m=2)


def test_gumbel_hand_example():
    data = np.array([[1.0], [2.0], [3.0], [4.0]])
    est = eb_gumbel_loc_scale(data, m=2)
    assert est.mu_hat[0] == 2.0
    # survival integral above 2 is (1 + 2) / 4, scaled by m
    assert math.isclose(est.sigma_hat[0], 1.5, rel_tol=1e-15)
    assert not est.degenerate


def test_gumbel_formula_exact_on_fractions():
    mu, sigma = gumbel_formula(math.log(7.0), Fraction(1, 7), 7)
    assert mu == math.log(7.0)
    assert isinstance(sigma, Fraction)
    assert sigma == 1


def test_gumbel_location_scale_equivariance():
    rng = np.random.default_rng(3)
    data = rng.exponential(size=(800, 2))
    base = eb_gumbel_loc_scale(data, m=25)
    moved = eb_gumbel_loc_scale(2.0 * data + 7.0, m=25)
    assert np.allclose(moved.mu_hat, 2.0 * base.mu_hat + 7.0, rtol=1e-12)
    assert np.allclose(moved.sigma_hat, 2.0 * base.sigma_hat, rtol=1e-12)


def test_gumbel_degenerate_flag():
    est = eb_gumbel_loc_scale(np.ones((40, 1)), m=4)
    assert est.degenerate
    assert est.sigma_hat[0] == 0.0


def test_gumbel_rows_order_invariant():
    rng = np.random.default_rng(9)
    data = rng.exponential(size=(600, 3))
    est = eb_gumbel_loc_scale(data, m=12)
    perm = rng.permutation(len(data))
    again = eb_gumbel_loc_scale(data[perm], m=12)
    assert np.array_equal(est.mu_hat, again.mu_hat)
    assert np.allclose(est.sigma_hat, again.sigma_hat, rtol=1e-12)


def test_weibull_hand_example():
    data = np.array([[1.0], [2.0], [3.0], [4.0]])
    est = eb_weibull_loc_scale(data, m=2)
    # independent arithmetic: baseline Z_(2)=2, spacings log(3/2), log(4/2)
    s = np.array([math.log(1.5), math.log(2.0)])
    xi1 = s.mean()
    xi2 = (s**2).mean()
    gm = (xi2 - 2 * xi1**2) / (2 * (xi2 - xi1**2))
    sigma = 2.0 * xi1 * (1 - gm) / (-gm)
    assert math.isclose(est.sigma_hat[0], sigma, rel_tol=1e-12)
    assert math.isclose(est.mu_hat[0], 2.0 + sigma, rel_tol=1e-12)
    assert est.provenance == "weibull"


def test_weibull_gamma_override():
    data = np.array([[1.0], [2.0], [3.0], [4.0]])
    est = eb_weibull_loc_scale(data, m=2, gamma_hat=-1.0)
    s = np.array([math.log(1.5), math.log(2.0)])
    xi1 = s.mean()
    xi2 = (s**2).mean()
    gm = (xi2 - 2 * xi1**2) / (2 * (xi2 - xi1**2))
    assert math.isclose(est.sigma_hat[0], 2.0 * xi1 * (1 - gm), rel_tol=1e-12)


def test_weibull_scale_equivariance_and_trim():
    rng = np.random.default_rng(21)
    data = 5.0 - rng.power(3.0, size=(1003, 2))  # short upper tail at 5
    base = eb_weibull_loc_scale(data[:1000], m=10)
    scaled = eb_weibull_loc_scale(4.0 * data[:1000], m=10)
    assert np.allclose(scaled.sigma_hat, 4.0 * base.sigma_hat, rtol=1e-12)
    assert np.allclose(scaled.mu_hat, 4.0 * base.mu_hat, rtol=1e-12)
    # rows beyond the last full block are ignored
    trimmed = eb_weibull_loc_scale(data, m=10)
    assert np.array_equal(trimmed.sigma_hat, base.sigma_hat)


def test_weibull_recovers_short_tail_endpoint():
    rng = np.random.default_rng(4)
    data = 3.0 - rng.power(2.0, size=(200000, 1))
    est = eb_weibull_loc_scale(data, m=100)
    assert abs(est.mu_hat[0] - 3.0) < 0.01


def test_weibull_degenerate_and_domain_errors():
    flat = np.array([[1.0], [2.0], [2.0], [2.0]])
    with pytest.raises(DomainError):
        eb_weibull_loc_scale(flat, m=2)
    heavy = np.array([[1.0], [2.0], [2.0], [8.0]])
    with pytest.raises(DomainError):
        eb_weibull_loc_scale(heavy, m=2)
    with pytest.raises(DomainError):
        eb_weibull_loc_scale(np.array([[-1.0], [-0.5], [-0.2], [-0.1]]), m=2)
    with pytest.raises(DomainError):
        eb_weibull_loc_scale(np.array([[1.0], [2.0], [3.0]]), m=2)


def test_compute_eb_dispatch():
    data = np.arange(1.0, 101.0)[:, None]
    assert compute_eb("frechet-scale", data, 10).provenance == "frechet-scale"
    assert compute_eb("gumbel", data, 10).provenance == "gumbel"
    with pytest.raises(ConfigError):
        compute_eb("cauchy", data, 10)


# --------------------------------------------------------------------------
# margin priors
# --------------------------------------------------------------------------

def _frechet_cfg():
    return MarginPriorConfig(
        family="frechet", estimates=EBEstimates(sigma_hat=[2.0, 4.0])
    )


def test_margin_prior_config_validation():
    est = EBEstimates(sigma_hat=[1.0], mu_hat=[0.0])
    with pytest.raises(ConfigError):
        MarginPriorConfig(family="cauchy", estimates=est)
    with pytest.raises(ConfigError):
        MarginPriorConfig(family="frechet", estimates=EBEstimates(sigma_hat=[-1.0]))
    with pytest.raises(ConfigError):
        MarginPriorConfig(family="gumbel", estimates=EBEstimates(sigma_hat=[1.0]))
    with pytest.raises(ConfigError):
        MarginPriorConfig(family="weibull", estimates=est)
    with pytest.raises(ConfigError):
        MarginPriorConfig(family="weibull", estimates=est, shape_bounds=(0.5, 3.0))
    with pytest.raises(ConfigError):
        MarginPriorConfig(family="gumbel", estimates=est, shape_bounds=(1.5, 3.0))
    MarginPriorConfig(family="weibull", estimates=est, shape_bounds=(1.5, 3.0))


def test_frechet_prior_log_density_hand_value():
    cfg = _frechet_cfg()
    theta = {"shape": [1.5, 1.5], "scale": [3.0, 2.0]}
    shape_term = 2 * (math.log(4) + math.log(1.5) - 2 * 1.5)
    scale_term = (
        math.log(4) + math.log(1.5) - 3.0 - math.log(2.0)
        + math.log(4) + math.log(0.5) - 1.0 - math.log(4.0)
    )
    got = data_prior_log_density(cfg, theta)
    assert math.isclose(got, shape_term + scale_term, rel_tol=1e-12)


def test_prior_log_density_rejects_bad_parameters():
    cfg = _frechet_cfg()
    assert data_prior_log_density(cfg, {"shape": [1.0, 1.0], "scale": [1.0, -1.0]}) == -math.inf
    assert data_prior_log_density(cfg, {"shape": [0.0, 1.0], "scale": [1.0, 1.0]}) == -math.inf
    wb = MarginPriorConfig(
        family="weibull",
        estimates=EBEstimates(sigma_hat=[1.0], mu_hat=[0.0]),
        shape_bounds=(1.5, 3.0),
    )
    theta = {"shape": [4.0], "scale": [1.0], "loc": [0.0]}
    assert data_prior_log_density(wb, theta) == -math.inf
    theta["shape"] = [2.0]
    assert np.isfinite(data_prior_log_density(wb, theta))


def test_gumbel_prior_normalizes():
    cfg = MarginPriorConfig(
        family="gumbel", estimates=EBEstimates(sigma_hat=[2.0], mu_hat=[1.0])
    )

    def dens(scale, loc):
        return math.exp(data_prior_log_density(cfg, {"scale": [scale], "loc": [loc]}))

    total, err = integrate.dblquad(dens, -80.0, 80.0, 0.0, 60.0, epsabs=1e-9)
    assert abs(total - 1.0) < 1e-6


def test_prior_centered_on_estimates():
    # the scale kernel has its mode at sigma_hat / 2 and mean at sigma_hat
    cfg = MarginPriorConfig(
        family="gumbel", estimates=EBEstimates(sigma_hat=[2.0], mu_hat=[5.0])
    )
    at_center = data_prior_log_density(cfg, {"scale": [1.0], "loc": [5.0]})
    off_center = data_prior_log_density(cfg, {"scale": [1.0], "loc": [9.0]})
    assert at_center > off_center


# --------------------------------------------------------------------------
# config document parsing
# --------------------------------------------------------------------------

def test_prior_config_from_dict_roundtrip():
    doc = {
        "degree": {"q": 0.3, "k_cap": 9},
        "margins": {"family": "frechet"},
        "eb": {"estimator": "frechet-scale", "m": 10},
    }
    cfg = prior_config_from_dict(doc, d=2)
    assert cfg.degree.k_cap == 9
    assert cfg.family == "frechet"
    data = np.arange(1.0, 101.0)[:, None]
    margin_cfg = cfg.margin_config(data)
    assert margin_cfg.estimates.sigma_hat[0] == 90.0


def test_prior_config_defaults_to_simple():
    cfg = prior_config_from_dict({}, d=3)
    assert cfg.family is None
    assert cfg.degree.k_min == 4
    with pytest.raises(ConfigError):
        cfg.margin_config(np.ones((10, 3)))


def test_prior_config_rejections():
    with pytest.raises(ConfigError):
        prior_config_from_dict([], d=2)
    with pytest.raises(ConfigError):
        prior_config_from_dict({"degree": {"q": -1.0}}, d=2)
    with pytest.raises(ConfigError):
        prior_config_from_dict({"margins": {"family": "cauchy"}}, d=2)
    with pytest.raises(ConfigError):
        prior_config_from_dict({"margins": {"family": "gumbel"}}, d=2)
    with pytest.raises(ConfigError):
        prior_config_from_dict(
            {"margins": {"family": "weibull"}, "eb": {"estimator": "weibull", "m": 5}},
            d=2,
        )
