import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from igdyn.errors import DimensionMismatch, DomainError, PriorTooNarrow, QuadratureNotConverged
from igdyn.models import (
    CorrelatedGaussianModel,
    GaussianPairModel,
    GaussianProductModel,
    JacobiIHOModel,
    build_model,
    fisher_rao_numeric,
    metric_at,
    pdf,
    relative_entropy,
)


def test_gaussian_block_at_sigma_two():
    m = GaussianProductModel(1)
    g = metric_at(m, [0.0, 2.0, 1.0, 1.0, -1.0, 1.0]).components
    np.testing.assert_allclose(g[:2, :2], np.diag([0.25, 0.5]))
    np.testing.assert_allclose(g[2:4, 2:4], np.diag([1.0, 2.0]))
    assert np.count_nonzero(g - np.diag(np.diag(g))) == 0


def test_correlated_decouples_at_zero_correlation():
    g = metric_at(CorrelatedGaussianModel(0.0), [0.3, 1.0, -0.2, 1.0]).components
    np.testing.assert_array_equal(g, np.diag([1.0, 2.0, 1.0, 2.0]))


def test_correlated_blocks_match_pairs_at_zero_correlation():
    theta = [0.3, 1.7, -0.2, 0.6]
    g = metric_at(CorrelatedGaussianModel(0.0), theta).components
    pair = GaussianPairModel()
    np.testing.assert_allclose(g[:2, :2], pair.metric(theta[:2]), rtol=1e-15)
    np.testing.assert_allclose(g[2:, 2:], pair.metric(theta[2:]), rtol=1e-15)
    assert not g[:2, 2:].any()


def test_iho_metric_identity_at_origin():
    np.testing.assert_array_equal(metric_at(JacobiIHOModel((1.0, 1.0)), [0.0, 0.0]).components, np.eye(2))


def test_iho_determinant_is_power_of_conformal_factor():
    m = JacobiIHOModel((0.5, 1.5, 2.0))
    theta = np.array([0.3, -1.0, 0.7])
    assert metric_at(m, theta).det == pytest.approx(m.conformal_factor(theta) ** 3, rel=1e-12)


@pytest.mark.parametrize("coords", [[0.0, -1.0], [0.0, 0.0]])
def test_nonpositive_sigma_rejected(coords):
    with pytest.raises(DomainError):
        metric_at(GaussianPairModel(), coords)


def test_wrong_length_rejected():
    with pytest.raises(DimensionMismatch):
        metric_at(GaussianProductModel(1), [0.0, 1.0])


@pytest.mark.parametrize("r", [1.0, -1.0, 1.5])
def test_correlation_outside_open_interval_rejected(r):
    with pytest.raises(DomainError):
        CorrelatedGaussianModel(r)


def test_pdf_examples():
    assert pdf(GaussianPairModel(), [0.5], [0.5, 1.0]) == pytest.approx(1 / np.sqrt(2 * np.pi))
    m = CorrelatedGaussianModel(0.5)
    assert pdf(m, [1.0, 2.0], [1.0, 1.0, 2.0, 1.0]) == pytest.approx(1 / (2 * np.pi * np.sqrt(0.75)))
    m0 = CorrelatedGaussianModel(0.0)
    theta = [0.1, 0.8, -0.4, 1.3]
    x = [0.5, 0.2]
    pair = GaussianPairModel()
    expected = pdf(pair, [x[0]], theta[:2]) * pdf(pair, [x[1]], theta[2:])
    assert pdf(m0, x, theta) == pytest.approx(expected, rel=1e-12)


def test_pdf_normalised():
    total, _ = integrate.quad(lambda x: pdf(GaussianPairModel(), [x], [0.4, 1.7]), -np.inf, np.inf,
                              epsabs=1e-13)
    assert abs(total - 1) < 1e-9
    m = CorrelatedGaussianModel(0.6)
    theta = [0.0, 1.0, 0.5, 0.7]
    total, _ = integrate.dblquad(lambda y, x: pdf(m, [x, y], theta), -12, 12, -12, 12,
                                 epsabs=1e-12, epsrel=1e-12)
    assert abs(total - 1) < 1e-9


def test_pdf_undefined_for_oscillators():
    with pytest.raises(TypeError):
        pdf(JacobiIHOModel((1.0,)), [0.0], [0.0])


@pytest.mark.parametrize("sigma,diag", [(2.0, [0.25, 0.5]), (1.0, [1.0, 2.0])])
def test_fisher_numeric_pair(sigma, diag):
    g = fisher_rao_numeric(GaussianPairModel(), [0.7, sigma]).components
    np.testing.assert_allclose(g, np.diag(diag), atol=1e-10)


def test_fisher_numeric_correlated():
    m = CorrelatedGaussianModel(0.5)
    theta = [0.2, 1.0, -0.3, 1.0]
    np.testing.assert_allclose(fisher_rao_numeric(m, theta).components,
                               metric_at(m, theta).components, atol=1e-8)


def test_fisher_numeric_order_guard():
    with pytest.raises(ValueError):
        fisher_rao_numeric(GaussianPairModel(), [0.0, 1.0], quadrature_order=10)


def test_fisher_numeric_convergence_failure_is_reported():
    with pytest.raises(QuadratureNotConverged):
        fisher_rao_numeric(CorrelatedGaussianModel(0.99), [0.0, 1.0, 0.0, 1.0], tol=1e-18)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["gaussian_product", "correlated_gaussian", "iho"]), st.integers(0, 10**6))
def test_metric_symmetric_positive_definite(kind, seed):
    model = {"gaussian_product": GaussianProductModel(2),
             "correlated_gaussian": CorrelatedGaussianModel(-0.4),
             "iho": JacobiIHOModel((0.3, 1.1))}[kind]
    g = metric_at(model, model.random_point(np.random.default_rng(seed))).components
    np.testing.assert_allclose(g, g.T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(g) > 0)


def test_relative_entropy_sigma_doubling_adds_log_two():
    m = GaussianPairModel()
    s1 = relative_entropy(m, [0.0, 1.0], prior_width=40.0)
    s2 = relative_entropy(m, [0.0, 2.0], prior_width=40.0)
    assert s2 - s1 == pytest.approx(np.log(2.0), abs=1e-9)


def test_relative_entropy_zero_perturbation_is_identity():
    m = GaussianPairModel()
    assert relative_entropy(m, [0.3, 1.2], perturbation=0.0) == relative_entropy(m, [0.3, 1.2])


@pytest.mark.parametrize("eps", [1e-2, -1e-2])
def test_gaussian_is_entropy_maximiser(eps):
    for model, theta in [(GaussianPairModel(), [0.3, 1.2]),
                         (CorrelatedGaussianModel(0.4), [0.0, 1.0, 0.5, 0.8])]:
        base = relative_entropy(model, theta)
        assert relative_entropy(model, theta, perturbation=eps) < base


def test_prior_too_narrow():
    with pytest.raises(PriorTooNarrow):
        relative_entropy(GaussianPairModel(), [0.0, 1.0], prior_width=5.0)


def test_build_model_from_config():
    assert build_model({"model": "gaussian_product", "n_particles": 2}).dim == 12
    assert build_model({"model": "correlated_gaussian", "r": 0.2}).r == 0.2
    assert build_model({"model": "iho", "frequencies": [1, 2]}).frequencies == (1.0, 2.0)
    with pytest.raises(DomainError):
        build_model({"model": "nope"})
