import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from igdyn import geometry as G
from igdyn.errors import BoundaryTooClose, DegeneratePlane, SingularMetric
from igdyn.iho import ricci_scalar_iho_2set
from igdyn.models import CorrelatedGaussianModel, GaussianPairModel, GaussianProductModel, JacobiIHOModel

FD = G.Backend.FINITE_DIFF


def test_pair_christoffel_symbols():
    s = 1.7
    gamma = G.christoffel(GaussianPairModel(), [0.4, s])
    expected = np.zeros((2, 2, 2))
    expected[0, 0, 1] = expected[0, 1, 0] = -1 / s
    expected[1, 0, 0] = 1 / (2 * s)
    expected[1, 1, 1] = -1 / s
    np.testing.assert_allclose(gamma, expected, atol=1e-15)


def test_flat_metric_has_no_connection_or_curvature():
    e = G.euclidean(3)
    b = G.curvature(e, [0.1, 0.2, 0.3])
    assert not b.christoffel.any() and not b.riemann.any()
    assert G.sectional_curvature(e, [0, 0, 0], [1, 0, 0], [0, 1, 1]) == 0.0
    assert G.weyl_projective(e, [0, 0, 0]).max_abs == 0.0


def test_oscillator_christoffel_backends_agree():
    m = JacobiIHOModel((1.0, 1.0))
    np.testing.assert_allclose(G.christoffel(m, [1.0, 0.0], FD, 1e-4),
                               G.christoffel(m, [1.0, 0.0]), atol=1e-6)


def test_christoffel_lower_symmetry_and_riemann_antisymmetry():
    m = CorrelatedGaussianModel(0.3)
    b = G.curvature(m, [0.1, 1.2, -0.5, 0.8])
    np.testing.assert_allclose(b.christoffel, np.swapaxes(b.christoffel, 1, 2), atol=1e-14)
    np.testing.assert_allclose(b.riemann, -np.swapaxes(b.riemann, 2, 3), atol=1e-13)


def test_first_bianchi_identity():
    m = JacobiIHOModel((0.7, 1.3, 0.4))
    low = G.curvature(m, [0.5, -0.3, 1.1]).riemann_lowered
    cyc = low + np.transpose(low, (0, 2, 3, 1)) + np.transpose(low, (0, 3, 1, 2))
    assert np.abs(cyc).max() < 1e-12 * max(1.0, np.abs(low).max())


@pytest.mark.parametrize("N", [1, 4])
def test_product_scalar_curvature(N):
    m = GaussianProductModel(N)
    p = m.random_point(np.random.default_rng(N))
    assert G.ricci_scalar(m, p) == pytest.approx(-3 * N, abs=1e-10)
    assert G.ricci_scalar(m, p, FD) == pytest.approx(-3 * N, abs=1e-6)


def test_pair_scalar_and_section():
    # one (mu, sigma) factor is a hyperbolic plane of curvature -1/2
    m = GaussianPairModel()
    assert G.ricci_scalar(m, [0.0, 1.0]) == pytest.approx(-1.0, abs=1e-12)
    assert G.sectional_curvature(m, [0.0, 1.0], [1, 0], [0, 1]) == pytest.approx(-0.5, abs=1e-12)


def test_double_trace_matches_scalar():
    for model, theta in [(GaussianPairModel(), [0.0, 1.0]),
                         (JacobiIHOModel((1.0, 1.0)), [1.0, 1.0]),
                         (CorrelatedGaussianModel(0.7), [0.0, 1.0, 0.0, 2.0])]:
        b = G.curvature(model, theta)
        assert b.double_trace() == pytest.approx(b.scalar, abs=1e-10)
    b = G.curvature(JacobiIHOModel((1.0, 1.0)), [1.0, 1.0])
    assert b.double_trace() == pytest.approx(ricci_scalar_iho_2set(1, 1, 1, 1), abs=1e-6)


def test_sectional_sum_reproduces_scalar():
    m = GaussianProductModel(1)
    p = m.random_point(np.random.default_rng(3))
    assert G.sectional_sum(m, p) == pytest.approx(-3.0, abs=1e-10)
    c = CorrelatedGaussianModel(0.5)
    q = c.point([0.1, 0.9, 0.4, 1.4])
    assert G.sectional_sum(c, q) == pytest.approx(G.ricci_scalar(c, q), abs=1e-10)


def test_correlated_scalar_is_point_independent():
    m = CorrelatedGaussianModel(0.5)
    rng = np.random.default_rng(0)
    vals = [G.ricci_scalar(m, m.random_point(rng)) for _ in range(10)]
    assert np.ptp(vals) < 1e-10


def test_correlated_closed_form_reference_values():
    assert G.correlated_ricci_closed_form(0.5) == pytest.approx(-2.4375)
    assert G.correlated_ricci_closed_form(0.0) == -2.0


def test_sectional_curvature_basis_independent():
    m = CorrelatedGaussianModel(0.3)
    p = [0.0, 1.1, 0.3, 0.7]
    u, v = np.array([1.0, 0.2, 0.0, 0.5]), np.array([0.0, 1.0, 0.3, -0.2])
    k1 = G.sectional_curvature(m, p, u, v)
    k2 = G.sectional_curvature(m, p, 2 * u + v, u - 3 * v)
    assert k1 == pytest.approx(k2, rel=1e-10)


def test_degenerate_plane():
    with pytest.raises(DegeneratePlane):
        G.sectional_curvature(GaussianPairModel(), [0.0, 1.0], [1.0, 2.0], [2.0, 4.0])


def test_constant_curvature_fixtures():
    s = G.sphere(2.0)
    assert G.sectional_curvature(s, [1.0, 0.3], [1, 0], [0, 1]) == pytest.approx(0.25)
    assert G.weyl_projective(s, [1.0, 0.3]).max_abs < 1e-8
    h = G.hyperbolic_plane(-4.0)
    assert G.sectional_curvature(h, [0.2, 1.5], [1, 0], [0, 1]) == pytest.approx(-4.0)
    assert G.weyl_projective(h, [0.2, 1.5]).max_abs < 1e-8


def test_weyl_nonzero_on_gaussian_product():
    m = GaussianProductModel(1)
    assert G.weyl_projective(m, np.tile([0.0, 1.0], 3)).max_abs > 0.1


def test_killing_residuals():
    e = G.euclidean(2)
    assert np.abs(G.killing_residual(e, [0.3, 0.1], lambda x: np.array([1.0, -2.0]))).max() < 1e-12
    m = GaussianPairModel()
    p = [0.3, 1.2]
    assert np.abs(G.killing_residual(m, p, G.VectorField(2, lambda x: np.array([1.0, 0.0])))).max() < 1e-12
    # dilations (mu, sigma) -> c (mu, sigma) are isometries of the half-plane
    assert np.abs(G.killing_residual(m, p, lambda x: x.copy())).max() < 1e-8
    assert np.abs(G.killing_residual(m, p, lambda x: np.array([0.0, 1.0]))).max() > 0.1


def test_finite_difference_boundary_guard():
    with pytest.raises(BoundaryTooClose):
        G.ricci_scalar(GaussianPairModel(), [0.0, 2e-6], FD)


def test_singular_metric():
    field = G.MetricField(2, lambda th: np.diag([1.0, 0.0]),
                          lambda th: (np.diag([1.0, 0.0]), np.zeros((2, 2, 2)), np.zeros((2,) * 4)))
    with pytest.raises(SingularMetric):
        G.christoffel(field, [0.0, 0.0])


def test_backend_error_shrinks_at_least_quadratically():
    m = CorrelatedGaussianModel(0.4)
    p = m.point([0.2, 0.9, -0.1, 1.3])
    exact = G.christoffel(m, p)
    errs = [np.abs(G.christoffel(m, p, FD, h) - exact).max() for h in (2e-2, 1e-2)]
    assert errs[0] / errs[1] > 4.0


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_oscillator_scalar_matches_closed_form(w1, w2, t1, t2):
    m = JacobiIHOModel((w1, w2))
    assert G.ricci_scalar(m, [t1, t2]) == pytest.approx(ricci_scalar_iho_2set(w1, w2, t1, t2), abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_backends_agree_on_random_points(seed):
    m = CorrelatedGaussianModel(-0.6)
    p = m.random_point(np.random.default_rng(seed))
    a, f = G.curvature(m, p), G.curvature(m, p, FD)
    np.testing.assert_allclose(f.christoffel, a.christoffel, atol=1e-8)
    assert f.scalar == pytest.approx(a.scalar, abs=1e-6)
