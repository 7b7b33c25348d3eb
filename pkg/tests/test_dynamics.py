import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from igdyn import dynamics as D
from igdyn import geometry as G
from igdyn.errors import DomainExit, NonNegativeK, NonPositiveIntensity, WindowTooShort
from igdyn.models import GaussianPairModel, GaussianProductModel

UNIT = D.ClosedFormGeodesicParams(1.0, 1.0)


def test_closed_form_at_origin():
    mu, sigma = D.closed_form_geodesic(UNIT, 0.0)
    assert mu == pytest.approx(4 / 9) and sigma == pytest.approx(8 / 9)


def test_closed_form_late_time_limits():
    mu, sigma = D.closed_form_geodesic(UNIT, 40.0)
    assert mu == pytest.approx(4.0, rel=1e-12)
    assert 0 < sigma < 1e-15


def test_closed_form_shift_moves_mu_only():
    shifted = D.ClosedFormGeodesicParams(1.0, 1.0, C=2.5)
    taus = np.linspace(0, 3, 7)
    a, b = D.closed_form_geodesic(UNIT, taus), D.closed_form_geodesic(shifted, taus)
    np.testing.assert_allclose(b[0] - a[0], 2.5)
    np.testing.assert_array_equal(a[1], b[1])


def test_closed_form_invalid_params():
    with pytest.raises(ValueError):
        D.ClosedFormGeodesicParams(-1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_closed_form_solves_geodesic_equations(Lambda, lam):
    params = D.ClosedFormGeodesicParams(Lambda, lam)
    assert D.closed_form_residual(params, np.linspace(0, 5, 51)) < 1e-9


def test_integration_matches_closed_form():
    traj = D.integrate_geodesic(GaussianPairModel(), D.closed_form_state(UNIT, 1), 5.0)
    mu, sigma = D.closed_form_geodesic(UNIT, traj.taus)
    assert np.abs(traj.thetas[:, 0] - mu).max() < 1e-6
    assert np.abs(traj.thetas[:, 1] - sigma).max() < 1e-6
    assert D.geodesic_residual(traj) < 1e-6


def test_zero_velocity_stays_put():
    m = GaussianProductModel(1)
    p = m.random_point(np.random.default_rng(1))
    traj = D.integrate_geodesic(m, D.GeodesicState(0.0, p, np.zeros(6)), 3.0)
    np.testing.assert_array_equal(traj.thetas, np.tile(p.coords, (traj.taus.size, 1)))


def test_kinetic_form_conserved():
    m = GaussianProductModel(2)
    rng = np.random.default_rng(5)
    state = D.GeodesicState(0.0, m.random_point(rng), rng.normal(size=12) * 0.3)
    k = D.integrate_geodesic(m, state, 4.0).kinetic()
    assert np.abs(k / k[0] - 1).max() < 1e-8


def test_reversibility():
    m = GaussianPairModel()
    start = D.GeodesicState(0.0, [0.2, 1.3], [0.7, -0.4])
    fwd = D.integrate_geodesic(m, start, 2.0)
    back = D.integrate_geodesic(m, D.GeodesicState(0.0, fwd.thetas[-1], -fwd.velocities[-1]), 2.0)
    np.testing.assert_allclose(back.thetas[-1], start.theta, atol=1e-6)
    np.testing.assert_allclose(-back.velocities[-1], start.velocity, atol=1e-6)


def test_domain_exit_is_reported():
    m = GaussianPairModel()
    with pytest.raises(DomainExit) as info:
        D.integrate_geodesic(m, D.closed_form_state(UNIT, 1), 40.0, D.StepControl(sigma_min=1e-3))
    assert 0 < info.value.tau < 40.0
    assert info.value.trajectory.thetas[-1, 1] >= 1e-3 * (1 - 1e-6)


def test_tau_end_must_advance():
    with pytest.raises(ValueError):
        D.integrate_geodesic(GaussianPairModel(), D.closed_form_state(UNIT, 1), 0.0)


def test_trajectory_csv_round_trip(tmp_path):
    traj = D.integrate_geodesic(GaussianPairModel(), D.closed_form_state(UNIT, 1), 1.0,
                                D.StepControl(n_samples=11))
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    assert path.read_text().splitlines()[0] == "tau,theta_0,theta_1,vel_0,vel_1"
    back = D.GeodesicTrajectory.from_csv(path)
    np.testing.assert_allclose(back.thetas, traj.thetas, rtol=1e-15)
    np.testing.assert_allclose(back.velocities, traj.velocities, rtol=1e-15)


def test_flat_jacobi_field_spreads_linearly():
    e = G.euclidean(2)
    traj = D.integrate_geodesic(e, D.GeodesicState(0.0, [0.0, 0.0], [1.0, 0.5]), 3.0)
    w = np.array([0.3, -0.2])
    jf = D.integrate_jlc(traj, np.zeros(2), w)
    np.testing.assert_allclose(jf.J, np.outer(jf.taus, w), atol=1e-12)


def test_constant_negative_curvature_gives_sinh():
    hp = G.hyperbolic_plane(-1.0)
    traj = D.integrate_geodesic(hp, D.GeodesicState(0.0, [0.0, 1.0], [0.0, 1.0]), 5.0)
    jf = D.integrate_jlc(traj, [0.0, 0.0], [1.0, 0.0])
    ref = D.isotropic_jacobi_solution(-1.0, 1.0, jf.taus[1:])
    assert np.max(np.abs(jf.intensity[1:] - ref) / ref) < 1e-6
    assert jf.intensity[np.searchsorted(jf.taus, 1.0)] == pytest.approx(np.sinh(1.0), rel=1e-6)


def test_numeric_jacobi_field_matches_exact_variation():
    m = GaussianPairModel()
    traj = D.integrate_geodesic(m, D.closed_form_state(UNIT, 1), 4.0, D.StepControl(n_samples=201))
    jf = D.integrate_jlc(traj, *D.closed_form_jacobi_initial(m, UNIT))
    J, norm = D.closed_form_jacobi_field(m, UNIT, jf.taus)
    np.testing.assert_allclose(jf.J, J, atol=1e-6)
    np.testing.assert_allclose(jf.intensity, norm, rtol=1e-6)


@pytest.mark.parametrize("N", [1, 2])
def test_gaussian_jacobi_rate_is_lambda(N):
    m = GaussianProductModel(N)
    traj = D.integrate_geodesic(m, D.closed_form_state(UNIT, 3 * N), 10.0, D.StepControl(n_samples=501))
    jf = D.integrate_jlc(traj, *D.closed_form_jacobi_initial(m, UNIT))
    est = D.lyapunov_estimate(jf.taus, jf.intensity, (5.0, 10.0))
    assert est.lambda_j == pytest.approx(1.0, rel=0.05)


def test_rate_invariant_under_initial_scaling():
    hp = G.hyperbolic_plane(-1.0)
    traj = D.integrate_geodesic(hp, D.GeodesicState(0.0, [0.0, 1.0], [0.0, 1.0]), 10.0)
    rates = [D.lyapunov_estimate(jf.taus, jf.intensity, (5.0, 10.0)).lambda_j
             for jf in (D.integrate_jlc(traj, [0.0, 0.0], [c, 0.0]) for c in (1.0, 7.5))]
    assert rates[1] == pytest.approx(rates[0], rel=1e-2)
    assert rates[0] == pytest.approx(1.0, rel=1e-2)


def test_isotropic_reference_values():
    assert D.isotropic_jacobi_solution(-1.0, 1.0, 1.0) == pytest.approx(1.17520, abs=1e-5)
    assert D.isotropic_jacobi_solution(-4.0, 1.0, 1.0) == pytest.approx(1.81343, abs=1e-5)
    assert D.isotropic_jacobi_solution(-2.0, 3.0, 0.0) == 0.0


@pytest.mark.parametrize("K", [0.0, 1.0])
def test_isotropic_reference_rejects_nonnegative_curvature(K):
    with pytest.raises(NonNegativeK):
        D.isotropic_jacobi_solution(K, 1.0, 1.0)


def test_rate_of_exact_exponential():
    taus = np.linspace(0, 5, 101)
    est = D.lyapunov_estimate(taus, np.exp(2 * taus), (1.0, 4.0))
    assert est.lambda_j == pytest.approx(2.0, abs=1e-12)
    assert est.r_squared == pytest.approx(1.0, abs=1e-12)


def test_rate_estimator_guards():
    taus = np.linspace(0, 5, 101)
    with pytest.raises(WindowTooShort):
        D.lyapunov_estimate(taus, np.exp(taus), (1.0, 1.3))
    bad = np.exp(taus)
    bad[50] = 0.0
    with pytest.raises(NonPositiveIntensity):
        D.lyapunov_estimate(taus, bad, (1.0, 4.0))


def test_jacobi_csv_columns(tmp_path):
    e = G.euclidean(2)
    traj = D.integrate_geodesic(e, D.GeodesicState(0.0, [0.0, 0.0], [1.0, 0.0]), 1.0,
                                D.StepControl(n_samples=5))
    path = tmp_path / "jlc.csv"
    D.integrate_jlc(traj, [0.0, 0.0], [0.0, 1.0]).to_csv(path)
    header = path.read_text().splitlines()[0].split(",")
    assert header[-1] == "intensity" and "J_1" in header and "DJ_0" in header
