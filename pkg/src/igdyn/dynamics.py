"""Geodesic and geodesic-deviation (Jacobi) integration, the closed-form
Gaussian geodesics, and the exponential-rate estimator for Jacobi fields.

Geodesics solve ``theta'' + Gamma(theta', theta') = 0`` as a first-order
system with DOP853 (rtol 1e-10, atol 1e-12) and dense output.

The Jacobi system is carried in the pair ``(J, DJ)`` where ``DJ`` is the
covariant derivative along the host geodesic:

    J'  = DJ - Gamma(v, J)
    DJ' = R^m_{nrs} v^n J^r v^s - Gamma(v, DJ)

With the Riemann convention of :mod:`igdyn.geometry` the first line of the
second equation is ``D^2 J = -R_MTW(J, v) v``, i.e. the usual deviation
equation: on a surface of constant ``K < 0`` the transverse field grows like
``sinh(sqrt(-K) tau)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from . import geometry
from .errors import (
    CurvatureEvaluationFailed,
    DomainExit,
    IgdynError,
    NonNegativeK,
    StepUnderflow,
)
from .fitting import fit_log_slope
from .models import COMPLEX_STEP, Label, ParameterPoint

SIGMA_MIN = 1e-8


@dataclass(frozen=True)
class StepControl:
    """Integrator settings; ``n_samples`` is the size of the recorded output grid."""

    method: str = "DOP853"
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = np.inf
    n_samples: int = 1001
    sigma_min: float = SIGMA_MIN

    def as_dict(self) -> dict:
        return {"method": self.method, "rtol": self.rtol, "atol": self.atol,
                "max_step": self.max_step, "n_samples": self.n_samples}


@dataclass(frozen=True, eq=False)
class GeodesicState:
    tau: float
    theta: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        theta = self.theta.coords if isinstance(self.theta, ParameterPoint) else self.theta
        theta = np.asarray(theta, dtype=float).reshape(-1)
        vel = np.asarray(self.velocity, dtype=float).reshape(-1)
        if vel.shape != theta.shape:
            raise ValueError("velocity and theta must have the same length")
        if not np.all(np.isfinite(vel)):
            raise ValueError("velocity must be finite")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "velocity", vel)
        object.__setattr__(self, "tau", float(self.tau))


def _model_id(model) -> str:
    if model is None:
        return "unknown"
    name = getattr(model, "name", type(model).__name__)
    for attr in ("n_particles", "r", "frequencies"):
        if hasattr(model, attr) and name != "gaussian_pair":
            return f"{name}({attr}={getattr(model, attr)})"
    return name


@dataclass(frozen=True, eq=False)
class GeodesicTrajectory:
    taus: np.ndarray
    thetas: np.ndarray
    velocities: np.ndarray
    integrator: dict
    model_id: str
    model: object = None
    dense: Callable | None = field(default=None, repr=False)
    exit_tau: float | None = None

    @property
    def dim(self) -> int:
        return self.thetas.shape[1]

    @property
    def states(self) -> list[GeodesicState]:
        return [GeodesicState(t, th, v) for t, th, v in zip(self.taus, self.thetas, self.velocities)]

    def interpolate(self, tau):
        """``(theta, velocity)`` at ``tau``: dense output when available, cubic Hermite otherwise."""
        if self.dense is not None:
            y = self.dense(tau)
        else:
            y = self._hermite()(tau)
        d = self.dim
        return y[:d], y[d:]

    def _hermite(self):
        if not hasattr(self, "_spline"):
            acc = self._accelerations()
            y = np.hstack([self.thetas, self.velocities])
            dy = np.hstack([self.velocities, acc])
            object.__setattr__(self, "_spline", CubicHermiteSpline(self.taus, y, dy, axis=0))
        return self._spline

    def _accelerations(self):
        if self.model is None:
            return np.gradient(self.velocities, self.taus, axis=0)
        return np.array([_geodesic_acceleration(self.model, th, v)
                         for th, v in zip(self.thetas, self.velocities)])

    def kinetic(self) -> np.ndarray:
        """``g(v, v)`` along the recorded samples."""
        return np.array([v @ self.model.metric(th) @ v for th, v in zip(self.thetas, self.velocities)])

    def to_csv(self, path) -> None:
        d = self.dim
        header = ["tau"] + [f"theta_{i}" for i in range(d)] + [f"vel_{i}" for i in range(d)]
        rows = np.column_stack([self.taus, self.thetas, self.velocities])
        _write_csv(path, header, rows)

    @classmethod
    def from_csv(cls, path, model=None) -> "GeodesicTrajectory":
        header, data = _read_csv(path)
        d = sum(h.startswith("theta_") for h in header)
        return cls(data[:, 0], data[:, 1:1 + d], data[:, 1 + d:1 + 2 * d],
                   {"method": "csv"}, _model_id(model), model)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) for x in row])


def _read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    return header, data


def _christoffel(model, theta, backend=geometry.Backend.ANALYTIC):
    g, dg, _ = geometry.metric_jet(model, theta, backend, order=1)
    return geometry.christoffel_from_jet(g, dg)[0]


def _geodesic_acceleration(model, theta, v):
    return -np.einsum("rmn,m,n->r", _christoffel(model, theta), v, v)


def _stddev_indices(model) -> list[int]:
    labels = getattr(model, "labels", ())
    return [k for k, lab in enumerate(labels) if lab == Label.STDDEV]


def integrate_geodesic(model, initial: GeodesicState, tau_end: float,
                       step_control: StepControl = StepControl(), t_eval=None) -> GeodesicTrajectory:
    """Integrate the geodesic equation from ``initial`` to ``tau_end``.

    Raises:
        DomainExit: a standard-deviation coordinate reaches ``step_control.sigma_min``;
            the exception carries the exit time and the trajectory up to it.
        StepUnderflow: the integrator fails to advance.
    """
    if tau_end <= initial.tau:
        raise ValueError("tau_end must exceed the initial tau")
    if hasattr(model, "point"):
        model.point(initial.theta)
    d = initial.theta.size

    def rhs(_tau, y):
        theta, v = y[:d], y[d:]
        return np.concatenate([v, _geodesic_acceleration(model, theta, v)])

    events = []
    for k in _stddev_indices(model):
        def hit(_tau, y, k=k):
            return y[k] - step_control.sigma_min
        hit.terminal = True
        hit.direction = -1
        events.append(hit)

    if t_eval is None:
        t_eval = np.linspace(initial.tau, tau_end, step_control.n_samples)
    sol = solve_ivp(rhs, (initial.tau, tau_end), np.concatenate([initial.theta, initial.velocity]),
                    method=step_control.method, rtol=step_control.rtol, atol=step_control.atol,
                    max_step=step_control.max_step, dense_output=True, t_eval=t_eval,
                    events=events or None)
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    meta = step_control.as_dict() | {"nfev": int(sol.nfev), "n_steps": int(sol.t.size)}
    traj = GeodesicTrajectory(sol.t, sol.y[:d].T.copy(), sol.y[d:].T.copy(), meta,
                              _model_id(model), model, sol.sol)
    if sol.status == 1:
        exit_tau = float(min(t[0] for t in sol.t_events if t.size))
        traj = GeodesicTrajectory(traj.taus, traj.thetas, traj.velocities, meta,
                                  traj.model_id, model, sol.sol, exit_tau)
        raise DomainExit(exit_tau, traj)
    return traj


def geodesic_residual(trajectory: GeodesicTrajectory, taus=None, h: float = 1e-4) -> float:
    """Max of ``|theta' - v|`` and ``|v' + Gamma(v, v)|`` on ``taus``, derivatives of the
    interpolant taken by fourth-order central differences."""
    if taus is None:
        lo, hi = trajectory.taus[0] + 2 * h, trajectory.taus[-1] - 2 * h
        taus = np.linspace(lo, hi, 50)
    d = trajectory.dim
    worst = 0.0
    for t in taus:
        ys = [np.concatenate(trajectory.interpolate(t + k * h)) for k in (-2, -1, 1, 2)]
        dy = (ys[0] - 8 * ys[1] + 8 * ys[2] - ys[3]) / (12 * h)
        theta, v = trajectory.interpolate(t)
        r = np.concatenate([dy[:d] - v, dy[d:] - _geodesic_acceleration(trajectory.model, theta, v)])
        worst = max(worst, float(np.abs(r).max()))
    return worst


# -- closed-form Gaussian geodesics ------------------------------------------


@dataclass(frozen=True)
class ClosedFormGeodesicParams:
    Lambda: float
    lam: float
    C: float = 0.0

    def __post_init__(self):
        if not (self.Lambda > 0 and self.lam > 0):
            raise ValueError("Lambda and lambda must be positive")


def _closed_form(Lambda, lam, C, tau):
    c = Lambda**2 / (8 * lam**2)
    e1 = np.exp(-lam * tau)
    e2 = e1 * e1
    den = e2 + c
    mu = Lambda**2 / (2 * lam) / den + C
    sigma = Lambda * e1 / den
    dmu = Lambda**2 * e2 / den**2
    dsigma = Lambda * lam * e1 * (e2 - c) / den**2
    return mu, sigma, dmu, dsigma


def closed_form_geodesic(params: ClosedFormGeodesicParams, tau):
    """``(mu(tau), sigma(tau))`` of the Gaussian geodesic family.

    ``cosh(2 lam tau) - sinh(2 lam tau)`` is evaluated as ``exp(-2 lam tau)``.
    """
    mu, sigma, _, _ = _closed_form(params.Lambda, params.lam, params.C, np.asarray(tau, dtype=float))
    return mu, sigma


def closed_form_velocity(params: ClosedFormGeodesicParams, tau):
    _, _, dmu, dsigma = _closed_form(params.Lambda, params.lam, params.C, np.asarray(tau, dtype=float))
    return dmu, dsigma


def closed_form_residual(params: ClosedFormGeodesicParams, taus) -> float:
    """Max residual of the two pair geodesic equations on the closed form.

    ``mu'' - (2/sigma) mu' sigma' = 0`` and ``sigma'' + mu'^2/(2 sigma) - sigma'^2/sigma = 0``;
    second derivatives come from a complex step on the analytic velocity.
    """
    taus = np.asarray(taus, dtype=float)
    _, _, dmu_c, dsg_c = _closed_form(params.Lambda, params.lam, params.C, taus + 1j * COMPLEX_STEP)
    ddmu, ddsg = np.imag(dmu_c) / COMPLEX_STEP, np.imag(dsg_c) / COMPLEX_STEP
    _, sigma, dmu, dsg = _closed_form(params.Lambda, params.lam, params.C, taus)
    r1 = ddmu - 2.0 / sigma * dmu * dsg
    r2 = ddsg + dmu**2 / (2 * sigma) - dsg**2 / sigma
    return float(max(np.abs(r1).max(), np.abs(r2).max()))


def closed_form_lambda_variation(params: ClosedFormGeodesicParams, tau):
    """``d/dlambda`` of ``(mu, sigma, mu', sigma')`` at fixed ``Lambda`` by complex step."""
    lam = params.lam + 1j * COMPLEX_STEP
    out = _closed_form(params.Lambda, lam, params.C, np.asarray(tau, dtype=float))
    return tuple(np.imag(x) / COMPLEX_STEP for x in out)


def _tile_pairs(a, b, n_pairs):
    out = np.empty(2 * n_pairs)
    out[0::2], out[1::2] = a, b
    return out


def closed_form_state(params: ClosedFormGeodesicParams, n_pairs: int, tau: float = 0.0) -> GeodesicState:
    """Geodesic state with every ``(mu, sigma)`` pair on the same closed-form curve."""
    mu, sigma, dmu, dsigma = _closed_form(params.Lambda, params.lam, params.C, float(tau))
    return GeodesicState(tau, _tile_pairs(mu, sigma, n_pairs), _tile_pairs(dmu, dsigma, n_pairs))


def closed_form_jacobi_initial(model, params: ClosedFormGeodesicParams, tau: float = 0.0):
    """``(J0, DJ0)`` of the exact Jacobi field ``dTheta/dlambda`` of the closed-form family."""
    n_pairs = model.dim // 2
    state = closed_form_state(params, n_pairs, tau)
    dmu, dsg, ddmu, ddsg = closed_form_lambda_variation(params, tau)
    J0 = _tile_pairs(dmu, dsg, n_pairs)
    dJ0 = _tile_pairs(ddmu, ddsg, n_pairs)
    gamma = _christoffel(model, state.theta)
    DJ0 = dJ0 + np.einsum("rmn,m,n->r", gamma, state.velocity, J0)
    return J0, DJ0


def closed_form_jacobi_field(model, params: ClosedFormGeodesicParams, taus):
    """Exact ``dTheta/dlambda`` and its metric norm on ``taus``."""
    n_pairs = model.dim // 2
    dmu, dsg, _, _ = closed_form_lambda_variation(params, taus)
    _, sigma = closed_form_geodesic(params, taus)
    J = np.column_stack([_tile_pairs(a, b, n_pairs) for a, b in zip(dmu, dsg)]).T
    norm = np.sqrt(n_pairs * (dmu**2 + 2 * dsg**2)) / sigma
    return J, norm


# -- Jacobi fields -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JacobiField:
    along: GeodesicTrajectory
    taus: np.ndarray
    J: np.ndarray
    DJ: np.ndarray
    intensity: np.ndarray
    J0: np.ndarray
    DJ0: np.ndarray

    def to_csv(self, path) -> None:
        d = self.J.shape[1]
        header = (["tau"] + [f"theta_{i}" for i in range(d)] + [f"vel_{i}" for i in range(d)]
                  + [f"J_{i}" for i in range(d)] + [f"DJ_{i}" for i in range(d)] + ["intensity"])
        host = np.array([np.concatenate(self.along.interpolate(t)) for t in self.taus])
        rows = np.column_stack([self.taus, host, self.J, self.DJ, self.intensity])
        _write_csv(path, header, rows)


def integrate_jlc(trajectory: GeodesicTrajectory, J0, DJ0, taus=None,
                  step_control: StepControl = StepControl(),
                  backend=geometry.Backend.ANALYTIC) -> JacobiField:
    """Solve the geodesic-deviation equation along ``trajectory``.

    Raises:
        CurvatureEvaluationFailed: the curvature cannot be evaluated at a host point.
    """
    model = trajectory.model
    J0 = np.asarray(J0, dtype=float)
    DJ0 = np.asarray(DJ0, dtype=float)
    d = trajectory.dim
    t0, t1 = float(trajectory.taus[0]), float(trajectory.taus[-1])
    if taus is None:
        taus = trajectory.taus

    def rhs(tau, y):
        theta, v = trajectory.interpolate(tau)
        try:
            bundle = geometry.curvature(model, theta, backend)
        except IgdynError as exc:
            raise CurvatureEvaluationFailed(f"curvature failed at tau={tau}: {exc}") from exc
        J, Q = y[:d], y[d:]
        gamma = bundle.christoffel
        dJ = Q - np.einsum("rmn,m,n->r", gamma, v, J)
        dQ = (np.einsum("mnrs,n,r,s->m", bundle.riemann, v, J, v)
              - np.einsum("rmn,m,n->r", gamma, v, Q))
        return np.concatenate([dJ, dQ])

    sol = solve_ivp(rhs, (t0, t1), np.concatenate([J0, DJ0]), method=step_control.method,
                    rtol=step_control.rtol, atol=step_control.atol, t_eval=taus)
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    J = sol.y[:d].T.copy()
    DJ = sol.y[d:].T.copy()
    intensity = np.array([np.sqrt(max(j @ model.metric(trajectory.interpolate(t)[0]) @ j, 0.0))
                          for t, j in zip(sol.t, J)])
    return JacobiField(trajectory, sol.t, J, DJ, intensity, J0, DJ0)


def isotropic_jacobi_solution(K: float, omega0: float, tau):
    """``omega0 * sinh(sqrt(-K) tau) / sqrt(-K)`` for a space of constant ``K < 0``."""
    if K >= 0:
        raise NonNegativeK(f"curvature must be negative, got {K}")
    a = np.sqrt(-K)
    return omega0 * np.sinh(a * np.asarray(tau, dtype=float)) / a


class LyapunovEstimate(NamedTuple):
    lambda_j: float
    r_squared: float


def lyapunov_estimate(taus, intensity, fit_window) -> LyapunovEstimate:
    """Least-squares slope of ``ln ||J||`` on ``fit_window``.

    Raises:
        WindowTooShort: fewer than ten samples in the window.
        NonPositiveIntensity: a non-positive intensity inside the window.
    """
    fit = fit_log_slope(taus, intensity, fit_window)
    return LyapunovEstimate(fit.slope, fit.r_squared)
