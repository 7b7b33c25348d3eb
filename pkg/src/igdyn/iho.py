"""Inverted harmonic oscillators as geodesic flow of the Jacobi metric
``(E - Phi) * identity`` with ``Phi = -1/2 sum w_j^2 theta_j^2``.

Time maps.  Along a Newtonian orbit of energy ``E`` the Jacobi kinetic form is
``g(theta_t, theta_t) = 2 (E - Phi)^2``.  A Jacobi geodesic with constant
kinetic form ``k`` in its own parameter ``s`` therefore maps to physical time by

    dtau = sqrt(k / 2) ds / (E - Phi)

which is the identity for a flat metric (``Phi = 0``, ``E = 1``) launched with
``k = 2``, and a uniform ``1/sqrt(2)`` rescaling for unit-speed arclength.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .dynamics import GeodesicState, GeodesicTrajectory, StepControl, _geodesic_acceleration
from .errors import ConformalFactorVanishes, DimensionMismatch, DomainError
from .models import JacobiIHOModel


@dataclass(frozen=True, eq=False)
class NewtonianTrajectory:
    taus: np.ndarray
    thetas: np.ndarray
    velocities: np.ndarray
    accelerations: np.ndarray
    frequencies: tuple
    dense: Callable | None = field(default=None, repr=False)

    def residual(self) -> float:
        """Max of ``|theta'' - w^2 theta|`` over the samples."""
        w2 = np.asarray(self.frequencies) ** 2
        return float(np.abs(self.accelerations - w2 * self.thetas).max())

    def at(self, taus):
        """``(thetas, velocities)`` at arbitrary times."""
        taus = np.asarray(taus, dtype=float)
        if self.dense is not None:
            return self.dense(taus)
        y = np.hstack([self.thetas, self.velocities])
        dy = np.hstack([self.velocities, self.accelerations])
        spline = CubicHermiteSpline(self.taus, y, dy, axis=0)(taus)
        d = self.thetas.shape[1]
        return spline[..., :d], spline[..., d:]

    def energy(self, model: JacobiIHOModel) -> np.ndarray:
        return 0.5 * np.sum(self.velocities**2, axis=1) + model.potential(self.thetas)


def _hyperbolic(omega, Xi, v0, taus):
    t = taus[:, None]
    w = omega[None, :]
    moving = w > 0
    ws = np.where(moving, w, 1.0)
    theta = np.where(moving, Xi * np.cosh(ws * t) + v0 / ws * np.sinh(ws * t), Xi + v0 * t)
    vel = np.where(moving, Xi * ws * np.sinh(ws * t) + v0 * np.cosh(ws * t), v0 + 0 * t)
    return theta, vel


def newtonian_reference(frequencies, Xi, tau_grid, velocities=None, growing: bool = True
                        ) -> NewtonianTrajectory:
    """Exact solutions of ``theta_j'' = w_j^2 theta_j``.

    Without explicit ``velocities`` the pure growing branch ``Xi_j exp(w_j tau)``
    is used (``growing=False`` selects the decaying one).  Zero frequencies give
    free motion ``Xi + v tau``.
    """
    omega = np.asarray(frequencies, dtype=float).reshape(-1)
    Xi = np.broadcast_to(np.asarray(Xi, dtype=float), omega.shape).copy()
    if velocities is None:
        v0 = (1.0 if growing else -1.0) * omega * Xi
    else:
        v0 = np.broadcast_to(np.asarray(velocities, dtype=float), omega.shape).copy()
    taus = np.asarray(tau_grid, dtype=float)

    def dense(t):
        t = np.asarray(t, dtype=float)
        th, v = _hyperbolic(omega, Xi, v0, np.atleast_1d(t))
        return (th[0], v[0]) if t.ndim == 0 else (th, v)

    theta, vel = _hyperbolic(omega, Xi, v0, taus)
    return NewtonianTrajectory(taus, theta, vel, omega**2 * theta, tuple(omega), dense)


def ricci_scalar_iho_2set(omega1, omega2, theta1, theta2):
    """Closed-form scalar curvature of the two-oscillator Jacobi metric at ``E = 1``."""
    a = theta1**2 * omega1**2 + theta2**2 * omega2**2 + 2
    num = (4 * (theta1**2 * omega1**4 + theta2**2 * omega2**4)
           - 4 * (theta1**2 + theta2**2) * omega1**2 * omega2**2
           - 8 * (omega1**2 + omega2**2))
    return num / a**3


def weyl_1212_iho(omega, theta1, theta2):
    """Closed-form ``W_1212`` for two oscillators of equal frequency."""
    w2 = omega * omega
    num = (8 * w2**2 * (theta1**2 + theta2**2) + 2 * w2**3 * (theta1**4 + theta2**4)
           + 4 * w2**3 * theta1**2 * theta2**2)
    return num / (w2 * (theta1**2 + theta2**2) + 2) ** 3


def _factor(model, theta):
    f = model.conformal_factor(theta)
    if np.any(f <= 0):
        raise ConformalFactorVanishes(f"E - Phi = {np.min(f)} is not positive")
    return f


def maupertuis_reparametrize(trajectory: GeodesicTrajectory, model: JacobiIHOModel | None = None,
                             rtol: float = 1e-12, atol: float = 1e-14) -> NewtonianTrajectory:
    """Map a Jacobi-metric geodesic to physical time.

    The kinetic constant ``k`` of the geodesic is read off its first sample.

    Raises:
        ConformalFactorVanishes: ``E - Phi <= 0`` somewhere on the path.
    """
    model = model or trajectory.model
    if not isinstance(model, JacobiIHOModel):
        raise TypeError("maupertuis_reparametrize needs a JacobiIHOModel")
    s = trajectory.taus
    th0, v0 = trajectory.interpolate(s[0])
    k = float(v0 @ model.metric(th0) @ v0)
    scale = np.sqrt(k / 2.0)

    def dtau_ds(si, _y):
        theta, _ = trajectory.interpolate(si)
        return [scale / _factor(model, theta)]

    sol = solve_ivp(dtau_ds, (s[0], s[-1]), [0.0], method="DOP853", rtol=rtol, atol=atol,
                    t_eval=s, dense_output=True)
    taus = sol.y[0]
    thetas = trajectory.thetas
    vs = trajectory.velocities
    f = _factor(model, thetas)
    rate = f / scale  # ds/dtau
    vel = vs * rate[:, None]
    # theta_tt = theta_ss (ds/dtau)^2 + theta_s d2s/dtau2, with d2s/dtau2 = grad f . theta_t / scale
    acc_s = np.array([_geodesic_acc(model, th, v) for th, v in zip(thetas, vs)])
    grad_f = model.force(thetas)
    d2s = np.sum(grad_f * vel, axis=1) / scale
    acc = acc_s * rate[:, None] ** 2 + vs * d2s[:, None]

    def dense(t):
        t = np.asarray(t, dtype=float)
        si = _invert_monotone(sol, s, np.atleast_1d(t))
        pairs = [trajectory.interpolate(x) for x in si]
        th = np.array([p[0] for p in pairs])
        v = np.array([p[1] for p in pairs]) * (_factor(model, th) / scale)[:, None]
        return (th[0], v[0]) if t.ndim == 0 else (th, v)

    return NewtonianTrajectory(taus, thetas.copy(), vel, acc, model.frequencies, dense)


def _geodesic_acc(model, theta, v):
    # Christoffel symbols of a conformally flat metric f * identity
    f = model.conformal_factor(theta)
    grad = model.force(theta)
    return -(2 * (grad @ v) * v - (v @ v) * grad) / (2 * f)


def _invert_monotone(sol, s, taus):
    from scipy.optimize import brentq

    out = []
    tmin, tmax = sol.y[0][0], sol.y[0][-1]
    for t in taus:
        if t <= tmin:
            out.append(s[0])
        elif t >= tmax:
            out.append(s[-1])
        else:
            out.append(brentq(lambda x: sol.sol(x)[0] - t, s[0], s[-1], xtol=1e-14, rtol=1e-15))
    return np.array(out)


def jacobi_arclength(newtonian: NewtonianTrajectory, model: JacobiIHOModel, kinetic: float = 2.0,
                     n_samples: int | None = None, rtol: float = 1e-12, atol: float = 1e-14
                     ) -> GeodesicTrajectory:
    """Express a Newtonian orbit as a Jacobi geodesic with constant kinetic form ``kinetic``."""
    if newtonian.thetas.shape[1] != model.dim:
        raise DimensionMismatch("trajectory and model dimensions differ")
    _check_energy(model, newtonian.thetas[0], newtonian.velocities[0])
    scale = np.sqrt(kinetic / 2.0)
    t0, t1 = float(newtonian.taus[0]), float(newtonian.taus[-1])

    def ds_dtau(t, _y):
        theta, _ = newtonian.at(t)
        return [_factor(model, theta) / scale]

    sol = solve_ivp(ds_dtau, (t0, t1), [0.0], method="DOP853", rtol=rtol, atol=atol,
                    t_eval=newtonian.taus, dense_output=True)
    s = sol.y[0]
    f = _factor(model, newtonian.thetas)
    vs = newtonian.velocities * (scale / f)[:, None]

    def dense(si):
        t = _invert_monotone(sol, newtonian.taus, np.atleast_1d(si))[0]
        theta, vel = newtonian.at(t)
        return np.concatenate([theta, vel * scale / _factor(model, theta)])

    meta = {"method": "newtonian", "kinetic": kinetic}
    return GeodesicTrajectory(s, newtonian.thetas.copy(), vs, meta, f"iho{model.frequencies}",
                              model, dense)


def _check_energy(model, theta, velocity, rtol=1e-9):
    e = 0.5 * float(velocity @ velocity) + float(model.potential(theta))
    if abs(e - model.energy) > rtol * max(1.0, abs(model.energy), 0.5 * float(velocity @ velocity)):
        raise DomainError(f"Newtonian data has energy {e}, the Jacobi metric uses {model.energy}")


def launch_state(model: JacobiIHOModel, theta0, velocity0, kinetic: float = 2.0) -> GeodesicState:
    """Jacobi geodesic initial state matching Newtonian data ``(theta0, velocity0)``.

    The Newtonian velocity is rescaled so the geodesic has kinetic form ``kinetic``.
    """
    theta0 = np.asarray(theta0, dtype=float)
    velocity0 = np.asarray(velocity0, dtype=float)
    _check_energy(model, theta0, velocity0)
    f = _factor(model, theta0)
    return GeodesicState(0.0, theta0, velocity0 * np.sqrt(kinetic / 2.0) / f)


def newton_via_geodesic(model: JacobiIHOModel, theta0, velocity0, tau_end: float,
                        kinetic: float = 2.0, step_control: StepControl = StepControl()
                        ) -> NewtonianTrajectory:
    """Integrate the Jacobi geodesic for Newtonian data and map it back to physical time.

    The physical clock ``dtau/ds = sqrt(k/2) / (E - Phi)`` is integrated alongside
    the geodesic and stops the run once it reaches ``tau_end``.
    """
    state = launch_state(model, theta0, velocity0, kinetic)
    d = model.dim
    scale = np.sqrt(kinetic / 2.0)

    def rhs(_s, y):
        theta, v = y[:d], y[d:2 * d]
        return np.concatenate([v, _geodesic_acceleration(model, theta, v),
                               [scale / _factor(model, theta)]])

    def done(_s, y):
        return y[-1] - tau_end
    done.terminal = True

    s_cap = 1.0
    while True:
        sol = solve_ivp(rhs, (0.0, s_cap), np.concatenate([state.theta, state.velocity, [0.0]]),
                        method=step_control.method, rtol=step_control.rtol,
                        atol=step_control.atol, dense_output=True, events=done)
        if sol.status == 1:
            break
        s_cap *= 10.0
    s_end = float(sol.t_events[0][0])
    s = np.linspace(0.0, s_end, step_control.n_samples)
    y = sol.sol(s)
    traj = GeodesicTrajectory(s, y[:d].T.copy(), y[d:2 * d].T.copy(), step_control.as_dict(),
                              f"iho{model.frequencies}", model, lambda x: sol.sol(x)[:2 * d])
    return maupertuis_reparametrize(traj, model)
