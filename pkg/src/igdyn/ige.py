"""Swept statistical volumes, their time averages and the entropy
``S(tau) = log <dV>_tau`` with least-squares slope fits.

Volumes grow exponentially, so every series is carried in log space and
averaged with a log-domain cumulative trapezoid.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import ClosedFormGeodesicParams, closed_form_geodesic
from .errors import (
    GridTooCoarse,
    InconsistentCutoff,
    NonPositiveVolume,
)
from .fitting import fit_line
from .models import JacobiIHOModel, metric_at

MAX_SPACING = 0.01
POINTS_PER_UNIT = 100
SPECTRUM_CUTOFF = np.sqrt(2.0)


def volume_density(model, point) -> float:
    """``sqrt(det g)`` at ``point``."""
    return float(np.sqrt(metric_at(model, point).det))


# -- Gaussian model ------------------------------------------------------------


def log_delta_volume_gaussian(params: ClosedFormGeodesicParams, N: int, tau):
    mu0, s0 = closed_form_geodesic(params, 0.0)
    mu, s = closed_form_geodesic(params, np.asarray(tau, dtype=float))
    per_pair = np.sqrt(2.0) * np.abs((mu - mu0) * (1.0 / s - 1.0 / s0))
    with np.errstate(divide="ignore"):
        return 3 * N * np.log(per_pair)


def delta_volume_gaussian(params: ClosedFormGeodesicParams, N: int, tau):
    """Volume swept by ``3N`` pairs on the closed-form geodesic between ``0`` and ``tau``.

    Each pair contributes ``sqrt(2) |(mu(tau) - mu(0)) (1/sigma(tau) - 1/sigma(0))|``.
    """
    return np.exp(log_delta_volume_gaussian(params, N, tau))


# -- averaging -----------------------------------------------------------------


def _check_grid(taus):
    taus = np.asarray(taus, dtype=float)
    if taus.size < 2 or np.any(np.diff(taus) <= 0):
        raise ValueError("tau grid must be strictly increasing with at least two points")
    if np.diff(taus).max() > MAX_SPACING * (1 + 1e-9):
        raise GridTooCoarse(f"grid spacing {np.diff(taus).max():.3g} exceeds {MAX_SPACING}")
    return taus


def log_average_volume(taus, log_delta_v):
    """``log((1/(tau - tau0)) int_tau0^tau dV)`` from log values; first point is the right limit."""
    taus = _check_grid(taus)
    a = np.asarray(log_delta_v, dtype=float)
    h = np.diff(taus)
    with np.errstate(divide="ignore"):
        pieces = np.log(h / 2) + np.logaddexp(a[:-1], a[1:])
    cum = np.logaddexp.accumulate(pieces)
    with np.errstate(divide="ignore"):
        out = np.empty_like(a)
        out[0] = a[0]
        out[1:] = cum - np.log(taus[1:] - taus[0])
    return out


def average_volume(taus, delta_v):
    """``(1/tau) int_0^tau dV`` by cumulative trapezoid.

    Raises:
        GridTooCoarse: spacing above 0.01.
    """
    taus = _check_grid(taus)
    dv = np.asarray(delta_v, dtype=float)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(taus) * (dv[:-1] + dv[1:]))])
    out = np.empty_like(dv)
    out[0] = dv[0]
    out[1:] = cum[1:] / (taus[1:] - taus[0])
    return out


@dataclass(frozen=True, eq=False)
class VolumeSeries:
    taus: np.ndarray
    log_delta_v: np.ndarray
    log_avg_v: np.ndarray
    model_id: str
    sweep_params: dict = field(default_factory=dict)

    @classmethod
    def from_log(cls, taus, log_delta_v, model_id, sweep_params=None) -> "VolumeSeries":
        taus = np.asarray(taus, dtype=float)
        log_dv = np.asarray(log_delta_v, dtype=float)
        return cls(taus, log_dv, log_average_volume(taus, log_dv), model_id, dict(sweep_params or {}))

    @property
    def delta_v(self):
        return np.exp(self.log_delta_v)

    @property
    def avg_v(self):
        return np.exp(self.log_avg_v)

    @property
    def entropy(self):
        return self.log_avg_v

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("tau,delta_v,avg_v,entropy\n")
            for row in zip(self.taus, self.delta_v, self.avg_v, self.entropy):
                fh.write(",".join(repr(float(x)) for x in row) + "\n")


@dataclass(frozen=True)
class IGEReport:
    fitted_slope: float
    predicted_slope: float
    relative_error: float
    window: tuple
    r_squared: float
    scenario: str = ""
    intercept: float = 0.0
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def ige(series: VolumeSeries, fit_window, predicted_slope: float | None = None,
        scenario: str = "", extras: dict | None = None) -> IGEReport:
    """Fit the entropy ``log <dV>`` against ``tau`` on ``fit_window``.

    Raises:
        WindowTooShort: fewer than ten samples in the window.
        NonPositiveVolume: a non-positive averaged volume in the window.
    """
    lo, hi = fit_window
    mask = (series.taus >= lo) & (series.taus <= hi)
    s = series.entropy[mask]
    if np.any(~np.isfinite(s)):
        raise NonPositiveVolume("averaged volume is not positive on the fit window")
    fit = fit_line(series.taus[mask], s)
    pred = float("nan") if predicted_slope is None else float(predicted_slope)
    rel = abs(fit.slope - pred) / abs(pred) if predicted_slope else float("nan")
    return IGEReport(fit.slope, pred, rel, (float(lo), float(hi)), fit.r_squared, scenario,
                     fit.intercept, dict(extras or {}))


def _grid(tau_max, points_per_unit=POINTS_PER_UNIT):
    return np.linspace(0.0, tau_max, int(np.ceil(tau_max * points_per_unit)) + 1)


def gaussian_volume_series(N: int, lam: float, Lambda: float | None = None, C: float = 0.0,
                           tau_max: float | None = None,
                           points_per_unit: int = POINTS_PER_UNIT) -> VolumeSeries:
    """Volume series on the closed-form geodesic; ``Lambda`` defaults to ``lam``."""
    Lambda = lam if Lambda is None else Lambda
    tau_max = 10.0 / lam if tau_max is None else tau_max
    params = ClosedFormGeodesicParams(Lambda, lam, C)
    taus = _grid(tau_max, points_per_unit)
    return VolumeSeries.from_log(taus, log_delta_volume_gaussian(params, N, taus),
                                 f"gaussian_product(n_particles={N})",
                                 {"N": N, "lambda": lam, "Lambda": Lambda, "C": C})


def gaussian_ige(N: int, lam: float, Lambda: float | None = None, window=None,
                 points_per_unit: int = POINTS_PER_UNIT) -> IGEReport:
    window = (5.0 / lam, 10.0 / lam) if window is None else tuple(window)
    series = gaussian_volume_series(N, lam, Lambda, tau_max=window[1],
                                    points_per_unit=points_per_unit)
    return ige(series, window, 3 * N * lam, f"gaussian N={N} lambda={lam}")


# -- inverted oscillators ------------------------------------------------------


def log_delta_volume_iho(model: JacobiIHOModel, Xi, tau, form: str = "exact"):
    """Log of the volume swept from the origin to ``theta(tau) = Xi exp(w tau)``.

    ``form="exact"`` integrates ``1 + 1/2 sum w_j^2 theta_j^2`` over the box for two
    oscillators.  ``form="asymptotic"`` is the large-``tau`` product form
    ``(1/d) 2^(-d/2) prod|theta| (sum w^2 theta^2)^(d/2)`` valid for any dimension ``d``.
    """
    w = model.omega
    d = w.size
    Xi = np.broadcast_to(np.asarray(Xi, dtype=float), w.shape)
    tau = np.asarray(tau, dtype=float)
    log_theta = np.log(np.abs(Xi)) + np.multiply.outer(tau, w)
    if form == "exact":
        if d != 2:
            raise ValueError("the exact swept volume is implemented for two oscillators")
        t1, t2 = np.exp(log_theta[..., 0]), np.exp(log_theta[..., 1])
        vol = t1 * t2 + (w[0] ** 2 * t1**3 * t2 + w[1] ** 2 * t1 * t2**3) / 6.0
        return np.log(vol)
    if form == "asymptotic":
        with np.errstate(divide="ignore"):
            terms = 2 * np.log(w) + 2 * log_theta
        log_sum = np.logaddexp.reduce(terms, axis=-1)
        return -np.log(d) - 0.5 * d * np.log(2.0) + log_theta.sum(axis=-1) + 0.5 * d * log_sum
    raise ValueError(f"unknown form {form!r}")


def delta_volume_iho(model: JacobiIHOModel, Xi, tau, form: str = "exact"):
    return np.exp(log_delta_volume_iho(model, Xi, tau, form))


def iho_2set_asymptotic_slope(omega1: float, omega2: float) -> float:
    """Exponent of the dominant term of the two-oscillator swept volume."""
    hi, lo = max(omega1, omega2), min(omega1, omega2)
    return 3 * hi + lo


def iho_2set_ige(omega1: float, omega2: float, Xi=1.0, window=None,
                 points_per_unit: int = POINTS_PER_UNIT) -> IGEReport:
    """Entropy slope for two oscillators; the default window is ``[10, 20] / max(w)``."""
    w = max(omega1, omega2)
    window = (10.0 / w, 20.0 / w) if window is None else tuple(window)
    model = JacobiIHOModel((omega1, omega2))
    taus = _grid(window[1], points_per_unit)
    series = VolumeSeries.from_log(taus, log_delta_volume_iho(model, Xi, taus), model.name,
                                   {"frequencies": [omega1, omega2], "Xi": Xi})
    extras = {"dominant_limit": 3 * w, "equal_frequency_limit": 4 * w}
    return ige(series, window, iho_2set_asymptotic_slope(omega1, omega2),
               f"iho2 w=({omega1},{omega2})", extras)


def sample_frequency_spectrum(n: int, seed: int, xi: float | None = None,
                              Omega: float | None = None) -> np.ndarray:
    """``3n`` frequencies with density ``rho(w) = w`` on ``[0, sqrt(2)]`` (inverse CDF).

    Raises:
        InconsistentCutoff: ``xi * Omega`` given and different from ``sqrt(2)``.
    """
    if (xi is None) != (Omega is None):
        raise ValueError("xi and Omega must be given together")
    if xi is not None and abs(xi * Omega - SPECTRUM_CUTOFF) > 1e-9:
        raise InconsistentCutoff(f"xi * Omega = {xi * Omega}, normalisation requires sqrt(2)")
    rng = np.random.default_rng(seed)
    return SPECTRUM_CUTOFF * np.sqrt(rng.uniform(size=3 * n))


def cutoff_multiplier(frequencies) -> float:
    """``xi = sqrt(2) / Omega`` with ``Omega = sum(w)``."""
    return SPECTRUM_CUTOFF / float(np.sum(frequencies))


def _log_continuum_volume(n, Xi, xi_omega, taus):
    d = 3 * n
    return (-np.log(d) - 0.5 * d * np.log(2.0) + 2 * d * np.log(abs(Xi))
            + 0.5 * d * (np.log(xi_omega**2 / 2.0) + xi_omega * taus))


def ige_iho_appendix(n: int, frequencies=None, Xi: float = 1.0, tau_grid=None, fit_window=None,
                     form: str = "continuum", seed: int = 0) -> IGEReport:
    """Entropy slope for ``3n`` oscillators.

    ``continuum`` averages the large-``n`` volume with a linear spectrum, whose
    exponent is ``(3/2) n xi Omega``.  ``discrete`` averages the product form with the
    actual frequencies; its exponent is ``Omega + 3n max(w)``.
    """
    freqs = sample_frequency_spectrum(n, seed) if frequencies is None else np.asarray(frequencies, float)
    if freqs.size != 3 * n:
        raise ValueError(f"expected {3 * n} frequencies, got {freqs.size}")
    Omega = float(freqs.sum())
    xi = cutoff_multiplier(freqs)
    if form == "continuum":
        rate = 1.5 * n * xi * Omega
    elif form == "discrete":
        rate = Omega + 3 * n * float(freqs.max())
    else:
        raise ValueError(f"unknown form {form!r}")
    if fit_window is None:
        fit_window = (30.0 / rate, 60.0 / rate)
    taus = _grid(fit_window[1]) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    if form == "continuum":
        log_dv = _log_continuum_volume(n, Xi, xi * Omega, taus)
    else:
        log_dv = log_delta_volume_iho(JacobiIHOModel(tuple(freqs)), Xi, taus, "asymptotic")
    series = VolumeSeries.from_log(taus, log_dv, f"iho_appendix(n={n})",
                                   {"n": n, "form": form, "seed": seed})
    report = ige(series, fit_window, rate, f"appendix n={n} {form}")
    extras = {"Omega": Omega, "xi": xi, "form": form,
              "slope_over_n_xi_Omega": report.fitted_slope / (n * xi * Omega),
              "slope_over_Omega": report.fitted_slope / Omega}
    return IGEReport(report.fitted_slope, report.predicted_slope, report.relative_error,
                     report.window, report.r_squared, report.scenario, report.intercept, extras)
