"""Statistical manifolds: Gaussian product, correlated bivariate Gaussian and
the Jacobi (kinetic-energy) metric of uncoupled inverted oscillators.

Every model exposes an analytic metric field together with its first and
second coordinate derivatives (the "metric jet"), which is what the tensor
engine in :mod:`igdyn.geometry` consumes.  Coordinates of the Gaussian
product are interleaved pairs ``(mu_1, sigma_1, mu_2, sigma_2, ...)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .errors import (
    DimensionMismatch,
    DomainError,
    PriorTooNarrow,
    QuadratureNotConverged,
    SingularMetric,
)

COMPLEX_STEP = 1e-30
DEFAULT_SIGMA_BOUNDS = (1e-6, 1e6)


class Label(str, enum.Enum):
    MEAN = "MEAN"
    STDDEV = "STDDEV"
    LAGRANGIAN = "LAGRANGIAN"


@dataclass(frozen=True, eq=False)
class ParameterPoint:
    """A validated coordinate vector on a model's parameter domain."""

    coords: np.ndarray
    labels: tuple
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).reshape(-1)
        object.__setattr__(self, "coords", coords)
        if not (len(self.labels) == len(self.lower) == len(self.upper) == coords.size):
            raise DimensionMismatch(
                f"point has {coords.size} coordinates, model declares {len(self.labels)}"
            )
        if not np.all(np.isfinite(coords)):
            raise DomainError("non-finite coordinate")
        for k, (x, lab) in enumerate(zip(coords, self.labels)):
            if lab == Label.STDDEV and not x > 0:
                raise DomainError(f"coordinate {k} is a standard deviation and must be > 0, got {x}")
            if not self.lower[k] <= x <= self.upper[k]:
                raise DomainError(
                    f"coordinate {k}={x} outside [{self.lower[k]}, {self.upper[k]}]"
                )

    def __len__(self):
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)


@dataclass(frozen=True, eq=False)
class MetricTensor:
    components: np.ndarray
    point: ParameterPoint | None = None

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.components)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.components))


class StatisticalModel:
    """Common surface of the manifolds in this package.

    Subclasses provide ``dim``, ``labels``, ``lower``/``upper`` bounds and the
    analytic ``metric_jet``.  ``micro_dim`` is ``None`` for models without a
    probability density.
    """

    name: str = "model"
    micro_dim: int | None = None

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def labels(self) -> tuple:
        raise NotImplementedError

    @property
    def lower(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def upper(self) -> np.ndarray:
        raise NotImplementedError

    def point(self, coords) -> ParameterPoint:
        if isinstance(coords, ParameterPoint):
            coords = coords.coords
        coords = np.asarray(coords, dtype=float).reshape(-1)
        if coords.size != self.dim:
            raise DimensionMismatch(f"{self.name} expects {self.dim} coordinates, got {coords.size}")
        return ParameterPoint(coords, self.labels, self.lower, self.upper)

    def metric(self, theta) -> np.ndarray:
        return self.metric_jet(theta, order=0)[0]

    def metric_jet(self, theta, order: int = 2):
        """Return ``(g, dg, ddg)`` with ``dg[k] = d_k g`` and ``ddg[k, l] = d_k d_l g``.

        Entries beyond ``order`` are ``None``.
        """
        raise NotImplementedError

    def log_pdf(self, x, theta):
        raise TypeError(f"{self.name} has no probability density")

    def random_point(self, rng: np.random.Generator) -> ParameterPoint:
        raise NotImplementedError


def _pair_labels(n_pairs):
    return tuple(lab for _ in range(n_pairs) for lab in (Label.MEAN, Label.STDDEV))


def _pair_bounds(n_pairs, sigma_bounds):
    lo = np.tile([-np.inf, sigma_bounds[0]], n_pairs)
    hi = np.tile([np.inf, sigma_bounds[1]], n_pairs)
    return lo, hi


def _gauss_logpdf(x, mu, sigma):
    # complex-analytic in (mu, sigma): used with complex-step scores
    return -0.5 * np.log(2 * np.pi * sigma**2) - (x - mu) ** 2 / (2 * sigma**2)


@dataclass(frozen=True, eq=False)
class GaussianProductModel(StatisticalModel):
    """Product of ``3N`` independent univariate Gaussians, dimension ``6N``."""

    n_particles: int
    sigma_bounds: tuple = DEFAULT_SIGMA_BOUNDS
    name: str = field(default="gaussian_product", init=False)

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise DomainError(f"n_particles must be a positive integer, got {self.n_particles}")

    @property
    def n_pairs(self) -> int:
        return 3 * self.n_particles

    @property
    def micro_dim(self) -> int:
        return 3 * self.n_particles

    @property
    def dim(self) -> int:
        return 6 * self.n_particles

    @property
    def labels(self):
        return _pair_labels(self.n_pairs)

    @property
    def lower(self):
        return _pair_bounds(self.n_pairs, self.sigma_bounds)[0]

    @property
    def upper(self):
        return _pair_bounds(self.n_pairs, self.sigma_bounds)[1]

    def metric(self, theta):
        s = np.asarray(theta, dtype=float)[1::2]
        diag = np.empty(self.dim)
        diag[0::2] = 1.0 / s**2
        diag[1::2] = 2.0 / s**2
        return np.diag(diag)

    def metric_jet(self, theta, order=2):
        theta = np.asarray(theta, dtype=float)
        d = self.dim
        g = self.metric(theta)
        if order == 0:
            return g, None, None
        s = theta[1::2]
        mu_idx = np.arange(0, d, 2)
        sg_idx = mu_idx + 1
        dg = np.zeros((d, d, d))
        dg[sg_idx, mu_idx, mu_idx] = -2.0 / s**3
        dg[sg_idx, sg_idx, sg_idx] = -4.0 / s**3
        if order == 1:
            return g, dg, None
        ddg = np.zeros((d, d, d, d))
        ddg[sg_idx, sg_idx, mu_idx, mu_idx] = 6.0 / s**4
        ddg[sg_idx, sg_idx, sg_idx, sg_idx] = 12.0 / s**4
        return g, dg, ddg

    def log_pdf(self, x, theta):
        x = np.asarray(x)
        theta = np.asarray(theta)
        return np.sum(_gauss_logpdf(x, theta[0::2], theta[1::2]), axis=-1)

    def random_point(self, rng):
        coords = np.empty(self.dim)
        coords[0::2] = rng.uniform(-5.0, 5.0, self.n_pairs)
        coords[1::2] = np.exp(rng.uniform(np.log(0.5), np.log(3.0), self.n_pairs))
        return self.point(coords)


@dataclass(frozen=True, eq=False)
class GaussianPairModel(GaussianProductModel):
    """A single univariate Gaussian ``(mu, sigma)``: the 2-D building block."""

    n_particles: int = field(default=1, init=False)
    name: str = field(default="gaussian_pair", init=False)

    @property
    def n_pairs(self) -> int:
        return 1

    @property
    def micro_dim(self) -> int:
        return 1

    @property
    def dim(self) -> int:
        return 2


# entries of the correlated metric as (i, j, coefficient(r), power of sx, power of sy)
def _correlated_terms(r):
    a = 1.0 / (1.0 - r * r)
    return (
        (0, 0, a, -2, 0),
        (0, 2, -a * r, -1, -1),
        (1, 1, a * (2.0 - r * r), -2, 0),
        (1, 3, -a * r * r, -1, -1),
        (2, 2, a, 0, -2),
        (3, 3, a * (2.0 - r * r), 0, -2),
    )


@dataclass(frozen=True, eq=False)
class CorrelatedGaussianModel(StatisticalModel):
    """Bivariate Gaussian with fixed correlation ``r``; coordinates
    ``(mu_x, sigma_x, mu_y, sigma_y)``."""

    r: float
    sigma_bounds: tuple = DEFAULT_SIGMA_BOUNDS
    name: str = field(default="correlated_gaussian", init=False)
    micro_dim: int = field(default=2, init=False)

    def __post_init__(self):
        if not -1.0 < self.r < 1.0:
            raise DomainError(f"correlation must lie in (-1, 1), got {self.r}")

    @property
    def dim(self):
        return 4

    @property
    def labels(self):
        return _pair_labels(2)

    @property
    def lower(self):
        return _pair_bounds(2, self.sigma_bounds)[0]

    @property
    def upper(self):
        return _pair_bounds(2, self.sigma_bounds)[1]

    def metric_jet(self, theta, order=2):
        theta = np.asarray(theta, dtype=float)
        sx, sy = theta[1], theta[3]
        g = np.zeros((4, 4))
        dg = np.zeros((4, 4, 4)) if order >= 1 else None
        ddg = np.zeros((4, 4, 4, 4)) if order >= 2 else None
        for i, j, c, p, q in _correlated_terms(self.r):
            v = c * sx**p * sy**q
            pairs = {(i, j), (j, i)}
            for a, b in pairs:
                g[a, b] = v
                if order >= 1:
                    dg[1, a, b] = v * p / sx
                    dg[3, a, b] = v * q / sy
                if order >= 2:
                    ddg[1, 1, a, b] = v * p * (p - 1) / sx**2
                    ddg[3, 3, a, b] = v * q * (q - 1) / sy**2
                    ddg[1, 3, a, b] = ddg[3, 1, a, b] = v * p * q / (sx * sy)
        return g, dg, ddg

    def covariance(self, theta):
        sx, sy = theta[1], theta[3]
        return np.array([[sx * sx, self.r * sx * sy], [self.r * sx * sy, sy * sy]])

    def log_pdf(self, x, theta):
        x = np.asarray(x)
        mx, sx, my, sy = (np.asarray(theta)[k] for k in range(4))
        r = self.r
        u = (x[..., 0] - mx) / sx
        v = (x[..., 1] - my) / sy
        q = (u * u - 2 * r * u * v + v * v) / (1 - r * r)
        return -np.log(2 * np.pi * sx * sy * np.sqrt(1 - r * r)) - 0.5 * q

    def random_point(self, rng):
        mu = rng.uniform(-5.0, 5.0, 2)
        sg = np.exp(rng.uniform(np.log(0.5), np.log(3.0), 2))
        return self.point([mu[0], sg[0], mu[1], sg[1]])


@dataclass(frozen=True, eq=False)
class JacobiIHOModel(StatisticalModel):
    """Jacobi metric ``g = (E - Phi) * identity`` of uncoupled inverted
    oscillators with potential ``Phi = -1/2 sum w_j^2 theta_j^2``.

    ``energy`` is 1 throughout the package; other values are accepted so that
    zero-energy (pure exponential) orbits can be geometrised as well.
    """

    frequencies: tuple
    energy: float = 1.0
    name: str = field(default="iho", init=False)

    def __post_init__(self):
        freqs = tuple(float(w) for w in np.atleast_1d(self.frequencies))
        if not freqs:
            raise DimensionMismatch("at least one frequency is required")
        if any(w < 0 or not np.isfinite(w) for w in freqs):
            raise DomainError("frequencies must be finite and non-negative")
        object.__setattr__(self, "frequencies", freqs)

    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.frequencies)

    @property
    def dim(self):
        return len(self.frequencies)

    @property
    def labels(self):
        return (Label.LAGRANGIAN,) * self.dim

    @property
    def lower(self):
        return np.full(self.dim, -np.inf)

    @property
    def upper(self):
        return np.full(self.dim, np.inf)

    def potential(self, theta):
        theta = np.asarray(theta)
        return -0.5 * np.sum(self.omega**2 * theta**2, axis=-1)

    def force(self, theta):
        """Newtonian force ``-grad Phi``."""
        return self.omega**2 * np.asarray(theta)

    def conformal_factor(self, theta):
        return self.energy - self.potential(theta)

    def metric_jet(self, theta, order=2):
        theta = np.asarray(theta, dtype=float)
        n = self.dim
        eye = np.eye(n)
        g = self.conformal_factor(theta) * eye
        dg = ddg = None
        if order >= 1:
            dg = (self.omega**2 * theta)[:, None, None] * eye
        if order >= 2:
            ddg = np.zeros((n, n, n, n))
            idx = np.arange(n)
            ddg[idx, idx] = (self.omega**2)[:, None, None] * eye
        return g, dg, ddg

    def random_point(self, rng):
        return self.point(rng.uniform(-2.0, 2.0, self.dim))


def build_model(config: dict) -> StatisticalModel:
    """Construct a model from a config mapping (``model = "..."`` plus parameters)."""
    kind = config.get("model")
    if kind == "gaussian_product":
        return GaussianProductModel(int(config.get("n_particles", 1)))
    if kind == "gaussian_pair":
        return GaussianPairModel()
    if kind == "correlated_gaussian":
        return CorrelatedGaussianModel(float(config.get("r", 0.0)))
    if kind == "iho":
        freqs = config.get("frequencies")
        if freqs is None:
            raise DomainError("iho model requires 'frequencies'")
        return JacobiIHOModel(tuple(freqs), float(config.get("energy", 1.0)))
    raise DomainError(f"unknown model {kind!r}")


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def metric_at(model: StatisticalModel, point) -> MetricTensor:
    """Closed-form metric at a validated point.

    Raises:
        DomainError: a standard deviation is not positive or a bound is violated.
        DimensionMismatch: wrong number of coordinates.
        SingularMetric: the metric is not positive-definite.
    """
    point = model.point(point)
    g = model.metric(point.coords)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric(f"metric not positive-definite at {point.coords}") from exc
    return MetricTensor(g, point)


def pdf(model: StatisticalModel, micro, point) -> float:
    point = model.point(point)
    micro = np.asarray(micro, dtype=float)
    if model.micro_dim is None:
        raise TypeError(f"{model.name} has no probability density")
    if micro.shape[-1] != model.micro_dim:
        raise DimensionMismatch(f"microstate must have {model.micro_dim} components")
    return float(np.exp(model.log_pdf(micro, point.coords)))


def _complex_step_scores(logpdf, x, theta):
    """Scores d log p / d theta_k at nodes ``x``; shape ``(n_nodes, dim)``."""
    theta = np.asarray(theta, dtype=complex)
    out = np.empty((x.shape[0], theta.size))
    for k in range(theta.size):
        tp = theta.copy()
        tp[k] += 1j * COMPLEX_STEP
        out[:, k] = np.imag(logpdf(x, tp)) / COMPLEX_STEP
    return out


def _hermite_rule(order):
    z, w = np.polynomial.hermite_e.hermegauss(order)
    return z, w / np.sqrt(2 * np.pi)


def _fisher_gaussian_product(model, theta, order):
    d = model.dim
    z, w = _hermite_rule(order)
    g = np.zeros((d, d))
    mean_scores = []
    for p in range(model.n_pairs):
        mu, sg = theta[2 * p], theta[2 * p + 1]
        x = (mu + sg * z)[:, None]
        s = _complex_step_scores(lambda xx, t: _gauss_logpdf(xx[:, 0], t[0], t[1]), x, [mu, sg])
        g[2 * p:2 * p + 2, 2 * p:2 * p + 2] = (w[:, None] * s).T @ s
        mean_scores.append(w @ s)
    # factors are independent: cross blocks are products of expected scores
    for p in range(model.n_pairs):
        for q in range(model.n_pairs):
            if p != q:
                g[2 * p:2 * p + 2, 2 * q:2 * q + 2] = np.outer(mean_scores[p], mean_scores[q])
    return g


def _fisher_correlated(model, theta, order):
    z, w = _hermite_rule(order)
    zz = np.stack(np.meshgrid(z, z, indexing="ij"), axis=-1).reshape(-1, 2)
    ww = np.outer(w, w).reshape(-1)
    chol = np.linalg.cholesky(model.covariance(theta))
    x = np.array([theta[0], theta[2]]) + zz @ chol.T
    s = _complex_step_scores(model.log_pdf, x, theta)
    return (ww[:, None] * s).T @ s


def _jacobi_metric_from_force(model, theta, order):
    # potential recovered from the force field by a line integral, then the
    # Maupertuis kinetic form (E - Phi) |v|^2 gives the metric
    t, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    work = sum(wi * model.force(ti * theta) @ theta for ti, wi in zip(t, w))
    phi = -work
    return (model.energy - phi) * np.eye(model.dim)


def fisher_rao_numeric(
    model: StatisticalModel, point, quadrature_order: int = 40, tol: float = 1e-10
) -> MetricTensor:
    """Metric from its defining integral, evaluated by Gaussian quadrature.

    Scores are complex-step derivatives of ``log_pdf`` so the result does not
    share code with the closed forms.  For the Jacobi oscillator model, which
    carries no density, the metric is rebuilt from the Newtonian force field
    instead (potential by Gauss-Legendre line integral, then the kinetic form).

    Raises:
        QuadratureNotConverged: orders ``q`` and ``q + 8`` disagree beyond ``tol``.
    """
    if quadrature_order < 20:
        raise ValueError("quadrature_order must be at least 20")
    point = model.point(point)
    theta = point.coords
    if isinstance(model, GaussianProductModel):
        rule = _fisher_gaussian_product
    elif isinstance(model, CorrelatedGaussianModel):
        rule = _fisher_correlated
    elif isinstance(model, JacobiIHOModel):
        rule = _jacobi_metric_from_force
    else:
        raise TypeError(f"no quadrature rule for {type(model).__name__}")
    g1 = rule(model, theta, quadrature_order)
    g2 = rule(model, theta, quadrature_order + 8)
    scale = max(1.0, float(np.abs(g2).max()))
    if np.abs(g1 - g2).max() > tol * scale:
        raise QuadratureNotConverged(
            f"orders {quadrature_order} and {quadrature_order + 8} differ by {np.abs(g1 - g2).max():.3g}"
        )
    g2 = 0.5 * (g2 + g2.T)
    return MetricTensor(g2, point)


def _hermite4(z):
    return z**4 - 6 * z**2 + 3


def _box_rule(center, width, order):
    t, w = np.polynomial.legendre.leggauss(order)
    return center + 0.5 * width * t, 0.5 * width * w


def _check_prior(width, sigma):
    clipped = erfc(0.5 * width / (sigma * np.sqrt(2.0)))
    if clipped > 1e-12:
        raise PriorTooNarrow(f"prior of width {width} clips {clipped:.3g} of the mass (sigma={sigma})")


def _neg_p_log_p(p, log_prior):
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(p > 0, p * (np.log(p) - log_prior), 0.0)
    return -v


def relative_entropy(
    model: StatisticalModel,
    point,
    prior_width: float | None = None,
    perturbation: float = 0.0,
    order: int = 200,
) -> float:
    """``S = -int P log(P / m)`` with ``m`` uniform on a box of side ``prior_width``.

    The box is centred on each mean.  ``perturbation`` multiplies every
    factor density by ``1 + eps * He4(z)``; the fourth Hermite polynomial is
    orthogonal to ``1, z, z^2`` so normalisation, mean and variance are kept.
    Default width is ``20 * max(sigma)``.
    """
    point = model.point(point)
    theta = point.coords
    if isinstance(model, GaussianProductModel):
        sigmas = theta[1::2]
        width = 20.0 * sigmas.max() if prior_width is None else float(prior_width)
        total = 0.0
        for mu, sg in zip(theta[0::2], sigmas):
            _check_prior(width, sg)
            x, w = _box_rule(mu, width, order)
            z = (x - mu) / sg
            p = np.exp(_gauss_logpdf(x, mu, sg)) * (1.0 + perturbation * _hermite4(z))
            total += w @ _neg_p_log_p(p, -np.log(width))
        return float(total)
    if isinstance(model, CorrelatedGaussianModel):
        mx, sx, my, sy = theta
        width = 20.0 * max(sx, sy) if prior_width is None else float(prior_width)
        _check_prior(width, sx)
        _check_prior(width, sy)
        xs, wx = _box_rule(mx, width, order)
        ys, wy = _box_rule(my, width, order)
        X = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
        p = np.exp(model.log_pdf(X, theta)) * (1.0 + perturbation * _hermite4((X[..., 0] - mx) / sx))
        return float(wx @ _neg_p_log_p(p, -2 * np.log(width)) @ wy)
    raise TypeError(f"{model.name} has no probability density")
