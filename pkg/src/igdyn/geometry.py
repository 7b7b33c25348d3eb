"""Curvature of a metric field: Christoffel symbols, Riemann, Ricci, scalar,
sectional curvatures, the projective Weyl tensor and Killing residuals.

Two backends feed the same tensor algebra.  ``ANALYTIC`` takes the metric
jet ``(g, dg, ddg)`` from the field itself; ``FINITE_DIFF`` builds it from
metric evaluations only, with fourth-order central differences of step
``h * max(1, |x_k|)`` for first derivatives and ``CURVATURE_STEP_FACTOR``
times that step for second derivatives (the larger step keeps round-off
of the second difference in check).

Index conventions:

* ``christoffel[r, m, n]`` is ``Gamma^r_{mn}``.
* ``riemann[a, b, r, s]`` is ``R^a_{brs} = d_s Gamma^a_{br} - d_r Gamma^a_{bs}
  + Gamma^a_{ls} Gamma^l_{br} - Gamma^a_{lr} Gamma^l_{bs}``.  This is minus
  the Misner-Thorne-Wheeler tensor.  The Ricci tensor contracts the first and
  last index, which gives the usual sign: the hyperbolic plane has ``R < 0``.
* Sectional curvature ``K(a, b) = R(a, b, a, b) / ((g_ms g_nr - g_mr g_ns) a b a b)``
  is positive on spheres with this convention.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import BoundaryTooClose, DegeneratePlane, SingularMetric
from .models import ParameterPoint

DEFAULT_STEP = 1e-5
CURVATURE_STEP_FACTOR = 100.0


class Backend(str, enum.Enum):
    ANALYTIC = "analytic"
    FINITE_DIFF = "finite_diff"


@dataclass(frozen=True)
class MetricField:
    """A bare metric field ``theta -> g`` with an optional analytic jet.

    Used for fixtures and user-supplied metrics; the models in
    :mod:`igdyn.models` already satisfy the same protocol.
    """

    dim: int
    metric: Callable[[np.ndarray], np.ndarray]
    jet: Callable | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    name: str = "metric_field"

    def metric_jet(self, theta, order=2):
        if self.jet is None:
            raise TypeError(f"{self.name} has no analytic jet; use the finite-difference backend")
        g, dg, ddg = self.jet(np.asarray(theta, dtype=float))
        return g, (dg if order >= 1 else None), (ddg if order >= 2 else None)


def euclidean(dim: int) -> MetricField:
    def jet(theta):
        return np.eye(dim), np.zeros((dim,) * 3), np.zeros((dim,) * 4)

    return MetricField(dim, lambda theta: np.eye(dim), jet, name="euclidean")


def sphere(radius: float = 1.0) -> MetricField:
    """Round 2-sphere in (polar, azimuth) coordinates; ``K = 1 / radius**2``."""
    a2 = radius * radius

    def metric(theta):
        return np.diag([a2, a2 * np.sin(theta[0]) ** 2])

    def jet(theta):
        dg = np.zeros((2, 2, 2))
        ddg = np.zeros((2, 2, 2, 2))
        dg[0, 1, 1] = a2 * np.sin(2 * theta[0])
        ddg[0, 0, 1, 1] = 2 * a2 * np.cos(2 * theta[0])
        return metric(theta), dg, ddg

    return MetricField(2, metric, jet, lower=np.array([0.0, -np.inf]),
                       upper=np.array([np.pi, np.inf]), name="sphere")


def hyperbolic_plane(K: float = -1.0) -> MetricField:
    """Upper half-plane ``(dx^2 + dy^2) / (-K y^2)`` of constant curvature ``K < 0``."""
    if K >= 0:
        raise ValueError("hyperbolic plane needs K < 0")
    c = -1.0 / K

    def metric(theta):
        return c / theta[1] ** 2 * np.eye(2)

    def jet(theta):
        y = theta[1]
        dg = np.zeros((2, 2, 2))
        ddg = np.zeros((2, 2, 2, 2))
        dg[1] = -2 * c / y**3 * np.eye(2)
        ddg[1, 1] = 6 * c / y**4 * np.eye(2)
        return metric(theta), dg, ddg

    return MetricField(2, metric, jet, lower=np.array([-np.inf, 0.0]),
                       upper=np.array([np.inf, np.inf]), name="hyperbolic_plane")


def _coords(point) -> np.ndarray:
    if isinstance(point, ParameterPoint):
        return point.coords
    return np.asarray(point, dtype=float).reshape(-1)


def _metric_fn(field):
    return field.metric if hasattr(field, "metric") else field


def _bounds(field, dim):
    lo = getattr(field, "lower", None)
    hi = getattr(field, "upper", None)
    lo = np.full(dim, -np.inf) if lo is None else np.asarray(lo, dtype=float)
    hi = np.full(dim, np.inf) if hi is None else np.asarray(hi, dtype=float)
    return lo, hi


def _diff1(g_at, e, base=0.0):
    """Fourth-order central difference along the step vector ``e``."""
    h = np.abs(e).max()
    return (
        -g_at(base + 2 * e) + 8 * g_at(base + e) - 8 * g_at(base - e) + g_at(base - 2 * e)
    ) / (12 * h)


def finite_difference_jet(field, point, h: float = DEFAULT_STEP, order: int = 2):
    """Metric jet from central differences of metric evaluations.

    Raises:
        BoundaryTooClose: a stencil point would be within ``2 * step`` of a bound.
    """
    x = _coords(point)
    g_fn = _metric_fn(field)
    d = x.size
    steps = h * np.maximum(1.0, np.abs(x))
    big = CURVATURE_STEP_FACTOR * steps if order >= 2 else steps
    lo, hi = _bounds(field, d)
    reach = 2 * big if order >= 2 else 2 * steps
    if np.any(x - reach <= lo) or np.any(x + reach >= hi):
        raise BoundaryTooClose(f"point {x} is within two finite-difference steps of the boundary")

    def g_at(offsets):
        return np.asarray(g_fn(x + offsets), dtype=float)

    g0 = g_at(np.zeros(d))
    eye = np.eye(d)
    dg = None
    if order >= 1:
        dg = np.empty((d, d, d))
        for k in range(d):
            dg[k] = _diff1(g_at, steps[k] * eye[k])
    ddg = None
    if order >= 2:
        ddg = np.empty((d, d, d, d))
        for k in range(d):
            ek = big[k] * eye[k]
            ddg[k, k] = (
                -g_at(2 * ek) + 16 * g_at(ek) - 30 * g0 + 16 * g_at(-ek) - g_at(-2 * ek)
            ) / (12 * big[k] ** 2)
            for l in range(k + 1, d):
                el = big[l] * eye[l]
                v = _diff1(lambda off: _diff1(g_at, el, off), ek)
                ddg[k, l] = ddg[l, k] = v
    return g0, dg, ddg


def metric_jet(field, point, backend=Backend.ANALYTIC, h=DEFAULT_STEP, order=2):
    backend = Backend(backend)
    if backend is Backend.ANALYTIC:
        return field.metric_jet(_coords(point), order=order)
    return finite_difference_jet(field, point, h, order)


def _inverse(g):
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric("metric is not invertible") from exc
    if not np.all(np.isfinite(ginv)) or np.abs(g @ ginv - np.eye(g.shape[0])).max() > 1e-6:
        raise SingularMetric("metric is numerically singular")
    return ginv


def christoffel_from_jet(g, dg, ddg=None):
    """Return ``(Gamma, dGamma)``; ``dGamma[l, r, m, n] = d_l Gamma^r_{mn}``."""
    ginv = _inverse(g)
    # A[s, m, n] = d_m g_sn + d_n g_ms - d_s g_mn
    A = np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg
    gamma = 0.5 * np.einsum("rs,smn->rmn", ginv, A, optimize=True)
    if ddg is None:
        return gamma, None
    dginv = -np.einsum("ra,lab,bs->lrs", ginv, dg, ginv, optimize=True)
    # dA[l, s, m, n] = d_l A[s, m, n]
    dA = (
        np.transpose(ddg, (0, 2, 1, 3))
        + np.transpose(ddg, (0, 2, 3, 1))
        - ddg
    )
    dgamma = 0.5 * (
        np.einsum("lrs,smn->lrmn", dginv, A, optimize=True) + np.einsum("rs,lsmn->lrmn", ginv, dA)
    )
    return gamma, dgamma


def riemann_from_christoffel(gamma, dgamma):
    # R^a_{brs} = d_s G^a_{br} - d_r G^a_{bs} + G^a_{ls} G^l_{br} - G^a_{lr} G^l_{bs}
    dterm = np.transpose(dgamma, (1, 2, 3, 0))  # [a, b, r, s] = d_s G^a_{br}
    quad = np.einsum("als,lbr->abrs", gamma, gamma, optimize=True)
    return dterm - np.transpose(dterm, (0, 1, 3, 2)) + quad - np.transpose(quad, (0, 1, 3, 2))


def christoffel(field, point, backend=Backend.ANALYTIC, h=DEFAULT_STEP) -> np.ndarray:
    g, dg, _ = metric_jet(field, point, backend, h, order=1)
    return christoffel_from_jet(g, dg)[0]


@dataclass(frozen=True, eq=False)
class CurvatureBundle:
    metric: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    weyl_projective: np.ndarray

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    @property
    def inverse_metric(self) -> np.ndarray:
        return np.linalg.inv(self.metric)

    @property
    def riemann_lowered(self) -> np.ndarray:
        """``R_{mnrs} = g_{ma} R^a_{nrs}``."""
        return np.einsum("ma,anrs->mnrs", self.metric, self.riemann, optimize=True)

    def double_trace(self) -> float:
        """``g^{ms} g^{nr} R_{mnrs}``; equals the Ricci scalar in this convention."""
        gi = self.inverse_metric
        return float(np.einsum("mnrs,ms,nr->", self.riemann_lowered, gi, gi, optimize=True))


def _weyl(g, riem_low, scalar):
    n = g.shape[0]
    # sign chosen so that W vanishes on constant-curvature spaces
    gg = np.einsum("ns,mr->mnrs", g, g, optimize=True) - np.einsum("nr,ms->mnrs", g, g)
    return riem_low + scalar / (n * (n - 1)) * gg


def curvature(field, point, backend=Backend.ANALYTIC, h=DEFAULT_STEP) -> CurvatureBundle:
    g, dg, ddg = metric_jet(field, point, backend, h, order=2)
    gamma, dgamma = christoffel_from_jet(g, dg, ddg)
    riem = riemann_from_christoffel(gamma, dgamma)
    ric = np.einsum("abra->br", riem, optimize=True)
    ric = 0.5 * (ric + ric.T)
    scalar = float(np.einsum("br,br->", _inverse(g), ric, optimize=True))
    low = np.einsum("ma,anrs->mnrs", g, riem, optimize=True)
    weyl = _weyl(g, low, scalar) if g.shape[0] >= 2 else np.zeros_like(low)
    return CurvatureBundle(g, gamma, riem, ric, scalar, weyl)


def riemann(field, point, backend=Backend.ANALYTIC, h=DEFAULT_STEP) -> np.ndarray:
    return curvature(field, point, backend, h).riemann


def ricci(field, point, backend=Backend.ANALYTIC, h=DEFAULT_STEP) -> np.ndarray:
    return curvature(field, point, backend, h).ricci


def ricci_scalar(field, point, backend=Backend.ANALYTIC, h=DEFAULT_STEP) -> float:
    return curvature(field, point, backend, h).scalar


def correlated_ricci_closed_form(r: float) -> float:
    """Closed-form scalar curvature of the correlated bivariate model as a function of ``r``.

    Used as the comparison target for the tensor engine; at ``r = 0`` it equals ``-2``.
    """
    return -(8 * (r * r - 2) + 2 * r * r * (3 * r * r - 2)) / (8 * (r * r - 1))


def _sectional(bundle, u, v):
    g = bundle.metric
    num = np.einsum("mnrs,m,n,r,s->", bundle.riemann_lowered, u, v, u, v, optimize=True)
    den = (u @ g @ v) ** 2 - (u @ g @ u) * (v @ g @ v)
    if abs(den) < 1e-14:
        raise DegeneratePlane("vectors span a degenerate plane")
    return float(num / den)


def sectional_curvature(field, point, u, v, backend=Backend.ANALYTIC, h=DEFAULT_STEP) -> float:
    """Sectional curvature of the plane spanned by ``u`` and ``v``.

    Raises:
        DegeneratePlane: ``u`` and ``v`` are (numerically) parallel.
    """
    bundle = curvature(field, point, backend, h)
    return _sectional(bundle, np.asarray(u, dtype=float), np.asarray(v, dtype=float))


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt on coordinate vectors in the ``g`` inner product; columns are the frame."""
    d = g.shape[0]
    frame = np.zeros((d, d))
    for i in range(d):
        e = np.eye(d)[i]
        for j in range(i):
            e = e - (frame[:, j] @ g @ e) * frame[:, j]
        frame[:, i] = e / np.sqrt(e @ g @ e)
    return frame


def sectional_sum(field, point, backend=Backend.ANALYTIC, h=DEFAULT_STEP) -> float:
    """Sum of ``K(e_i, e_j)`` over ordered pairs ``i != j`` of an orthonormal frame."""
    bundle = curvature(field, point, backend, h)
    E = orthonormal_frame(bundle.metric)
    rf = np.einsum("mnrs,mi,nj,ri,sj->ij", bundle.riemann_lowered, E, E, E, E, optimize=True)
    # orthonormal frame: the denominator of K(e_i, e_j) is -1
    k = -rf
    np.fill_diagonal(k, 0.0)
    return float(k.sum())


class WeylResult(NamedTuple):
    tensor: np.ndarray
    max_abs: float


def weyl_projective(field, point, backend=Backend.ANALYTIC, h=DEFAULT_STEP) -> WeylResult:
    w = curvature(field, point, backend, h).weyl_projective
    return WeylResult(w, float(np.abs(w).max()))


def killing_residual(
    field, point, K: Callable, backend=Backend.ANALYTIC, h=DEFAULT_STEP
) -> np.ndarray:
    """Symmetrised covariant derivative ``D_m K_n + D_n K_m`` of a vector field.

    ``K`` maps coordinates to contravariant components; its Jacobian is taken
    by central differences.
    """
    x = _coords(point)
    g, dg, _ = metric_jet(field, x, backend, h, order=1)
    gamma = christoffel_from_jet(g, dg)[0]
    evaluate = getattr(K, "evaluate", K)
    k_up = np.asarray(evaluate(x), dtype=float)
    d = x.size
    steps = h * np.maximum(1.0, np.abs(x))
    dk = np.empty((d, d))  # dk[m, l] = d_m K^l
    for m in range(d):
        e = np.zeros(d)
        e[m] = steps[m]
        dk[m] = (np.asarray(evaluate(x + e)) - np.asarray(evaluate(x - e))) / (2 * steps[m])
    k_low = g @ k_up
    dk_low = np.einsum("mnl,l->mn", dg, k_up, optimize=True) + dk @ g  # d_m K_n
    cov = dk_low - np.einsum("rnm,r->mn", gamma, k_low, optimize=True)
    return cov + cov.T


@dataclass(frozen=True)
class VectorField:
    dim: int
    evaluate: Callable[[np.ndarray], np.ndarray]

    def __call__(self, theta):
        return self.evaluate(theta)
