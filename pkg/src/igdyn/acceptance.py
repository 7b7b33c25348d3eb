"""Built-in acceptance suite: one function per numbered criterion.

Each check returns a :class:`CriterionResult` with the measured numbers, the
pinned tolerance and the wall-clock runtime against its budget.  A criterion
passes only if every sub-check and the runtime budget hold.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, geometry, ige, iho
from .models import (
    CorrelatedGaussianModel,
    GaussianPairModel,
    GaussianProductModel,
    JacobiIHOModel,
    fisher_rao_numeric,
    metric_at,
)

SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: dict = field(default_factory=dict)  # name -> (passed, detail)
    runtime: float = 0.0
    budget: float = np.inf

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values()) and self.runtime < self.budget

    def check(self, name: str, ok: bool, detail: str) -> None:
        self.checks[name] = (bool(ok), detail)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{k}: {d}{'' if ok else ' [x]'}" for k, (ok, d) in self.checks.items()]
        parts.append(f"runtime {self.runtime:.2f}s < {self.budget:g}s")
        return f"[{status}] {self.number:2d}. {self.title} | " + "; ".join(parts)


def _timed(number, title, budget):
    def wrap(fn):
        def run() -> CriterionResult:
            res = CriterionResult(number, title, budget=budget)
            t0 = time.perf_counter()
            fn(res)
            res.runtime = time.perf_counter() - t0
            return res
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


@_timed(1, "curvature constant R = -3N (finite differences)", 10.0)
def curvature_constants(res):
    rng = np.random.default_rng(SEED)
    for N in range(1, 6):
        model = GaussianProductModel(N)
        errs = [abs(geometry.ricci_scalar(model, model.random_point(rng),
                                          geometry.Backend.FINITE_DIFF, 1e-5) + 3 * N)
                for _ in range(20)]
        res.check(f"N={N}", max(errs) < 1e-6, f"max|R+{3 * N}|={max(errs):.2e} (tol 1e-6)")


@_timed(2, "correlated-model curvature vs closed form R(r)", 5.0)
def correlated_curvature(res):
    rng = np.random.default_rng(SEED + 1)
    for r in (-0.9, -0.5, 0.0, 0.5, 0.9):
        model = CorrelatedGaussianModel(r)
        vals = np.array([geometry.ricci_scalar(model, model.random_point(rng)) for _ in range(10)])
        target = geometry.correlated_ricci_closed_form(r)
        err = np.abs(vals - target).max()
        spread = np.ptp(vals)
        res.check(f"r={r:+.1f}", err < 1e-6 and spread < 1e-6,
                  f"R={vals.mean():.6f} target={target:.6f} err={err:.2e} spread={spread:.1e}")
    target0 = geometry.correlated_ricci_closed_form(0.0)
    res.check("R(0)=-2", target0 == -2.0, f"closed form at r=0 is {target0}")


@_timed(3, "numeric Fisher metric vs closed-form metric", 10.0)
def metric_oracle(res):
    rng = np.random.default_rng(SEED + 2)
    families = [GaussianProductModel(1), CorrelatedGaussianModel(0.3), JacobiIHOModel((0.7, 1.3, 0.4))]
    worst = {}
    for k in range(50):
        model = families[k % 3]
        p = model.random_point(rng)
        err = np.abs(fisher_rao_numeric(model, p).components - metric_at(model, p).components).max()
        worst[model.name] = max(worst.get(model.name, 0.0), err)
    for name, err in worst.items():
        res.check(name, err < 1e-8, f"max entry error {err:.2e} (tol 1e-8)")


@_timed(4, "geodesic integration vs closed form", 10.0)
def geodesic_closed_form(res):
    rng = np.random.default_rng(SEED + 3)
    model = GaussianPairModel()
    worst_err = worst_res = 0.0
    for _ in range(20):
        params = dynamics.ClosedFormGeodesicParams(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))
        traj = dynamics.integrate_geodesic(model, dynamics.closed_form_state(params, 1), 5.0,
                                           dynamics.StepControl(n_samples=501))
        mu, sigma = dynamics.closed_form_geodesic(params, traj.taus)
        worst_err = max(worst_err, np.abs(traj.thetas[:, 0] - mu).max(),
                        np.abs(traj.thetas[:, 1] - sigma).max())
        worst_res = max(worst_res, dynamics.closed_form_residual(params, traj.taus))
    res.check("pointwise", worst_err < 1e-6, f"max error {worst_err:.2e} (tol 1e-6)")
    res.check("residual", worst_res < 1e-9, f"max ODE residual {worst_res:.2e} (tol 1e-9)")


@_timed(5, "Jacobi-field growth rate", 30.0)
def jacobi_rate(res):
    lam = 1.0
    params = dynamics.ClosedFormGeodesicParams(lam, lam)
    window = (5.0 / lam, 10.0 / lam)
    for N in (1, 2):
        model = GaussianProductModel(N)
        traj = dynamics.integrate_geodesic(model, dynamics.closed_form_state(params, model.dim // 2),
                                           window[1], dynamics.StepControl(n_samples=501))
        J0, DJ0 = dynamics.closed_form_jacobi_initial(model, params)
        jf = dynamics.integrate_jlc(traj, J0, DJ0)
        est = dynamics.lyapunov_estimate(jf.taus, jf.intensity, window)
        rel = abs(est.lambda_j - lam) / lam
        prefactor = jf.intensity[-1] * np.exp(-lam * jf.taus[-1])
        res.check(f"N={N}", rel < 0.05,
                  f"rate={est.lambda_j:.4f} rel.err={rel:.2%} prefactor={prefactor:.3f} (tol 5%)")
    hp = geometry.hyperbolic_plane(-1.0)
    traj = dynamics.integrate_geodesic(hp, dynamics.GeodesicState(0.0, [0.0, 1.0], [0.0, 1.0]), 5.0)
    jf = dynamics.integrate_jlc(traj, [0.0, 0.0], [1.0, 0.0])
    ref = dynamics.isotropic_jacobi_solution(-1.0, 1.0, jf.taus[1:])
    err = np.max(np.abs(jf.intensity[1:] - ref) / ref)
    res.check("K=-1 sinh", err < 1e-6, f"max rel.err {err:.2e} (tol 1e-6)")


@_timed(6, "entropy slope 3*N*lambda (Gaussian)", 60.0)
def gaussian_entropy(res):
    for N in (1, 2, 3):
        for lam in (0.5, 1.0, 2.0):
            rep = ige.gaussian_ige(N, lam)
            res.check(f"N={N},lam={lam}", rep.relative_error < 0.05,
                      f"{rep.fitted_slope:.3f}/{rep.predicted_slope:g} rel.err={rep.relative_error:.2%}")


@_timed(7, "two-oscillator entropy exponents", 30.0)
def iho_entropy(res):
    for w in (0.5, 1.0):
        rep = ige.iho_2set_ige(w, w)
        rel = abs(rep.fitted_slope - 4 * w) / (4 * w)
        res.check(f"equal w={w}", rel < 0.05, f"slope {rep.fitted_slope:.4f} vs {4 * w:g} ({rel:.2%})")
    w1, w2 = 1.0, 0.01
    rep = ige.iho_2set_ige(w1, w2)
    rel = abs(rep.fitted_slope - 3 * w1) / (3 * w1)
    res.check("dominant w1/w2=100", rel < 0.05, f"slope {rep.fitted_slope:.4f} vs {3 * w1:g} ({rel:.2%})")
    for pair in ((0.5, 0.5), (1.0, 0.01)):
        a = ige.iho_2set_ige(*pair).fitted_slope
        b = ige.iho_2set_ige(*(2 * x for x in pair)).fitted_slope
        dev = abs(b / a - 2.0) / 2.0
        res.check(f"doubling {pair}", dev < 0.01, f"ratio {b / a:.5f} ({dev:.2%}, tol 1%)")


@_timed(8, "appendix slope / (n xi Omega) = 3/2", 30.0)
def appendix_sweep(res):
    for n in (1, 2, 4):
        rep = ige.ige_iho_appendix(n, seed=SEED)
        ratio = rep.extras["slope_over_n_xi_Omega"]
        rel = abs(ratio - 1.5) / 1.5
        res.check(f"n={n}", rel < 0.05, f"ratio {ratio:.4f} ({rel:.2%})")


@_timed(9, "Newton reduction through the Jacobi metric", 10.0)
def newton_reduction(res):
    Xi, tau_end = 0.5, 3.0
    worst = 0.0
    for w1 in (0.5, 1.0, 2.0):
        for w2 in (0.5, 1.0, 2.0):
            model = JacobiIHOModel((w1, w2))
            w = model.omega
            # E = 1 data on the growing direction
            v0 = np.sqrt(1 + 2 / (Xi**2 * np.sum(w**2))) * w * Xi
            theta0 = np.full(2, Xi)
            nt = iho.newton_via_geodesic(model, theta0, v0, tau_end,
                                         step_control=dynamics.StepControl(n_samples=301))
            ref = iho.newtonian_reference(model.frequencies, theta0, nt.taus, velocities=v0)
            scale = np.maximum(1.0, np.abs(ref.thetas).max(axis=1))
            worst = max(worst, float((np.abs(nt.thetas - ref.thetas).max(axis=1) / scale).max()))
    res.check("w in {0.5,1,2}^2", worst < 1e-5, f"max rel.err {worst:.2e} (tol 1e-5)")


@_timed(10, "anisotropy tensor", 10.0)
def anisotropy(res):
    rng = np.random.default_rng(SEED + 9)
    worst = 0.0
    for _ in range(100):
        w = rng.uniform(0.1, 2.0)
        th = rng.uniform(-2.0, 2.0, 2)
        engine = geometry.weyl_projective(JacobiIHOModel((w, w)), th).tensor[0, 1, 0, 1]
        worst = max(worst, abs(engine - iho.weyl_1212_iho(w, *th)))
    res.check("closed form vs engine", worst < 1e-6, f"max |dW1212| {worst:.3e} (tol 1e-6)")
    zero = max(geometry.weyl_projective(JacobiIHOModel((0.0, 0.0)), rng.uniform(-2, 2, 2)).max_abs
               for _ in range(10))
    res.check("W=0 at w=0", zero < 1e-8, f"max|W| {zero:.1e}")
    m = GaussianProductModel(1)
    p = m.point(np.tile([0.0, 1.0], 3))
    wmax = geometry.weyl_projective(m, p).max_abs
    res.check("Gaussian N=1 max|W|>0", wmax > 1e-8, f"max|W| {wmax:.4f}")


CRITERIA = (
    curvature_constants,
    correlated_curvature,
    metric_oracle,
    geodesic_closed_form,
    jacobi_rate,
    gaussian_entropy,
    iho_entropy,
    appendix_sweep,
    newton_reduction,
    anisotropy,
)


def run_all() -> list[CriterionResult]:
    return [fn() for fn in CRITERIA]
