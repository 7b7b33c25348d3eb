"""Config-driven experiment runner.

A scenario is one TOML file of flat keys::

    name = "ige_n1"
    kind = "IGE"
    n_particles = 1
    lambda = 1.0
    window = [5.0, 10.0]

A sweep file lists scenario files: ``scenarios = ["a.toml", "b.toml"]``.
Every scenario produces claims (predicted, measured, tolerance, pass) and
CSV artifacts; ``emit_report`` folds results into one deterministic JSON.
"""
from __future__ import annotations

import argparse
import enum
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import dynamics, geometry, ige, iho
from .errors import ConfigParseError, IgdynError, ScenarioFailed
from .models import build_model

SCHEMA_VERSION = 1


class Kind(str, enum.Enum):
    CURVATURE = "CURVATURE"
    GEODESIC = "GEODESIC"
    JLC = "JLC"
    IGE = "IGE"
    IHO_ENTROPY = "IHO_ENTROPY"
    APPENDIX_SWEEP = "APPENDIX_SWEEP"


@dataclass(frozen=True)
class Claim:
    name: str
    predicted: float
    measured: float
    tolerance: float
    relative: bool = False

    @property
    def error(self) -> float:
        diff = abs(self.measured - self.predicted)
        return diff / abs(self.predicted) if self.relative else diff

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error) and self.error <= self.tolerance)

    def as_dict(self) -> dict:
        return {"name": self.name, "predicted": self.predicted, "measured": self.measured,
                "tolerance": self.tolerance, "relative_error" if self.relative else "abs_error":
                self.error, "pass": self.passed}


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: Kind
    params: dict
    seed: int = 0
    output_dir: str | None = None


@dataclass
class ScenarioResult:
    name: str
    kind: str
    seed: int
    claims: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def as_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "seed": self.seed,
                "claims": [c.as_dict() for c in self.claims],
                "artifacts": sorted(self.artifacts), "info": self.info, "pass": self.passed}


# -- parsing -------------------------------------------------------------------

_POSITION = re.compile(r"line (\d+), column (\d+)")


def parse_config(text: str) -> Scenario:
    """Parse one scenario.

    Raises:
        ConfigParseError: malformed TOML, missing keys or an inconsistent window.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = _POSITION.search(str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ConfigParseError(str(exc), line, col) from exc
    if not data:
        raise ConfigParseError("empty config", 1, 1)
    if "kind" not in data:
        raise ConfigParseError("missing required key 'kind'", 1, 1)
    try:
        kind = Kind(str(data["kind"]).upper())
    except ValueError as exc:
        raise ConfigParseError(f"unknown kind {data['kind']!r}", _key_line(text, "kind"), 1) from exc
    params = {k: v for k, v in data.items() if k not in {"name", "kind", "seed", "output_dir"}}
    window = params.get("window")
    tau_max = params.get("tau_max")
    if window is not None:
        if len(window) != 2 or not window[0] < window[1]:
            raise ConfigParseError("window must be [lo, hi] with lo < hi", _key_line(text, "window"), 1)
        if window[0] < 0 or (tau_max is not None and window[1] > tau_max):
            raise ConfigParseError("window must lie inside [0, tau_max]", _key_line(text, "window"), 1)
    return Scenario(str(data.get("name", kind.value.lower())), kind, params,
                    int(data.get("seed", 0)), data.get("output_dir"))


def _key_line(text, key):
    for i, line in enumerate(text.splitlines(), 1):
        if line.strip().startswith(key):
            return i
    return None


# -- scenario kinds ------------------------------------------------------------


def _predicted_curvature(model, theta):
    name = model.name
    if name == "gaussian_product":
        return -3.0 * model.n_particles
    if name == "gaussian_pair":
        return -1.0
    if name == "correlated_gaussian":
        return geometry.correlated_ricci_closed_form(model.r)
    if name == "iho" and model.dim == 2:
        return iho.ricci_scalar_iho_2set(*model.omega, *theta)
    raise ScenarioFailed(name, "no curvature prediction for this model")


def _run_curvature(sc: Scenario, out: Path | None) -> ScenarioResult:
    model = build_model(sc.params)
    rng = np.random.default_rng(sc.seed)
    backend = geometry.Backend(sc.params.get("backend", "finite_diff"))
    n_points = int(sc.params.get("n_points", 10))
    tol = float(sc.params.get("tolerance", 1e-6))
    rows, worst, measured = [], 0.0, []
    for _ in range(n_points):
        p = model.random_point(rng)
        r = geometry.ricci_scalar(model, p, backend, float(sc.params.get("h", geometry.DEFAULT_STEP)))
        pred = _predicted_curvature(model, p.coords)
        worst = max(worst, abs(r - pred))
        measured.append(r)
        rows.append([*p.coords, r, pred])
    res = ScenarioResult(sc.name, sc.kind.value, sc.seed)
    pred0 = _predicted_curvature(model, rows[0][:model.dim])
    res.claims.append(Claim("ricci_scalar", float(pred0), float(measured[0]), tol))
    res.claims.append(Claim("max_abs_deviation", 0.0, float(worst), tol))
    if out is not None:
        header = [f"theta_{i}" for i in range(model.dim)] + ["ricci_scalar", "predicted"]
        res.artifacts.append(_write_rows(out / f"{sc.name}_curvature.csv", header, rows))
    return res


def _closed_form_params(p):
    lam = float(p.get("lambda", 1.0))
    return dynamics.ClosedFormGeodesicParams(float(p.get("Lambda", lam)), lam, float(p.get("C", 0.0)))


def _run_geodesic(sc: Scenario, out) -> ScenarioResult:
    params = _closed_form_params(sc.params)
    model = build_model({"model": "gaussian_pair", **sc.params})
    tau_max = float(sc.params.get("tau_max", 5.0))
    traj = dynamics.integrate_geodesic(model, dynamics.closed_form_state(params, model.dim // 2),
                                       tau_max)
    mu, sigma = dynamics.closed_form_geodesic(params, traj.taus)
    err = max(np.abs(traj.thetas[:, 0::2] - mu[:, None]).max(),
              np.abs(traj.thetas[:, 1::2] - sigma[:, None]).max())
    kin = traj.kinetic()
    res = ScenarioResult(sc.name, sc.kind.value, sc.seed)
    res.claims.append(Claim("closed_form_max_error", 0.0, float(err), float(sc.params.get("tolerance", 1e-6))))
    res.claims.append(Claim("kinetic_drift", 0.0, float(np.ptp(kin) / kin[0]), 1e-8))
    res.claims.append(Claim("closed_form_residual", 0.0,
                            dynamics.closed_form_residual(params, traj.taus), 1e-9))
    if out is not None:
        path = out / f"{sc.name}_trajectory.csv"
        traj.to_csv(path)
        res.artifacts.append(str(path))
    return res


def _run_jlc(sc: Scenario, out) -> ScenarioResult:
    params = _closed_form_params(sc.params)
    model = build_model({"model": "gaussian_product", **sc.params})
    lam = params.lam
    window = tuple(sc.params.get("window", (5.0 / lam, 10.0 / lam)))
    tau_max = float(sc.params.get("tau_max", window[1]))
    traj = dynamics.integrate_geodesic(model, dynamics.closed_form_state(params, model.dim // 2),
                                       tau_max)
    J0, DJ0 = dynamics.closed_form_jacobi_initial(model, params)
    jf = dynamics.integrate_jlc(traj, J0, DJ0)
    est = dynamics.lyapunov_estimate(jf.taus, jf.intensity, window)
    res = ScenarioResult(sc.name, sc.kind.value, sc.seed)
    res.claims.append(Claim("jacobi_rate", lam, est.lambda_j, float(sc.params.get("tolerance", 0.05)), True))
    res.info = {"r_squared": est.r_squared,
                "prefactor": float(jf.intensity[-1] * np.exp(-lam * jf.taus[-1]))}
    if out is not None:
        path = out / f"{sc.name}_jacobi.csv"
        jf.to_csv(path)
        res.artifacts.append(str(path))
    return res


def _ige_result(sc, report, series, out, tol):
    res = ScenarioResult(sc.name, sc.kind.value, sc.seed)
    res.claims.append(Claim("entropy_slope", report.predicted_slope, report.fitted_slope, tol, True))
    res.info = report.as_dict()
    if out is not None and series is not None:
        path = out / f"{sc.name}_volume.csv"
        series.to_csv(path)
        res.artifacts.append(str(path))
    return res


def _run_ige(sc: Scenario, out) -> ScenarioResult:
    p = sc.params
    N = int(p.get("n_particles", p.get("N", 1)))
    lam = float(p.get("lambda", 1.0))
    window = tuple(p.get("window", (5.0 / lam, 10.0 / lam)))
    tau_max = float(p.get("tau_max", window[1]))
    series = ige.gaussian_volume_series(N, lam, p.get("Lambda"), float(p.get("C", 0.0)), tau_max,
                                        int(p.get("points_per_unit", ige.POINTS_PER_UNIT)))
    report = ige.ige(series, window, 3 * N * lam, sc.name)
    return _ige_result(sc, report, series, out, float(p.get("tolerance", 0.05)))


def _run_iho_entropy(sc: Scenario, out) -> ScenarioResult:
    p = sc.params
    w1, w2 = (float(x) for x in p["frequencies"])
    report = ige.iho_2set_ige(w1, w2, p.get("Xi", 1.0), p.get("window"),
                              int(p.get("points_per_unit", ige.POINTS_PER_UNIT)))
    return _ige_result(sc, report, None, out, float(p.get("tolerance", 0.05)))


def _run_appendix(sc: Scenario, out) -> ScenarioResult:
    p = sc.params
    ns = p.get("n", [1])
    ns = ns if isinstance(ns, list) else [ns]
    form = p.get("form", "continuum")
    res = ScenarioResult(sc.name, sc.kind.value, sc.seed)
    tol = float(p.get("tolerance", 0.05))
    for n in ns:
        report = ige.ige_iho_appendix(int(n), p.get("frequencies"), float(p.get("Xi", 1.0)),
                                      form=form, seed=sc.seed)
        if form == "continuum":
            res.claims.append(Claim(f"slope_over_n_xi_Omega[n={n}]", 1.5,
                                    report.extras["slope_over_n_xi_Omega"], tol, True))
        else:
            res.claims.append(Claim(f"entropy_slope[n={n}]", report.predicted_slope,
                                    report.fitted_slope, tol, True))
        res.info[f"n={n}"] = report.as_dict()
    return res


_RUNNERS = {
    Kind.CURVATURE: _run_curvature,
    Kind.GEODESIC: _run_geodesic,
    Kind.JLC: _run_jlc,
    Kind.IGE: _run_ige,
    Kind.IHO_ENTROPY: _run_iho_entropy,
    Kind.APPENDIX_SWEEP: _run_appendix,
}


def _write_rows(path: Path, header, rows) -> str:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    return str(path)


def run_scenario(config_text: str, output_dir: str | os.PathLike | None = None) -> ScenarioResult:
    """Parse and execute one scenario, writing artifacts to ``output_dir`` if given.

    Raises:
        ConfigParseError: the config cannot be parsed.
        ScenarioFailed: the library raised while running the scenario.
    """
    sc = parse_config(config_text)
    target = output_dir or sc.output_dir
    out = None
    if target is not None:
        out = Path(target)
        out.mkdir(parents=True, exist_ok=True)
    try:
        result = _RUNNERS[sc.kind](sc, out)
    except ScenarioFailed:
        raise
    except (IgdynError, KeyError, ValueError, TypeError) as exc:
        raise ScenarioFailed(sc.name, exc) from exc
    # artifacts are named relative to the output directory so reports do not depend on it
    result.artifacts = [Path(a).name for a in result.artifacts]
    return result


def emit_report(results) -> str:
    """Deterministic JSON report: sorted keys, scenarios ordered by name."""
    results = list(results)
    if not results:
        raise ValueError("at least one scenario result is required")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenarios": [r.as_dict() for r in sorted(results, key=lambda r: r.name)],
        "all_pass": all(r.passed for r in results),
    }
    return json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# -- commands ------------------------------------------------------------------


def _run_file(args):
    path, out = args
    return run_scenario(Path(path).read_text(), out)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("IGDYN_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def _finish(results, out: Path | None) -> int:
    report = emit_report(results)
    if out is not None:
        (out / "report.json").write_text(report)
    sys.stdout.write(report)
    return 0 if all(r.passed for r in results) else 1


def cmd_run(ns) -> int:
    out = Path(ns.out) if ns.out else None
    result = run_scenario(Path(ns.config).read_text(), out)
    return _finish([result], out)


def cmd_sweep(ns) -> int:
    listing = Path(ns.listing)
    try:
        data = tomllib.loads(listing.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(str(exc)) from exc
    files = data.get("scenarios")
    if not files:
        raise ConfigParseError("sweep file needs a non-empty 'scenarios' list", 1, 1)
    out = Path(ns.out) if ns.out else None
    jobs = [(str(listing.parent / f), str(out) if out else None) for f in files]
    workers = min(_threads(), len(jobs))
    if workers == 1:
        results = [_run_file(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_file, jobs))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    return _finish(results, out)


def cmd_check(_ns) -> int:
    from .acceptance import run_all

    results = run_all()
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="igdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario file")
    run.add_argument("config")
    run.add_argument("--out", help="directory for CSV artifacts and report.json")
    run.set_defaults(func=cmd_run)
    sweep = sub.add_parser("sweep", help="run every scenario listed in a sweep file")
    sweep.add_argument("listing")
    sweep.add_argument("--out")
    sweep.set_defaults(func=cmd_sweep)
    check = sub.add_parser("check", help="run the built-in acceptance suite")
    check.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except ConfigParseError as exc:
        where = f" (line {exc.line}, column {exc.column})" if exc.line else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return 2
    except ScenarioFailed as exc:
        print(f"scenario failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
