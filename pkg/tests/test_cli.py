import json
from pathlib import Path

import pytest

from igdyn import cli
from igdyn.errors import ConfigParseError, ScenarioFailed

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_curvature_scenario_reports_minus_nine():
    res = cli.run_scenario('kind = "CURVATURE"\nmodel = "gaussian_product"\nn_particles = 3\n')
    claim = res.claims[0]
    assert claim.predicted == -9.0
    assert claim.measured == pytest.approx(-9.0, abs=1e-6)
    assert res.passed


def test_ige_scenario_slope():
    res = cli.run_scenario('kind = "IGE"\nN = 1\nlambda = 1.0\ntau_max = 10.0\nwindow = [5.0, 10.0]\n')
    claim = res.claims[0]
    assert claim.measured == pytest.approx(3.0, rel=0.05)
    assert claim.error < 0.05 and res.passed


@pytest.mark.parametrize("name", ["geodesic_pair", "jlc_gaussian", "iho_entropy", "appendix_sweep"])
def test_example_configs_pass(name, tmp_path):
    res = cli.run_scenario((CONFIGS / f"{name}.toml").read_text(), tmp_path)
    assert res.passed
    for artifact in res.artifacts:
        assert (tmp_path / artifact).exists()


@pytest.mark.parametrize("text", ["", "# only a comment\n"])
def test_empty_config(text):
    with pytest.raises(ConfigParseError):
        cli.parse_config(text)


def test_parse_error_position():
    with pytest.raises(ConfigParseError) as info:
        cli.parse_config('kind = "IGE"\nlambda = = 1\n')
    assert info.value.line == 2


@pytest.mark.parametrize("text", [
    'lambda = 1.0\n',
    'kind = "BOGUS"\n',
    'kind = "IGE"\nwindow = [10.0, 5.0]\n',
    'kind = "IGE"\ntau_max = 8.0\nwindow = [5.0, 10.0]\n',
])
def test_invalid_configs(text):
    with pytest.raises(ConfigParseError):
        cli.parse_config(text)


def test_library_errors_surface_as_scenario_failure():
    with pytest.raises(ScenarioFailed):
        cli.run_scenario('kind = "CURVATURE"\nmodel = "correlated_gaussian"\nr = 1.5\n')


def test_claim_threshold():
    assert cli.Claim("slope", 3.0, 3.0 * 1.04, 0.05, True).passed
    failing = cli.Claim("slope", 3.0, 3.0 * 1.07, 0.05, True)
    assert not failing.passed
    assert failing.as_dict()["pass"] is False


def test_report_is_sorted_and_deterministic(tmp_path):
    texts = [(CONFIGS / f"{n}.toml").read_text() for n in ("ige_gaussian", "geodesic_pair")]
    first = cli.emit_report([cli.run_scenario(t, tmp_path / "a") for t in texts])
    second = cli.emit_report([cli.run_scenario(t, tmp_path / "b") for t in reversed(texts)])
    assert first == second
    doc = json.loads(first)
    assert doc["schema_version"] == 1
    assert [s["name"] for s in doc["scenarios"]] == ["geodesic_pair", "ige_gaussian_n1"]
    assert doc["all_pass"] is True
    for a, b in zip(sorted((tmp_path / "a").iterdir()), sorted((tmp_path / "b").iterdir())):
        assert a.read_bytes() == b.read_bytes()


def test_report_needs_results():
    with pytest.raises(ValueError):
        cli.emit_report([])


def test_main_exit_codes(tmp_path, capsys):
    empty = tmp_path / "empty.toml"
    empty.write_text("")
    assert cli.main(["run", str(empty)]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text('kind = "CURVATURE"\nmodel = "nope"\n')
    assert cli.main(["run", str(bad)]) == 3
    assert cli.main(["run", str(CONFIGS / "ige_gaussian.toml")]) == 0
    failing = tmp_path / "strict.toml"
    failing.write_text('kind = "IGE"\nN = 1\nlambda = 1.0\nwindow = [5.0, 10.0]\ntolerance = 1e-6\n')
    assert cli.main(["run", str(failing)]) == 1
    capsys.readouterr()


def test_sweep(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("IGDYN_THREADS", "1")
    assert cli.main(["sweep", str(CONFIGS / "sweep.toml"), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    names = [s["name"] for s in doc["scenarios"]]
    assert names == sorted(names) and len(names) == 6
    assert json.loads(capsys.readouterr().out) == doc
