import json
from pathlib import Path

import pytest

from photeleport.cli import main, run_scenario
from photeleport.config import ConfigError, validate_config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def _run(tmp_path, *args):
    code = main(["run", *args, "--out", str(tmp_path)])
    manifest = json.loads((tmp_path / "manifest.json").read_text()) if code != 2 else None
    return code, manifest


def test_algebra_selftest_passes(tmp_path):
    code, m = _run(tmp_path, "--scenario", "algebra-selftest", "--seed", "1")
    assert code == 0 and m["passed"]
    names = {c["name"] for c in m["checks"]}
    assert {"oracle_max_abs_diff", "confluence_max_abs_diff", "positivity_min"} <= names
    assert all(c["invariant"] for c in m["checks"])


def test_polarization_manifest(tmp_path):
    cfg = validate_config("scenario: teleport-polarization\npolarization: {f_plus: 1, f_minus: 0}")
    m = run_scenario(cfg).manifest
    assert set(m["summary"]["channels"]) == {"Psi-", "Psi+", "Phi-", "Phi+"}
    for ch in m["summary"]["channels"].values():
        assert ch["fidelity"] == pytest.approx(1, abs=1e-10)
        assert ch["probability"] == pytest.approx(0.25, abs=1e-10)


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_scenarios_pass(tmp_path, path):
    code, m = _run(tmp_path, "--config", str(path))
    assert code == 0, m["checks"]
    for name in m["outputs"]:
        assert (tmp_path / name).is_file()


def test_manifest_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        main(["run", "--config", str(SCENARIOS / "full_overlap.yaml"), "--seed", "4", "--out", str(out)])
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    assert (a / "outcomes.csv").read_bytes() == (b / "outcomes.csv").read_bytes()


def test_strict_promotes_warnings(tmp_path, capsys):
    path = str(SCENARIOS / "full_overlap.yaml")
    assert _run(tmp_path / "lax", "--config", path)[0] == 0
    assert _run(tmp_path / "strict", "--config", path, "--strict")[0] == 1
    assert "exchange_ratio" in capsys.readouterr().err


def test_failed_check_exits_nonzero(tmp_path, capsys):
    # a sweep step too fine for the peak to land within one step of the cone
    cfg = tmp_path / "c.yaml"
    cfg.write_text("scenario: propagator-sweep\npropagator: {r_step: 0.01, regulator: 0.2}\n")
    code, m = _run(tmp_path / "out", "--config", str(cfg))
    assert code == 1 and not m["passed"]
    assert "light_cone_peak_offset" in capsys.readouterr().err


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("PHOTELEPORT_OUT", str(tmp_path / "env"))
    assert main(["run", "--scenario", "bell-check"]) == 0
    assert (tmp_path / "env" / "manifest.json").is_file()
    assert (tmp_path / "env" / "timings.json").is_file()


def test_run_all(tmp_path):
    code, m = _run(tmp_path, "all")
    assert code == 0
    crit = m["summary"]["criteria"]
    assert [c["number"] for c in crit] == list(range(1, 10))
    assert all(c["passed"] for c in crit)


# -- validation ---------------------------------------------------------------------------

def test_minimal_config_echoes_defaults():
    cfg = validate_config("scenario: teleport-polarization")
    assert cfg.polarization.k1 == (0, 0, 1) and cfg.seed == 1


def test_asymmetric_grid_names_grid_field(tmp_path, capsys):
    cfg = tmp_path / "g.yaml"
    cfg.write_text("scenario: teleport-full\ngrid: {index_range: [-4, 5]}\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "grid.index_range" in capsys.readouterr().err


def test_coincident_momenta_rejected():
    with pytest.raises(ConfigError) as e:
        validate_config("scenario: teleport-polarization\npolarization: {k1: [0,0,2], k2: [0,0,2]}")
    assert "distinct-momenta precondition" in str(e.value)


def test_unknown_key_named():
    with pytest.raises(ConfigError) as e:
        validate_config("scenario: propagator-sweep\npropagator: {epsilonn: 0.1}")
    assert "propagator.epsilonn" in str(e.value) and "unknown key 'epsilonn'" in str(e.value)


def test_errors_are_collected():
    with pytest.raises(ConfigError) as e:
        validate_config("scenario: bell-check\nseed: x\ngauge_angle: y\n")
    assert len(e.value.errors) == 2


@pytest.mark.parametrize("text,value", [
    ("0.6", 0.6), ("[0, 0.8]", 0.8j), ("'0.6+0.8j'", 0.6 + 0.8j),
])
def test_complex_values(text, value):
    body = f"scenario: teleport-polarization\npolarization: {{f_plus: {text}, f_minus: 0}}"
    if abs(value) != 1:
        body = body.replace("f_minus: 0", f"f_minus: {(1 - abs(value) ** 2) ** 0.5}")
    assert validate_config(body).polarization.f_plus == pytest.approx(value)


def test_off_grid_vectors_rejected():
    with pytest.raises(ConfigError) as e:
        validate_config("scenario: nonrel-limit\nnonrel: {Y: [0, 0, 40]}")
    assert "nonrel.Y" in str(e.value)


def test_validate_command(capsys):
    assert main(["validate", str(SCENARIOS / "nonrel.yaml")]) == 0
    assert '"galilean"' in capsys.readouterr().out
