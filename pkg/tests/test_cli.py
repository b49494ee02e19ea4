import json
import math

import pytest

from hyperflow.cli import (
    EXIT_AUDIT,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    main,
    parse_config,
    read_config_file,
)
from hyperflow.errors import ParseError, ValidationError
from hyperflow import shapes
from hyperflow.hypersurface import write_surface


def run_cli(*args):
    return main(list(args))


# ---------------------------------------------------------------------------
# configuration handling


def test_minimal_simulate_config_resolves_with_defaults(tmp_path):
    out = tmp_path / "run"
    rc = run_cli(
        "simulate", "--out", str(out),
        "--set", "speed=k", "--set", "shape=circle", "--set", "radius=1.0",
        "--set", "t_end=0.02", "--set", "dt=0.001", "--set", "resolution=32",
    )
    assert rc == EXIT_OK
    resolved = read_config_file(out / "resolved_config.cfg")
    assert resolved["speed"] == "k"
    assert resolved["scheme"] == "rk4"  # default echoed
    assert resolved["cfl"] == 0.2
    assert resolved["seed"] == 0


def test_alpha_must_be_positive(tmp_path):
    rc = run_cli(
        "classify-speed", "--out", str(tmp_path / "x"),
        "--set", "speed=H^alpha", "--set", "alpha=-1",
    )
    assert rc == EXIT_USAGE


def test_missing_mesh_file_is_named(tmp_path, capsys):
    rc = run_cli(
        "simulate", "--out", str(tmp_path / "x"),
        "--set", "shape=mesh", "--set", "mesh_file=/nope/missing.obj",
    )
    assert rc == EXIT_USAGE
    assert "/nope/missing.obj" in capsys.readouterr().err


def test_unknown_keys_rejected(tmp_path):
    rc = run_cli("simulate", "--out", str(tmp_path / "x"), "--set", "bogus=1")
    assert rc == EXIT_USAGE


def test_flags_override_file_keys(tmp_path):
    cfg = tmp_path / "base.cfg"
    cfg.write_text("speed = k\nr0 = 1.0\nt_end = 1.0\ndt = 0.001\n")
    out = tmp_path / "ode"
    rc = run_cli("sphere-ode", "--config", str(cfg), "--out", str(out), "--set", "t_end=0.5")
    assert rc == EXIT_OK
    assert read_config_file(out / "resolved_config.cfg")["t_end"] == 0.5


def test_malformed_config_line_raises():
    with pytest.raises(ValidationError):
        read_config_file("/nope/missing.cfg")


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("this line has no equals sign\n")
    with pytest.raises(ParseError):
        read_config_file(bad)


def test_parse_config_requires_out_dir():
    with pytest.raises(ValidationError):
        parse_config("sphere-ode", {}, {})


# ---------------------------------------------------------------------------
# commands and artifacts


def test_sphere_ode_artifacts(tmp_path):
    out = tmp_path / "ode"
    rc = run_cli(
        "sphere-ode", "--out", str(out),
        "--set", "speed=k", "--set", "r0=1.0", "--set", "t_end=1.0", "--set", "dt=0.001",
    )
    assert rc == EXIT_OK
    rows = (out / "radius.csv").read_text().splitlines()
    assert rows[0] == "t,r"
    final_r = float(rows[-1].split(",")[1])
    assert final_r == pytest.approx(math.e, rel=1e-6)
    verdict = json.loads((out / "ancientness.json").read_text())
    assert verdict["verdict"] == "ancient"


def test_classify_speed_nonancient(tmp_path):
    out = tmp_path / "cls"
    rc = run_cli(
        "classify-speed", "--out", str(out),
        "--set", "speed=H^alpha", "--set", "alpha=0.5", "--set", "dimension=2",
    )
    assert rc == EXIT_OK
    d = json.loads((out / "classification.json").read_text())
    assert d["ancientness"]["verdict"] == "non_ancient"
    assert d["admissibility"]["passed"] is True
    assert d["homogeneity"] == pytest.approx(0.5)


def test_simulate_artifacts(tmp_path):
    out = tmp_path / "sim"
    rc = run_cli(
        "simulate", "--out", str(out),
        "--set", "speed=k", "--set", "shape=ellipse", "--set", "axes=2,1",
        "--set", "t_end=0.05", "--set", "dt=0.001", "--set", "resolution=64",
    )
    assert rc == EXIT_OK
    index = json.loads((out / "index.json").read_text())
    assert index["schema_version"] == 1
    assert len(index["frames"]) >= 5
    csv_rows = (out / "diagnostics.csv").read_text().splitlines()
    assert csv_rows[0].startswith("t,volume,rho_minus,rho_plus")
    schema = json.loads((out / "diagnostics_schema.json").read_text())
    assert set(schema["columns"]) == set(csv_rows[0].split(","))
    # every referenced frame file exists
    for row in index["frames"]:
        assert (out / row["file"]).exists()


def test_reflect_audit_pass_and_fail(tmp_path, capsys):
    rc = run_cli(
        "reflect-audit", "--out", str(tmp_path / "r1"),
        "--set", "shape=circle", "--set", "radius=1.0",
        "--set", "plane_direction=1,0", "--set", "plane_offsets=0.5,0.2",
    )
    assert rc == EXIT_OK
    assert capsys.readouterr().out.count("PASS") == 2
    rc = run_cli(
        "reflect-audit", "--out", str(tmp_path / "r2"),
        "--set", "shape=circle", "--set", "radius=1.0",
        "--set", "plane_direction=1,0", "--set", "plane_offsets=0.5,0",
    )
    assert rc == EXIT_AUDIT
    assert "FAIL" in capsys.readouterr().out


def test_rigidity_audit_family_exit_codes(tmp_path):
    common = [
        "--set", "t0=-6", "--set", "t_end=0", "--set", "frame_dt=0.02",
        "--set", "directions=8", "--set", "c_schedule=0.4,0.2,0.1",
    ]
    rc = run_cli("rigidity-audit", "--out", str(tmp_path / "sph"), "--set", "family=sphere", *common)
    assert rc == EXIT_OK
    rc = run_cli("rigidity-audit", "--out", str(tmp_path / "ell"), "--set", "family=ellipse", *common)
    assert rc == EXIT_AUDIT
    report = json.loads((tmp_path / "ell" / "rigidity_report.json").read_text())
    witnesses = [r["witness_direction"] for r in report["limit_symmetry"] if not r["spherical"]]
    assert witnesses and witnesses[0] is not None


def test_numeric_failure_exit_code(tmp_path):
    mesh = tmp_path / "peanut.txt"
    write_surface(shapes.peanut_polygon(64), mesh)
    rc = run_cli(
        "simulate", "--out", str(tmp_path / "x"),
        "--set", "shape=mesh", f"--set", f"mesh_file={mesh}",
        "--set", "speed=k", "--set", "t_end=0.5",
    )
    assert rc == EXIT_NUMERIC


def test_output_lock(tmp_path):
    out = tmp_path / "locked"
    out.mkdir()
    (out / ".lock").touch()
    rc = run_cli("classify-speed", "--out", str(out), "--set", "speed=k")
    assert rc == EXIT_USAGE


# ---------------------------------------------------------------------------
# reproducibility


def _simulate_args(out):
    return [
        "simulate", "--out", str(out),
        "--set", "speed=k", "--set", "shape=ellipse", "--set", "axes=2,1",
        "--set", "t_end=0.03", "--set", "dt=0.001", "--set", "resolution=64",
    ]


def test_identical_configs_produce_identical_artifacts(tmp_path):
    assert run_cli(*_simulate_args(tmp_path / "a")) == EXIT_OK
    assert run_cli(*_simulate_args(tmp_path / "b")) == EXIT_OK
    for rel in ("diagnostics.csv", "index.json", "frames/frame_000000.txt"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_resolved_config_rerun_reproduces_artifacts(tmp_path):
    assert run_cli(*_simulate_args(tmp_path / "a")) == EXIT_OK
    rc = run_cli(
        "simulate", "--config", str(tmp_path / "a" / "resolved_config.cfg"),
        "--out", str(tmp_path / "c"),
    )
    assert rc == EXIT_OK
    assert (tmp_path / "a" / "diagnostics.csv").read_bytes() == (tmp_path / "c" / "diagnostics.csv").read_bytes()
