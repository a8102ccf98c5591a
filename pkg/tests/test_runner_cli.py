import json
import math

import numpy as np
import pytest

from vortexprop import io
from vortexprop.cli import main
from vortexprop.errors import ConfigError, ManifestMismatch, MissingFrames
from vortexprop.runner import (RunMethod, build_config, generate_frames, load_config_file, parse_grid,
                               run_diagnose, run_simulate, validate_method)


@pytest.fixture(scope="module")
def analytic_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "psi1"
    assert main(["simulate", "--out", str(out)]) == 0
    return out


def _bytes(run_dir, pattern):
    return {p.relative_to(run_dir).as_posix(): p.read_bytes() for p in sorted(run_dir.glob(pattern))}


def test_default_run_layout(analytic_run):
    xy = sorted(analytic_run.glob("slices/*_xy.csv"))
    assert len(xy) == 16
    assert len(list(analytic_run.glob("frames/*.npz"))) == 16
    assert len(list(analytic_run.glob("heatmaps/*.ppm"))) == 32
    for name in ("nodal_angle.png", "widths.png", "orbit.png", "snapshots.png"):
        assert (analytic_run / "figures" / name).stat().st_size > 0
    man = io.read_manifest(analytic_run)
    assert man["derived"]["tau"] == pytest.approx(2 * math.pi)
    assert all(f in man["files"] for f in (p.relative_to(analytic_run).as_posix() for p in xy))
    meta, rows = io.read_slice_csv(xy[3])
    assert meta["scenario"] == "perp-l1-analytic" and meta["plane"] == "xy"
    assert float(meta["t"]) == pytest.approx(3 * 2 * math.pi / 16)


def test_report_has_unit_g_factor(analytic_run):
    report = json.loads((analytic_run / "report.json").read_text())
    assert 0.99 <= report["precession"]["g_L"] <= 1.01
    assert report["winding"]["values"] == [1]
    assert report["format_version"] == 1
    header = (analytic_run / "series.csv").read_text().splitlines()[0]
    assert header.startswith("t,norm,cx,cy,cz")


def test_rerun_is_byte_identical(analytic_run, tmp_path):
    again = tmp_path / "again"
    run_simulate(build_config({}), again)
    for pattern in ("slices/*.csv", "heatmaps/*.ppm", "frames/*.npz", "series.csv", "report.json",
                    "figures/*.png", "manifest.json"):
        assert _bytes(analytic_run, pattern) == _bytes(again, pattern), pattern


def test_diagnose_is_idempotent(analytic_run):
    before = _bytes(analytic_run, "series.csv") | _bytes(analytic_run, "report.json")
    assert main(["diagnose", str(analytic_run)]) == 0
    after = _bytes(analytic_run, "series.csv") | _bytes(analytic_run, "report.json")
    assert before == after


def test_diagnose_refuses_damaged_runs(tmp_path):
    cfg = build_config({"beam": {"oam": 0}, "time": {"frames": 4},
                        "outputs": {"series": False, "report": False, "heatmaps": False}})
    run = run_simulate(cfg, tmp_path / "r")
    series = run_diagnose(run)
    assert series["winding"]["values"] == [0]
    rows = (run / "series.csv").read_text().splitlines()[1:]
    assert all(r.split(",")[13] == "0" for r in rows)
    frame = run / "frames" / "frame_002.npz"
    frame.write_bytes(frame.read_bytes() + b"x")
    with pytest.raises(ManifestMismatch):
        run_diagnose(run)
    frame.unlink()
    with pytest.raises(MissingFrames):
        run_diagnose(run)
    assert main(["diagnose", str(run)]) == 2


def test_cross_method_agreement(tmp_path):
    base = {"beam": {"oam": 1}, "time": {"frames": 4}}
    a = list(generate_frames(build_config(base)))
    q = list(generate_frames(build_config({**base, "method": "quadrature"})))
    for fa, fq in zip(a, q):
        da, dq = fa.to_dense().data, fq.to_dense().data
        assert np.linalg.norm(da - dq) / np.linalg.norm(da) < 1e-5


def test_config_parsing(tmp_path):
    assert parse_grid("64x96x32") == (64, 96, 32)
    with pytest.raises(ConfigError):
        parse_grid("64x96")
    with pytest.raises(ConfigError):
        build_config({"bogus": 1})
    path = tmp_path / "c.yaml"
    path.write_text("scenario: parallel\nbeam:\n  oam: 0\nmethod: splitstep\n")
    cfg = build_config(load_config_file(path))
    assert cfg.scenario_id == "parallel-l0-splitstep"
    assert cfg.method is RunMethod.SPLITSTEP
    (tmp_path / "c.json").write_text(json.dumps({"time": {"frames": 8, "periods": 2}}))
    cfg = build_config(load_config_file(tmp_path / "c.json"))
    assert len(cfg.time.frame_times()) == 8 and cfg.time.t_max == pytest.approx(4 * math.pi)
    with pytest.raises(ConfigError):
        build_config({"scenario": "parallel", "beam": {"oam": 1}})


def test_quadrature_refuses_caustic_frames():
    with pytest.raises(ConfigError, match="caustic"):
        build_config({"method": "quadrature", "time": {"periods": 2, "frames": 4}})
    cfg = build_config({"method": "analytic", "time": {"periods": 2, "frames": 4}})
    validate_method(cfg)


def test_cli_simulate_reports_errors(tmp_path, capsys):
    code = main(["simulate", "--out", str(tmp_path / "x"), "--method", "quadrature", "--grid", "7x8x8"])
    assert code == 2
    assert "ConfigError" in capsys.readouterr().err


def test_verify_zero_field_skips_magnetic_checks(tmp_path, capsys):
    (tmp_path / "zero.json").write_text(json.dumps({"params": {"field": 0.0}}))
    out = tmp_path / "verify.json"
    code = main(["verify", "--suite", "kernel", "--config", str(tmp_path / "zero.json"), "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    status = {c["name"]: c["status"] for c in report["checks"]}
    assert status["free_limit"] == "skip" and status["hamiltonian_coefficient"] == "skip"
    assert status["composition"] == "pass"
    assert "SKIP" in capsys.readouterr().out


def test_verify_literal_beta_z_fails_factorization(tmp_path):
    out = tmp_path / "verify.json"
    code = main(["verify", "--suite", "closedform", "--beta-z", "literal", "--out", str(out)])
    assert code == 1
    report = json.loads(out.read_text())
    assert report["beta_z_convention"] == "literal"
    status = {c["name"]: c["status"] for c in report["checks"]}
    assert status["factorization"] == "fail"
    assert status["closed_form_vs_quadrature"] == "fail"
