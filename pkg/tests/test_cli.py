import json
import math

import numpy as np
import pytest

from twoscale_pic import cli, simulate
from twoscale_pic.analysis import read_snapshot_csv, to_profile
from twoscale_pic.core import ParticleEnsemble, load_config, sample_initial
from twoscale_pic.scenarios import preset

SMALL = ["--set", "n_particles=400", "--set", "t_end=0.2", "--set", "snapshot_times=0.1, 0.2"]


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def files(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir()) if p.is_file()}


def test_two_scale_nonresonant_is_stationary(tmp_path, capsys):
    code, out, _ = run(["two-scale", "--preset", "linear-nonresonant", "--out", str(tmp_path)], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["solver"] == "two-scale" and summary["scenario"] == "linear-nonresonant"
    assert set(summary) == {"scenario", "solver", "steps", "wall_s", "final_moments", "overflow"}
    beam, meta = read_snapshot_csv(tmp_path / "snapshot_two-scale_t6.28.csv")
    assert meta["representation"] == "F" and meta["tau"] == pytest.approx(628.0)
    g_final = to_profile(beam, meta["tau"])
    g0 = to_profile(sample_initial(preset("linear-nonresonant").config))
    assert np.max(np.abs(g_final.pos - g0.pos)) <= 1e-12
    assert np.max(np.abs(g_final.vel - g0.vel)) <= 1e-12


def test_reference_run(tmp_path, capsys):
    code, out, _ = run(["reference", "--preset", "semi-gaussian-eps001", "--out", str(tmp_path),
                        "--set", "epsilon=0.1", *SMALL], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["steps"] == 40 and summary["overflow"] == 0
    assert {"snapshot_reference_t0.1.csv", "snapshot_reference_t0.2.csv", "moments_reference.csv"} <= set(
        files(tmp_path))


def test_identical_invocations_are_byte_identical(tmp_path, capsys):
    outs = []
    for i, threads in enumerate(("1", "1", "3")):
        d = tmp_path / str(i)
        code, _, _ = run(["two-scale", "--preset", "focusing-cos2", "--out", str(d), "--threads", threads,
                          *SMALL], capsys)
        assert code == 0
        outs.append(files(d))
    assert outs[0] == outs[1] == outs[2]
    assert len(outs[0]) == 3


def test_compare(tmp_path, capsys):
    code, out, _ = run(["compare", "--preset", "semi-gaussian-eps001", "--out", str(tmp_path),
                        "--set", "epsilon=0.1", "--figures", "--plot-script", *SMALL], capsys)
    assert code == 0
    payload = json.loads(out)
    assert 0 <= payload["max_discrepancy"] < 1 and payload["noise_floor"] > 0
    assert payload["steps"]["reference"] == 10 * payload["steps"]["two-scale"]
    names = set(files(tmp_path))
    assert {"comparison.csv", "comparison.png", "moments.png", "plot_snapshots.py"} <= names
    lines = (tmp_path / "comparison.csv").read_text().splitlines()
    assert lines[0].startswith("t,discrepancy,rms_radius_rel") and len(lines) == 3


def test_compare_speedup_assertion(tmp_path, capsys):
    code, _, err = run(["compare", "--preset", "linear-resonant-n2", "--out", str(tmp_path),
                        "--set", "epsilon=0.1", *SMALL, "--assert-speedup", "1e9"], capsys)
    assert code == cli.EXIT_SPEEDUP and "speedup" in err


def test_two_scale_figures(tmp_path, capsys):
    code, _, _ = run(["two-scale", "--preset", "defocusing-cos2t", "--out", str(tmp_path), "--figures",
                      "--plot-script", *SMALL], capsys)
    assert code == 0
    names = set(files(tmp_path))
    assert {"snapshots_two-scale.png", "moments_two-scale.png", "plot_snapshots.py"} <= names
    compile((tmp_path / "plot_snapshots.py").read_text(), "plot_snapshots.py", "exec")


def test_quadrature_check(tmp_path, capsys):
    code, out, _ = run(["quadrature-check", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert json.loads(out) == {"n=2": {"min_exact_p": 7}, "n=7": {"min_exact_p": 17}}
    assert (tmp_path / "quadrature_check.csv").read_text().startswith("n,p,error\n")


def test_convergence(tmp_path, capsys):
    code, out, _ = run(["convergence", "--out", str(tmp_path), "--particles", "200"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["time_order"] == pytest.approx(4.0, abs=0.2)
    assert payload["grid_order"] >= 1.9


def test_emit_preset_round_trip(tmp_path, capsys):
    path = tmp_path / "focus.cfg"
    assert run(["emit-preset", "focusing-cos2", "-o", str(path)], capsys)[0] == 0
    assert load_config(path) == preset("focusing-cos2").config
    code, out, _ = run(["emit-preset", "focusing-cos2"], capsys)
    assert code == 0 and out == path.read_text()
    # an edited file drives a run
    d = tmp_path / "run"
    code, out, _ = run(["two-scale", "--config", str(path), "--out", str(d), *SMALL], capsys)
    assert code == 0 and json.loads(out)["scenario"] == "focus"


@pytest.mark.parametrize("extra", [
    ["--set", "dt=-1"],
    ["--set", "colour=red"],
    ["--set", "n_particles"],
])
def test_config_errors_exit_2(tmp_path, capsys, extra):
    code, _, err = run(["two-scale", "--preset", "focusing-cos2", "--out", str(tmp_path), *extra], capsys)
    assert code == cli.EXIT_CONFIG and "configuration error" in err


def test_missing_scenario_exit_2(tmp_path, capsys):
    assert run(["two-scale", "--out", str(tmp_path)], capsys)[0] == cli.EXIT_CONFIG


def test_unreadable_config_exit_4(tmp_path, capsys):
    code, _, err = run(["two-scale", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)],
                       capsys)
    assert code == cli.EXIT_IO and "I/O error" in err


def test_unwritable_output_exit_4(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, _ = run(["quadrature-check", "--out", str(blocker / "sub")], capsys)
    assert code == cli.EXIT_IO


@pytest.mark.parametrize("command", ["two-scale", "reference"])
def test_nan_exits_3_with_diagnostic(tmp_path, capsys, monkeypatch, command):
    def poisoned(config, rng=None):
        return ParticleEnsemble.from_pairs([0.1, math.nan], [0.0, 0.0], 0.25)

    monkeypatch.setattr(simulate, "sample_initial", poisoned)
    code, _, err = run([command, "--preset", "focusing-cos2", "--out", str(tmp_path), *SMALL], capsys)
    assert code == cli.EXIT_INSTABILITY
    assert "step=" in err and "stage=" in err
