import subprocess
import sys

import pytest

from radargame.cli import main


def test_design_ec_writes_outputs(tmp_path, capsys):
    assert main(["design-ec", "--out", str(tmp_path), "--set", "scenario.radius=0.8"]) == 0
    out = capsys.readouterr().out
    assert "sinr_worst = 1.1795" in out
    assert (tmp_path / "design-ec" / "waveform.csv").exists()
    assert (tmp_path / "design-ec" / "waveform.svg").exists()
    assert (tmp_path / "design-ec" / "summary.csv").exists()


def test_global_flags_before_subcommand(tmp_path):
    assert main(["--out", str(tmp_path), "--format", "csv", "robust", "--samples", "10"]) == 0
    assert (tmp_path / "robust" / "robustness.csv").exists()
    assert not (tmp_path / "robust" / "robustness.svg").exists()


def test_validation_error_exit_code(tmp_path, capsys):
    assert main(["design-cmsc", "--set", "constraint.delta=3", "--out", str(tmp_path)]) == 1
    assert "constraint.delta" in capsys.readouterr().err
    cfg = tmp_path / "c.yaml"
    cfg.write_text("sweep:\n  variable: rho\n")
    assert main(["sweep", "--config", str(cfg)]) == 1


def test_infeasible_is_a_validation_error(tmp_path):
    args = ["design-scsc", "--out", str(tmp_path), "--set", "constraint.e_t=100",
            "--set", "constraint.delta=0.05", "--set", "constraint.e_i=1e-6"]
    assert main(args) == 1


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    from radargame import cli
    from radargame.solvers import SolverError

    def boom(cfg):
        raise SolverError("synthetic")

    monkeypatch.setattr(cli, "run_convergence", boom)
    assert main(["convergence", "--out", str(tmp_path)]) == 2


def test_partial_sweep_failure_writes_rows_and_exits_2(tmp_path, monkeypatch):
    from radargame.harness import experiments
    from radargame.solvers import SolverError
    real = experiments._sweep_point

    def flaky(cfg, kind, point, cache):
        if point["e_t"] == 2.0:
            raise SolverError("synthetic")
        return real(cfg, kind, point, cache)

    monkeypatch.setattr(experiments, "_sweep_point", flaky)
    code = main(["sweep", "--out", str(tmp_path), "--format", "csv", "--set", "sweep.values=[1, 2, 4]"])
    assert code == 2
    text = (tmp_path / "sweep" / "sweep.csv").read_text().splitlines()
    assert len(text) == 3
    assert "failed_rows" in (tmp_path / "sweep" / "sweep.meta.json").read_text()


def test_pulse_cross_needs_reference(tmp_path):
    assert main(["pulse", "--kind", "ec", "--cross", "--out", str(tmp_path)]) == 1
    assert main(["pulse", "--kind", "cmsc", "--cross", "--out", str(tmp_path),
                 "--set", "scenario.radius=0.1"]) == 0


def test_module_entry_point_help():
    r = subprocess.run([sys.executable, "-m", "radargame", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("design-ec", "design-cmsc", "design-scsc", "sweep", "convergence", "psd", "pulse",
                "robust", "selftest"):
        assert cmd in r.stdout


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["robust", "--samples", "many"])
    assert exc.value.code == 1
