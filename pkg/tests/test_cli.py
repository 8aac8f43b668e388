"""CLI surface: run/verify/convergence/report, exit codes, reproducibility."""

import os
import subprocess
import sys

import numpy as np
import pytest

from esdflow import cli, io as eio


def run_cli(args):
    return cli.main(args)


class TestRun:
    def test_res1_smoke_produces_outputs(self, tmp_path, capsys):
        out = tmp_path / "o"
        code = run_cli(["run", "--case", "res1", "--scheme", "esdf-central",
                        "--dt", "1e-3", "--t-end", "0.03", "--cells", "120",
                        "--out", str(out)])
        assert code == 0
        captured = capsys.readouterr().out
        assert "case=res1-periodic-discontinuity" in captured
        assert "status=ok" in captured
        meta, rows = eio.read_csv(out / "diagnostics.csv")
        assert meta["version"]
        assert "seed" in meta and "config" in meta
        assert rows[0]["entropy_total"] == pytest.approx(0.0, abs=1e-10)
        assert (out / "snapshot_final.csv").exists()
        assert (out / "summary.txt").exists()

    def test_res2_summary_has_deviation_metrics(self, tmp_path, capsys):
        out = tmp_path / "o"
        code = run_cli(["run", "--case", "res2", "--cells", "80",
                        "--t-end", "5e-5", "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "p_max_dev=" in text and "v_max_dev=" in text

    def test_missing_config_exits_2(self, capsys):
        assert run_cli(["run", "--config", "/definitely/not/here.cfg"]) == 2

    def test_config_file_round_trip(self, tmp_path, capsys):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text(
            "# moving interface, tiny\n"
            "case = res2\n"
            "cells = 60\n"
            "t_end = 2e-5\n"
            "scheme = esdf\n")
        out = tmp_path / "o"
        assert run_cli(["run", "--config", str(cfgfile), "--out", str(out)]) == 0

    def test_bad_config_key_exits_2(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("case = res1\nwibble = 3\n")
        assert run_cli(["run", "--config", str(cfgfile)]) == 2

    def test_single_thread_reruns_bitwise_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli(["run", "--case", "res2", "--cells", "60",
                            "--t-end", "3e-5", "--out", str(out),
                            "--threads", "1"]) == 0
            outs.append((out / "diagnostics.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_control_flag(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert run_cli(["run", "--case", "res2", "--cells", "60",
                        "--t-end", "2e-5", "--no-double-flux",
                        "--out", str(out)]) == 0


class TestVerify:
    def test_default_passes(self, capsys):
        assert run_cli(["verify", "--count", "400", "--seed", "7"]) == 0
        text = capsys.readouterr().out
        assert "suite passed=True" in text

    def test_seed_determinism(self, capsys, tmp_path):
        texts = []
        for name in ("a", "b"):
            path = tmp_path / f"{name}.txt"
            run_cli(["verify", "--count", "300", "--seed", "11",
                     "--out", str(path)])
            texts.append(path.read_text())
        assert texts[0] == texts[1]

    def test_mutation_hook_fails(self, capsys):
        code = run_cli(["verify", "--count", "300", "--seed", "0",
                        "--mutate", "dissipation-sign"])
        assert code == 1
        text = capsys.readouterr().out
        assert "passed=False" in text


class TestConvergence:
    def test_single_dt_usage_error(self, capsys, tmp_path):
        assert run_cli(["convergence", "--case", "res1",
                        "--dt-list", "1e-3", "--out", str(tmp_path)]) == 2

    def test_small_sweep_and_format(self, tmp_path, capsys):
        out = tmp_path / "o"
        code = run_cli(["convergence", "--case", "res1", "--cells", "100",
                        "--t-end", "0.2", "--dt-list", "2e-3,1e-3,5e-4",
                        "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        # order reported with three decimals
        import re
        m = re.search(r"order=(-?\d+\.\d{3})\b", text)
        assert m is not None
        table = (out / "entropy_convergence.csv").read_text()
        assert "dt,abs_ds" in table


class TestReport:
    def test_report_renders_figures(self, tmp_path, capsys):
        out = tmp_path / "o"
        run_cli(["run", "--case", "res2", "--cells", "60", "--t-end", "2e-5",
                 "--out", str(out)])
        run_cli(["convergence", "--case", "res1", "--cells", "80",
                 "--t-end", "0.1", "--dt-list", "2e-3,1e-3,5e-4",
                 "--out", str(out)])
        capsys.readouterr()
        assert run_cli(["report", "--out", str(out)]) == 0
        assert (out / "entropy_history.png").exists()
        assert (out / "profiles.png").exists()
        assert (out / "entropy_convergence.png").exists()


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        env = dict(os.environ)
        proc = subprocess.run(
            [sys.executable, "-m", "esdflow.cli", "verify", "--count", "200"],
            capture_output=True, text=True, env=env)
        assert proc.returncode == 0
        assert "suite passed=True" in proc.stdout
