import shutil
import subprocess
import sys

import pytest


def esdflow(*args):
    """Invoke the solver CLI as an external tool (the only coupling)."""
    exe = shutil.which("esdflow")
    cmd = [exe] if exe else [sys.executable, "-m", "esdflow.cli"]
    proc = subprocess.run([*cmd, *args], capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"esdflow {' '.join(args)} failed:\n{proc.stderr}")
    return proc.stdout


@pytest.fixture(scope="session")
def primary_outputs(tmp_path_factory):
    """Small solver runs producing every consumed file format."""
    root = tmp_path_factory.mktemp("primary")
    res2 = root / "res2"
    ctrl = root / "ctrl"
    res3 = root / "res3"
    esdflow("run", "--case", "res2", "--cells", "150", "--t-end", "1e-4",
            "--out", str(res2))
    esdflow("run", "--case", "res2", "--cells", "150", "--t-end", "1e-4",
            "--no-double-flux", "--out", str(ctrl))
    esdflow("convergence", "--case", "res1", "--cells", "100",
            "--t-end", "0.2", "--dt-list", "2e-3,1e-3,5e-4,2.5e-4",
            "--out", str(root))
    esdflow("run", "--case", "res3", "--cells", "130", "--t-end", "5e-5",
            "--amr-levels", "1", "--out", str(res3))
    return {"res2": res2 / "snapshot_final.csv",
            "ctrl": ctrl / "snapshot_final.csv",
            "res2_diag": res2 / "diagnostics.csv",
            "conv": root / "entropy_convergence.csv",
            "vtk": res3 / "snapshot_final.vtk",
            "res3_diag": res3 / "diagnostics.csv"}
