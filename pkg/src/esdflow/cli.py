"""Command-line entry point.

Subcommands
-----------
run          execute a benchmark case (or config file) to t_end, writing
             diagnostics CSV and field snapshots
verify       randomized property suite (shuffle identity, entropy
             production sign, jump lemmas, symmetrizer oracle, round trips)
convergence  fixed-step sweep of the entropy change and its fitted order
report       render figures from a run's output directory

Exit codes: 0 success, 1 numerical abort / property failure, 2 usage or
configuration error.  Summary output is a single key=value line per run so
downstream tooling can parse it.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import cases as cs
from . import io as eio
from . import state as st
from . import verify as vf
from .cases import CaseSpec
from .solver import ConfigError, Solver, UnstableStateError


def _parser():
    p = argparse.ArgumentParser(prog="esdflow")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark case")
    run.add_argument("--case", help="res1 | res2 | res3 (or full case id)")
    run.add_argument("--config", help="key = value configuration file")
    run.add_argument("--scheme", choices=("lf", "ec", "esdf-central", "esdf"))
    run.add_argument("--cfl", type=float)
    run.add_argument("--dt", type=float)
    run.add_argument("--t-end", type=float, dest="t_end")
    run.add_argument("--cells", type=int)
    run.add_argument("--amr-levels", type=int, dest="amr_levels")
    run.add_argument("--no-double-flux", action="store_true",
                     help="single shared frozen-pair evaluation (control)")
    run.add_argument("--out", default="out")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)

    ver = sub.add_parser("verify", help="randomized property suite")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--count", type=int, default=10000)
    ver.add_argument("--out")
    ver.add_argument("--mutate", help=argparse.SUPPRESS)  # test hook

    conv = sub.add_parser("convergence", help="entropy-convergence sweep")
    conv.add_argument("--case", default="res1")
    conv.add_argument("--dt-list", dest="dt_list",
                      default="4e-4,2e-4,1e-4,5e-5")
    conv.add_argument("--cells", type=int)
    conv.add_argument("--scheme", default="esdf-central")
    conv.add_argument("--t-end", type=float, dest="t_end")
    conv.add_argument("--out", default="out")
    conv.add_argument("--threads", type=int, default=1)
    conv.add_argument("--seed", type=int, default=0)

    rep = sub.add_parser("report", help="render figures from run outputs")
    rep.add_argument("--out", default="out")
    return p


def _spec_from_args(args):
    overrides = {}
    if args.config:
        try:
            raw = eio.parse_config_file(args.config)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        coerce = {"cells": int, "amr_levels": int, "cfl": float, "dt": float,
                  "t_end": float, "double_flux": lambda s: s.lower() in ("1", "true", "yes")}
        for k, v in raw.items():
            if k == "case":
                overrides["case"] = v
            elif k == "scheme":
                overrides["scheme"] = v
            elif k in coerce:
                overrides[k] = coerce[k](v)
            elif k == "out":
                pass
            else:
                raise ConfigError(f"unknown configuration key {k!r} in {args.config}")
    for k in ("case", "scheme", "cfl", "dt", "t_end", "cells", "amr_levels"):
        v = getattr(args, k, None)
        if v is not None:
            overrides[k] = v
    if getattr(args, "no_double_flux", False):
        overrides["double_flux"] = False
    if "case" not in overrides:
        raise ConfigError("a case must be given via --case or the config file")
    return CaseSpec(**overrides)


def _diag_row(solver, setup):
    rep = solver.conservation_report()
    row = {"t": solver.t, "step": solver.step_count,
           "entropy_total": solver.total_entropy()}
    row.update(rep)
    if solver.cfg.p_ref is not None:
        _, _, vel, p = solver.primitives(solver.U)
        row["p_max_dev"] = float(np.max(np.abs(p - solver.cfg.p_ref))
                                 / solver.cfg.p_ref)
        row["v_max_dev"] = float(np.max(np.abs(vel[:, 0] - solver.cfg.v_ref))
                                 / abs(solver.cfg.v_ref))
    if solver.cfg.case == "res3-shock-bubble":
        rho_i = st.species_densities(solver.U, solver.n, solver.d, clip=True)
        Y_he = rho_i[:, 0] / solver.U[:, solver.n - 1]
        pts = cs.track_interface_points(solver.mesh, Y_he)
        if pts is not None:
            row["downstream"], row["jet"], row["upstream"] = pts
    return row


def cmd_run(args):
    spec = _spec_from_args(args)
    setup = cs.setup_case(spec)
    os.makedirs(args.out, exist_ok=True)
    solver = Solver(setup.mix, setup.mesh, setup.U0, setup.cfg)
    cfg_hash = eio.config_hash(setup.cfg)
    case = setup.cfg.case

    rows = []
    snap_written = set()

    def on_output(s):
        rows.append(_diag_row(s, setup))
        for ts in s.cfg.snapshot_times:
            if abs(s.t - ts) <= 1e-12 * max(ts, 1.0) and ts not in snap_written:
                snap_written.add(ts)
                _write_snapshot(s, args.out, case, cfg_hash, args.seed, tag=f"{ts:.6g}")

    status = "ok"
    try:
        solver.run(on_output=on_output)
    except UnstableStateError as err:
        status = f"unstable: {err}"
    _write_snapshot(solver, args.out, case, cfg_hash, args.seed, tag="final")
    eio.write_diagnostics_csv(os.path.join(args.out, "diagnostics.csv"),
                              rows, case, cfg_hash, args.seed)
    summary = {"case": case, "status": status.split(":")[0],
               "steps": solver.step_count, "t": f"{solver.t:.9g}",
               "config": cfg_hash, "seed": args.seed,
               "threads": args.threads}
    last = rows[-1]
    for key in ("p_max_dev", "v_max_dev", "entropy_total"):
        if key in last:
            summary[key] = f"{last[key]:.6e}"
    line = " ".join(f"{k}={v}" for k, v in summary.items())
    print(line)
    with open(os.path.join(args.out, "summary.txt"), "w") as fh:
        fh.write(line + "\n")
    return 0 if status == "ok" else 1


def _write_snapshot(solver, out, case, cfg_hash, seed, tag):
    if solver.d == 1:
        path = os.path.join(out, f"snapshot_{tag}.csv")
        eio.snapshot_csv_1d(path, solver, case, cfg_hash, seed)
    else:
        path = os.path.join(out, f"snapshot_{tag}.vtk")
        eio.write_vtk_2d(path, solver, case, cfg_hash, seed)


def cmd_verify(args):
    passed, results = vf.run_suite(seed=args.seed, count=args.count,
                                   mutate=args.mutate)
    lines = []
    for r in results:
        entry = (f"check={r['name']} passed={r['passed']} "
                 f"max_err={r['max_err']:.6e} tol={r['tol']:.1e}")
        if not r["passed"] and r.get("detail"):
            entry += f" counterexample=\"{r['detail']}\""
        lines.append(entry)
        print(entry)
    print(f"suite passed={passed} seed={args.seed} count={args.count}")
    if args.out:
        os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
            fh.write(f"suite passed={passed} seed={args.seed} count={args.count}\n")
    return 0 if passed else 1


def cmd_convergence(args):
    dts = [float(x) for x in args.dt_list.split(",") if x.strip()]
    if len(dts) < 2:
        raise ConfigError("convergence needs at least two time steps")
    os.makedirs(args.out, exist_ok=True)
    pairs = []
    for dt in dts:
        spec = CaseSpec(case=args.case, cells=args.cells, scheme=args.scheme,
                        dt=dt, t_end=args.t_end)
        setup = cs.setup_case(spec)
        solver = Solver(setup.mix, setup.mesh, setup.U0, setup.cfg)
        S0 = solver.total_entropy()
        solver.run()
        pairs.append((dt, abs(solver.total_entropy() - S0)))
        print(f"dt={dt:.6e} abs_ds={pairs[-1][1]:.9e} steps={solver.step_count}")
    order = cs.convergence_fit(pairs)
    path = os.path.join(args.out, "entropy_convergence.csv")
    with open(path, "w") as fh:
        fh.write(f"# case={args.case} scheme={args.scheme} seed={args.seed} "
                 f"version={_version()}\n")
        fh.write(f"# order={order:.3f}\n")
        fh.write("dt,abs_ds\n")
        for dt, ds in pairs:
            fh.write(f"{dt:.17g},{ds:.17g}\n")
    print(f"order={order:.3f} table={path}")
    return 0


def _version():
    from . import __version__
    return __version__


def cmd_report(args):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    made = []
    conv = os.path.join(args.out, "entropy_convergence.csv")
    if os.path.exists(conv):
        meta, rows = eio.read_csv(conv)
        dts = [r["dt"] for r in rows]
        ds = [r["abs_ds"] for r in rows]
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.loglog(dts, ds, "o-")
        ax.set_xlabel("dt")
        ax.set_ylabel("|dS(t_end)|")
        if "order" in meta:
            ax.set_title(f"entropy change, fitted order {meta['order']}")
        fig.savefig(os.path.join(args.out, "entropy_convergence.png"),
                    dpi=130, bbox_inches="tight")
        plt.close(fig)
        made.append("entropy_convergence.png")

    diag = os.path.join(args.out, "diagnostics.csv")
    if os.path.exists(diag):
        meta, rows = eio.read_csv(diag)
        t = [r["t"] for r in rows]
        S = [r["entropy_total"] for r in rows]
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.plot(t, [s - S[0] for s in S])
        ax.set_xlabel("t")
        ax.set_ylabel("S(t) - S(0)")
        fig.savefig(os.path.join(args.out, "entropy_history.png"),
                    dpi=130, bbox_inches="tight")
        plt.close(fig)
        made.append("entropy_history.png")

    snap = os.path.join(args.out, "snapshot_final.csv")
    if os.path.exists(snap):
        meta, rows = eio.read_csv(snap)
        x = [r["x"] for r in rows]
        fig, axes = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
        axes[0].plot(x, [r["p"] for r in rows])
        axes[0].set_ylabel("p")
        axes[1].plot(x, [r["v"] for r in rows])
        axes[1].set_ylabel("v")
        axes[1].set_xlabel("x")
        fig.savefig(os.path.join(args.out, "profiles.png"),
                    dpi=130, bbox_inches="tight")
        plt.close(fig)
        made.append("profiles.png")

    print("report=" + ",".join(made) if made else "report=empty")
    return 0


def main(argv=None):
    args = _parser().parse_args(argv)
    if getattr(args, "threads", None):
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS"):
            os.environ.setdefault(var, str(args.threads))
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "convergence":
            return cmd_convergence(args)
        if args.command == "report":
            return cmd_report(args)
    except (ConfigError, eio.ConfigFileError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except UnstableStateError as err:
        print(f"numerical abort: {err}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
