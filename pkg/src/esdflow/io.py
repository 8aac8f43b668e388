"""File formats: diagnostics CSV, 1D snapshot CSV, legacy-ASCII VTK for 2D
fields, and the key = value run-configuration files.

Every output starts with '# key=value' header lines carrying the case name,
a hash of the configuration, the random seed and the package version, so
reruns are traceable and byte-reproducible.
"""

from __future__ import annotations

import hashlib
import os

import numpy as np

from . import __version__
from . import state as st


class ConfigFileError(ValueError):
    """Malformed run-configuration file."""


def config_hash(cfg) -> str:
    """Stable short hash of a RunConfig-like object."""
    text = repr(sorted(cfg.__dict__.items(), key=lambda kv: kv[0]))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def header_lines(case, cfg_hash, seed, extra=None):
    meta = {"case": case, "config": cfg_hash, "seed": seed,
            "version": __version__}
    meta.update(extra or {})
    return [f"# {k}={v}" for k, v in meta.items()]


def write_diagnostics_csv(path, rows, case, cfg_hash, seed):
    """Time-series diagnostics; one row per output event."""
    if not rows:
        raise ValueError("no diagnostics rows to write")
    keys = list(rows[0].keys())
    with open(path, "w") as fh:
        for line in header_lines(case, cfg_hash, seed):
            fh.write(line + "\n")
        fh.write(",".join(keys) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(k)) for k in keys) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def read_csv(path):
    """Read a headered CSV back into (meta, list-of-dict rows)."""
    meta, rows, keys = {}, [], None
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line:
                    k, v = line[1:].split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            parts = line.split(",")
            if keys is None:
                keys = parts
                continue
            row = {}
            for k, p in zip(keys, parts):
                try:
                    row[k] = float(p)
                except ValueError:
                    row[k] = p
            rows.append(row)
    return meta, rows


def snapshot_csv_1d(path, solver, case, cfg_hash, seed):
    """1D field snapshot: x, level, rho, v, p, T, Y_i..., gamma_star."""
    mesh = solver.mesh
    x = mesh.cell_centers()[:, 0]
    order = np.argsort(x, kind="stable")
    prim = st.primitive_from_conserved(solver.mix, solver.U, solver.d)
    names = solver.mix.names
    with open(path, "w") as fh:
        for line in header_lines(case, cfg_hash, seed, {"t": solver.t}):
            fh.write(line + "\n")
        cols = (["x", "level", "rho", "v", "p", "T"]
                + [f"Y_{n}" for n in names] + ["gamma_star"])
        fh.write(",".join(cols) + "\n")
        lev = mesh.level[mesh.active_ids]
        for i in order:
            vals = ([x[i], lev[i], prim.rho[i], prim.v[i, 0], prim.p[i],
                     prim.T[i]] + [prim.Y[i, k] for k in range(len(names))]
                    + [solver.gs[i]])
            fh.write(",".join(_fmt(float(v)) for v in vals) + "\n")


def write_vtk_2d(path, solver, case, cfg_hash, seed):
    """Legacy-ASCII VTK unstructured grid of the active cells.

    Each active cell is written as a VTK_QUAD with CELL_DATA fields
    rho, p, T, vx, vy, level and the species mass fractions.
    """
    mesh = solver.mesh
    ids = mesh.active_ids
    centers = mesh.cell_centers()
    hx = mesh.h(mesh.level[ids], 0)
    hy = mesh.h(mesh.level[ids], 1)
    ncell = ids.size
    prim = st.primitive_from_conserved(solver.mix, solver.U, solver.d)

    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"case={case} config={cfg_hash} seed={seed} "
                 f"version={__version__} t={solver.t:.12g}\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {4 * ncell} double\n")
        for i in range(ncell):
            x0 = centers[i, 0] - 0.5 * hx[i]
            x1 = centers[i, 0] + 0.5 * hx[i]
            y0 = centers[i, 1] - 0.5 * hy[i]
            y1 = centers[i, 1] + 0.5 * hy[i]
            fh.write(f"{x0:.10g} {y0:.10g} 0\n{x1:.10g} {y0:.10g} 0\n"
                     f"{x1:.10g} {y1:.10g} 0\n{x0:.10g} {y1:.10g} 0\n")
        fh.write(f"CELLS {ncell} {5 * ncell}\n")
        for i in range(ncell):
            b = 4 * i
            fh.write(f"4 {b} {b + 1} {b + 2} {b + 3}\n")
        fh.write(f"CELL_TYPES {ncell}\n")
        fh.write("\n".join(["9"] * ncell) + "\n")
        fh.write(f"CELL_DATA {ncell}\n")

        def scalar(name, vals):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("\n".join(f"{v:.10g}" for v in vals) + "\n")

        scalar("rho", prim.rho)
        scalar("p", prim.p)
        scalar("T", prim.T)
        scalar("vx", prim.v[:, 0])
        scalar("vy", prim.v[:, 1])
        scalar("level", mesh.level[ids].astype(float))
        for k, name in enumerate(solver.mix.names):
            scalar(f"Y_{name}", prim.Y[:, k])


# ---------------------------------------------------------------------------
# run-configuration files: flat "key = value" records
# ---------------------------------------------------------------------------

def parse_config_file(path):
    """Parse a flat key = value configuration file into a dict.

    '#' starts a comment; values keep their string form (the CLI coerces).
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigFileError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out
