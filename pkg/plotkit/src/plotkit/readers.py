"""Readers for the solver's delimited outputs.

Both formats are self-describing: CSVs start with '# key=value' header
lines followed by a column-name row; 2D snapshots are legacy-ASCII VTK
unstructured grids of axis-aligned quads with CELL_DATA scalars.
"""

from __future__ import annotations

import numpy as np


class ParseError(ValueError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


class SchemaError(ValueError):
    """Input parsed but lacks required columns or structure."""


def read_csv(path, require=()):
    """Headered CSV -> (meta dict, column dict of float arrays)."""
    meta, keys, rows = {}, None, []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
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
                keys = [p.strip() for p in parts]
                continue
            if len(parts) != len(keys):
                raise ParseError(path, lineno,
                                 f"expected {len(keys)} fields, got {len(parts)}")
            try:
                rows.append([float(p) if p else np.nan for p in parts])
            except ValueError as err:
                raise ParseError(path, lineno, str(err)) from None
    if keys is None or not rows:
        raise ParseError(path, 0, "no data rows")
    cols = {k: np.array([r[i] for r in rows]) for i, k in enumerate(keys)}
    for k in require:
        if k not in cols:
            raise SchemaError(f"{path}: required column {k!r} missing")
    return meta, cols


def read_vtk_cells(path):
    """Legacy-ASCII VTK unstructured grid -> (centers, sizes, cell data).

    Assumes axis-aligned quad cells (the solver's output convention).
    Returns (centers (N, 2), sizes (N, 2), {name: (N,) array}).
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    idx = 0

    def fail(msg):
        raise ParseError(path, idx + 1, msg)

    if len(lines) < 5 or not lines[0].startswith("# vtk"):
        fail("not a legacy VTK file")
    points = None
    conn = None
    data = {}
    ncell = None
    while idx < len(lines):
        line = lines[idx].strip()
        if line.startswith("POINTS"):
            npts = int(line.split()[1])
            vals = []
            idx += 1
            while len(vals) < 3 * npts:
                vals.extend(float(x) for x in lines[idx].split())
                idx += 1
            points = np.array(vals).reshape(npts, 3)[:, :2]
            continue
        if line.startswith("CELLS"):
            ncell = int(line.split()[1])
            conn = np.empty((ncell, 4), dtype=int)
            for k in range(ncell):
                idx += 1
                parts = lines[idx].split()
                if parts[0] != "4":
                    fail("only quad cells are supported")
                conn[k] = [int(p) for p in parts[1:5]]
            idx += 1
            continue
        if line.startswith("SCALARS"):
            name = line.split()[1]
            idx += 2          # skip LOOKUP_TABLE
            vals = []
            while len(vals) < ncell:
                vals.extend(float(x) for x in lines[idx].split())
                idx += 1
            data[name] = np.array(vals)
            continue
        idx += 1
    if points is None or conn is None or ncell is None:
        fail("missing POINTS or CELLS section")
    corners = points[conn]                       # (N, 4, 2)
    centers = corners.mean(axis=1)
    sizes = corners.max(axis=1) - corners.min(axis=1)
    return centers, sizes, data


def rasterize_cells(centers, sizes, values):
    """Paint per-cell values onto the finest covering uniform grid.

    Returns (x_edges, y_edges, grid) with grid indexed [ix, iy].
    """
    hx = sizes[:, 0].min()
    hy = sizes[:, 1].min()
    x0 = (centers[:, 0] - 0.5 * sizes[:, 0]).min()
    x1 = (centers[:, 0] + 0.5 * sizes[:, 0]).max()
    y0 = (centers[:, 1] - 0.5 * sizes[:, 1]).min()
    y1 = (centers[:, 1] + 0.5 * sizes[:, 1]).max()
    nx = int(round((x1 - x0) / hx))
    ny = int(round((y1 - y0) / hy))
    grid = np.zeros((nx, ny))
    ix0 = np.rint((centers[:, 0] - 0.5 * sizes[:, 0] - x0) / hx).astype(int)
    iy0 = np.rint((centers[:, 1] - 0.5 * sizes[:, 1] - y0) / hy).astype(int)
    mx = np.rint(sizes[:, 0] / hx).astype(int)
    my = np.rint(sizes[:, 1] / hy).astype(int)
    for k in range(centers.shape[0]):
        grid[ix0[k]: ix0[k] + mx[k], iy0[k]: iy0[k] + my[k]] = values[k]
    return np.linspace(x0, x1, nx + 1), np.linspace(y0, y1, ny + 1), grid
