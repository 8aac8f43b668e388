"""Structured 1D/2D Cartesian mesh with cell-based quadtree AMR.

Cells live in a flat pool (struct-of-arrays); each cell knows its level and
integer coordinates on that level's grid.  Active cells tile the domain
exactly once and neighbor levels differ by at most one (2:1 balance,
enforced across edges and corners).  Faces are rebuilt after every
adaptation; a coarse/fine interface yields one face per fine cell.

Refinement marking uses a normalized second-difference indicator

    e = max_dir |f_m - 2 f_0 + f_p| / (0.3 |f_0| + |f_p - f_m|)

with same-level virtual neighbor values (restriction of finer cells,
injection of coarser ones, mirrored at physical boundaries).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MeshBalanceError(RuntimeError):
    """Internal 2:1 balance violation (must not occur)."""


@dataclass(frozen=True)
class AmrConfig:
    """Adaptation parameters."""

    max_levels: int = 0
    e_ref: float = 0.1
    coarsen_ratio: float = 0.5       # coarsen below coarsen_ratio * e_ref
    regrid_interval: int = 10
    indicator_fields: tuple = ("density",)

    def __post_init__(self):
        if self.e_ref <= 0.0:
            raise ValueError("refinement threshold must be positive")
        if not (0 <= self.max_levels <= 4):
            raise ValueError("max_levels must be in [0, 4]")


# direction stencils: (dx, dy) offsets of the plus-side neighbor
_DIRS_1D = ((1, 0),)
_DIRS_2D = ((1, 0), (0, 1), (1, 1), (1, -1))   # x, y and the two diagonals


class StructuredMesh:
    """Cartesian mesh with cell-based refinement.

    Parameters
    ----------
    nx, ny : base resolution (ny = 1 selects a 1D mesh)
    bounds : ((x0, x1),) or ((x0, x1), (y0, y1))
    periodic : per-axis periodicity flags
    """

    def __init__(self, nx, ny=1, bounds=((0.0, 1.0),), periodic=(False,)):
        self.dims = 1 if ny == 1 and len(bounds) == 1 else 2
        if self.dims == 1:
            bounds = (tuple(bounds[0]), (0.0, 1.0))
            periodic = (bool(periodic[0]), False)
        else:
            bounds = (tuple(bounds[0]), tuple(bounds[1]))
            periodic = (bool(periodic[0]), bool(periodic[1]))
        self.nx, self.ny = int(nx), int(ny)
        self.bounds = bounds
        self.periodic = periodic

        ncell = self.nx * self.ny
        ii, jj = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        self.level = np.zeros(ncell, dtype=np.int32)
        self.ix = ii.ravel().astype(np.int64)
        self.iy = jj.ravel().astype(np.int64)
        self.parent = np.full(ncell, -1, dtype=np.int64)
        self.child0 = np.full(ncell, -1, dtype=np.int64)
        self.active = np.ones(ncell, dtype=bool)
        self._rebuild()

    # -- geometry ------------------------------------------------------------

    def h(self, level, axis=0):
        lo, hi = self.bounds[axis]
        nbase = self.nx if axis == 0 else self.ny
        return (hi - lo) / (nbase << np.asarray(level, dtype=np.int64))

    def cell_centers(self, ids=None):
        ids = self.active_ids if ids is None else np.asarray(ids)
        hx = self.h(self.level[ids], 0)
        x = self.bounds[0][0] + (self.ix[ids] + 0.5) * hx
        if self.dims == 1:
            return x[:, None]
        hy = self.h(self.level[ids], 1)
        y = self.bounds[1][0] + (self.iy[ids] + 0.5) * hy
        return np.stack([x, y], axis=-1)

    def cell_volumes(self, ids=None):
        ids = self.active_ids if ids is None else np.asarray(ids)
        hx = self.h(self.level[ids], 0)
        if self.dims == 1:
            return hx
        return hx * self.h(self.level[ids], 1)

    def cell_sizes(self, ids=None):
        """Characteristic length (min cell extent)."""
        ids = self.active_ids if ids is None else np.asarray(ids)
        hx = self.h(self.level[ids], 0)
        if self.dims == 1:
            return hx
        return np.minimum(hx, self.h(self.level[ids], 1))

    @property
    def n_active(self):
        return self.active_ids.size

    # -- lookup --------------------------------------------------------------

    def _key(self, level, ix, iy):
        return ((np.asarray(level, dtype=np.int64) << 56)
                | (np.asarray(ix, dtype=np.int64) << 28)
                | np.asarray(iy, dtype=np.int64))

    def _lookup(self, level, ix, iy):
        """Pool indices for (level, ix, iy) triples; -1 where absent."""
        key = self._key(level, ix, iy)
        pos = np.searchsorted(self._keys_sorted, key)
        pos = np.clip(pos, 0, self._keys_sorted.size - 1)
        hit = self._keys_sorted[pos] == key
        return np.where(hit, self._order[pos], -1)

    def _wrap(self, level, ix, iy):
        """Apply periodic wrapping; returns (ix, iy, outside_mask)."""
        level = np.asarray(level, dtype=np.int64)
        NX = self.nx << level
        NY = self.ny << level
        out = np.zeros(np.shape(ix), dtype=bool)
        ix = np.asarray(ix, dtype=np.int64).copy()
        iy = np.asarray(iy, dtype=np.int64).copy()
        if self.periodic[0]:
            ix %= NX
        else:
            out |= (ix < 0) | (ix >= NX)
        if self.dims == 2:
            if self.periodic[1]:
                iy %= NY
            else:
                out |= (iy < 0) | (iy >= NY)
        else:
            out |= iy != 0
        return ix, iy, out

    # -- topology rebuild ----------------------------------------------------

    def _rebuild(self):
        order = np.argsort(self._key(self.level, self.ix, self.iy), kind="stable")
        self._order = order.astype(np.int64)
        self._keys_sorted = self._key(self.level, self.ix, self.iy)[order]
        self.active_ids = np.flatnonzero(self.active).astype(np.int64)
        self.pool_to_active = np.full(self.level.size, -1, dtype=np.int64)
        self.pool_to_active[self.active_ids] = np.arange(self.active_ids.size)
        self._build_faces()

    def _neighbor_class(self, ids, dx, dy):
        """Classify the (dx, dy) neighbor region of each pool cell.

        Returns (same, fine_parent, coarse, outside): pool index of the
        same-level active neighbor, of the same-level inactive cell whose
        ACTIVE children cover the region, of the active coarser neighbor,
        and a physical-boundary mask.  At most one index is >= 0 per cell.
        """
        lev = self.level[ids]
        jx, jy, out = self._wrap(lev, self.ix[ids] + dx, self.iy[ids] + dy)
        same = self._lookup(lev, jx, jy)
        same = np.where(out, -1, same)
        same_i = np.maximum(same, 0)
        same_active = (same >= 0) & self.active[same_i]
        coarse = np.where((~out) & (lev > 0),
                          self._lookup(lev - 1, jx >> 1, jy >> 1), -1)
        coarse_active = (coarse >= 0) & self.active[np.maximum(coarse, 0)]
        # whatever is neither boundary, same-level active nor covered by an
        # active coarse cell must be covered by finer descendants
        finep = (~out) & ~same_active & ~coarse_active & (same >= 0)
        return (np.where(same_active, same, -1),
                np.where(finep, same, -1),
                np.where(coarse_active & ~same_active, coarse, -1),
                out)

    def _build_faces(self):
        """Interior faces (one per interface) and boundary faces."""
        ids = self.active_ids
        axes = range(self.dims)
        int_axis, int_L, int_R, int_area = [], [], [], []
        bnd_cell, bnd_axis, bnd_sign, bnd_area = [], [], [], []

        for axis in axes:
            dx, dy = (1, 0) if axis == 0 else (0, 1)
            same, finep, coarse, out = self._neighbor_class(ids, dx, dy)
            area = self._face_area(self.level[ids], axis)

            # same-level faces, owned by the minus-side cell
            sel = same >= 0
            int_axis.append(np.full(sel.sum(), axis))
            int_L.append(ids[sel])
            int_R.append(same[sel])
            int_area.append(area[sel])

            # coarse/fine faces are always generated by the fine cell, so a
            # coarse interface yields exactly one face per facing fine cell
            sel = coarse >= 0
            int_axis.append(np.full(sel.sum(), axis))
            int_L.append(ids[sel])
            int_R.append(coarse[sel])
            int_area.append(area[sel])

            sel = out
            bnd_cell.append(ids[sel])
            bnd_axis.append(np.full(sel.sum(), axis))
            bnd_sign.append(np.ones(sel.sum()))
            bnd_area.append(area[sel])

            dxm, dym = (-dx, -dy)
            same_m, finep_m, coarse_m, out_m = self._neighbor_class(ids, dxm, dym)
            sel = coarse_m >= 0
            int_axis.append(np.full(sel.sum(), axis))
            int_L.append(coarse_m[sel])
            int_R.append(ids[sel])
            int_area.append(area[sel])

            sel = out_m
            bnd_cell.append(ids[sel])
            bnd_axis.append(np.full(sel.sum(), axis))
            bnd_sign.append(-np.ones(sel.sum()))
            bnd_area.append(area[sel])

        self.face_axis = np.concatenate(int_axis).astype(np.int64)
        self.face_L = np.concatenate(int_L).astype(np.int64)
        self.face_R = np.concatenate(int_R).astype(np.int64)
        self.face_area = np.concatenate(int_area)
        self.bface_cell = np.concatenate(bnd_cell).astype(np.int64)
        self.bface_axis = np.concatenate(bnd_axis).astype(np.int64)
        self.bface_sign = np.concatenate(bnd_sign)
        self.bface_area = np.concatenate(bnd_area)

    def _face_area(self, level, axis):
        if self.dims == 1:
            return np.ones(np.shape(level))
        other = 1 - axis
        return self.h(level, other)

    def face_pairs(self):
        """(left active index, right active index, axis, area) arrays."""
        return (self.pool_to_active[self.face_L],
                self.pool_to_active[self.face_R],
                self.face_axis, self.face_area)

    def boundary_faces(self):
        """(active index, axis, outward sign, area, side-name) arrays."""
        names_lo = ("x_lo", "y_lo")
        names_hi = ("x_hi", "y_hi")
        names = np.where(self.bface_sign > 0,
                         np.array(names_hi)[self.bface_axis],
                         np.array(names_lo)[self.bface_axis])
        return (self.pool_to_active[self.bface_cell], self.bface_axis,
                self.bface_sign, self.bface_area, names)

    # -- virtual same-level neighbor values ----------------------------------

    def virtual_neighbor_values(self, values, dx, dy):
        """Same-level virtual value of the (dx, dy) neighbor of each active
        cell: active neighbor value, mean of a refined neighbor's children,
        or the covering coarse value.  Returns (values, outside_mask); the
        caller decides the boundary treatment."""
        ids = self.active_ids
        same, finep, coarse, out = self._neighbor_class(ids, dx, dy)
        res = np.where(out, values, 0.0)
        sel = same >= 0
        res[sel] = values[self.pool_to_active[same[sel]]]
        sel = finep >= 0
        if np.any(sel):
            c0 = self.child0[finep[sel]]
            acc = np.zeros(sel.sum())
            for k in range(1 << self.dims):
                acc += values[self.pool_to_active[c0 + k]]
            res[sel] = acc / (1 << self.dims)
        sel = coarse >= 0
        res[sel] = values[self.pool_to_active[coarse[sel]]]
        covered = (same >= 0) | (finep >= 0) | (coarse >= 0) | out
        if not np.all(covered):
            raise MeshBalanceError("unresolved neighbor in indicator stencil")
        return res, out

    # -- adaptation ----------------------------------------------------------

    def refinement_indicator(self, values):
        """Normalized second-difference error metric per active cell.

        Boundary stencils use slope-preserving one-sided ghost values
        (2 f0 - f_opposite), so constant and linear fields give e = 0.
        """
        dirs = _DIRS_1D if self.dims == 1 else _DIRS_2D
        e = np.zeros(self.n_active)
        for dx, dy in dirs:
            fp, out_p = self.virtual_neighbor_values(values, dx, dy)
            fm, out_m = self.virtual_neighbor_values(values, -dx, -dy)
            fp = np.where(out_p & ~out_m, 2.0 * values - fm, fp)
            fm = np.where(out_m & ~out_p, 2.0 * values - fp, fm)
            d2 = np.abs(fm - 2.0 * values + fp)
            d1 = np.abs(fp - fm)
            e = np.maximum(e, d2 / (0.3 * np.abs(values) + d1 + 1e-300))
        return e

    def _ensure_children(self, pool_ids):
        """Create children records for the given pool cells (inactive)."""
        pool_ids = np.asarray(pool_ids, dtype=np.int64)
        need = pool_ids[self.child0[pool_ids] < 0]
        if need.size == 0:
            return
        nchild = 1 << self.dims
        base = self.level.size
        reps = np.repeat(need, nchild)
        k = np.tile(np.arange(nchild), need.size)
        cdx = k & 1
        cdy = (k >> 1) & 1
        self.level = np.concatenate([self.level, self.level[reps] + 1])
        self.ix = np.concatenate([self.ix, 2 * self.ix[reps] + cdx])
        self.iy = np.concatenate([self.iy, 2 * self.iy[reps] + cdy])
        self.parent = np.concatenate([self.parent, reps])
        self.child0 = np.concatenate(
            [self.child0, np.full(need.size * nchild, -1, dtype=np.int64)])
        self.active = np.concatenate(
            [self.active, np.zeros(need.size * nchild, dtype=bool)])
        self.child0[need] = base + nchild * np.arange(need.size)

    def _balance_marks(self):
        """Active cells whose neighborhood is >= 2 levels finer."""
        ids = self.active_ids
        marks = np.zeros(ids.size, dtype=bool)
        dirs = [(1, 0), (-1, 0)] if self.dims == 1 else \
            [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
        for dx, dy in dirs:
            _, finep, _, _ = self._neighbor_class(ids, dx, dy)
            sel = finep >= 0
            if not np.any(sel):
                continue
            c0 = self.child0[finep[sel]]
            deep = np.zeros(sel.sum(), dtype=bool)
            for k in range(1 << self.dims):
                cid = c0 + k
                deep |= (self.child0[cid] >= 0) & ~self.active[cid]
            m = np.zeros(ids.size, dtype=bool)
            m[sel] = deep
            marks |= m
        return marks


def adapt(mesh: StructuredMesh, fields: dict, cfg: AmrConfig,
          density=None, weights=None):
    """Adapt the mesh to the indicator and remap per-active-cell fields.

    fields maps name -> array (leading axis = active cells); weights maps
    name -> "volume" (default, conservative) or "mass" (density-weighted,
    for the frozen-pair fields).  `density` supplies both the default
    indicator field and the mass weighting.  Returns the remapped fields.
    """
    weights = weights or {}
    if density is None:
        density = next(iter(fields.values()))
        if density.ndim > 1:
            density = density[:, 0]

    for _ in range(cfg.max_levels + 2):
        e = mesh.refinement_indicator(np.asarray(density, dtype=float))
        ids = mesh.active_ids
        refine = (e > cfg.e_ref) & (mesh.level[ids] < cfg.max_levels)

        # coarsening: sibling groups entirely below the hysteresis threshold
        coarsen_parent = _coarsen_candidates(mesh, e, cfg)
        if coarsen_parent.size and np.any(refine):
            # a child being refined vetoes its parent's coarsening
            flagged = np.zeros(mesh.level.size, dtype=bool)
            flagged[ids[refine]] = True
            nchild = 1 << mesh.dims
            keep = [p for p in coarsen_parent
                    if not np.any(flagged[mesh.child0[p]: mesh.child0[p] + nchild])]
            coarsen_parent = np.asarray(keep, dtype=np.int64)

        if not np.any(refine) and coarsen_parent.size == 0:
            break
        fields, density = _apply_marks(mesh, fields, weights, density,
                                       ids[refine], coarsen_parent)
        # restore 2:1 balance before the indicator runs again
        for _ in range(cfg.max_levels + 2):
            marks = mesh._balance_marks()
            if not np.any(marks):
                break
            fields, density = _apply_marks(
                mesh, fields, weights, density, mesh.active_ids[marks],
                np.empty(0, dtype=np.int64))
    if np.any(mesh._balance_marks()):
        raise MeshBalanceError("2:1 balance not achieved")
    return fields


def _coarsen_candidates(mesh, e, cfg):
    ids = mesh.active_ids
    lev = mesh.level[ids]
    candidates = (e < cfg.coarsen_ratio * cfg.e_ref) & (lev > 0)
    if not np.any(candidates):
        return np.empty(0, dtype=np.int64)
    parents = np.unique(mesh.parent[ids[candidates]])
    ok = []
    nchild = 1 << mesh.dims
    emap = np.full(mesh.level.size, np.inf)
    emap[ids] = e
    for p in parents:
        c0 = mesh.child0[p]
        kids = np.arange(c0, c0 + nchild)
        if not np.all(mesh.active[kids]):
            continue
        if np.any(emap[kids] >= cfg.coarsen_ratio * cfg.e_ref):
            continue
        ok.append(p)
    if not ok:
        return np.empty(0, dtype=np.int64)
    ok = np.asarray(ok, dtype=np.int64)
    # veto parents whose coarsening would break 2:1 balance: any neighbor
    # region of the parent holding cells finer than level(parent)+1
    keep = []
    dirs = [(1, 0), (-1, 0)] if mesh.dims == 1 else \
        [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    for p in ok:
        good = True
        for dx, dy in dirs:
            jx, jy, out = mesh._wrap(mesh.level[p], mesh.ix[p] + dx, mesh.iy[p] + dy)
            if np.any(out):
                continue
            nb = mesh._lookup(mesh.level[p], jx, jy)
            nb = int(np.asarray(nb).ravel()[0])
            if nb < 0 or mesh.active[nb] or mesh.child0[nb] < 0:
                continue
            kids = np.arange(mesh.child0[nb], mesh.child0[nb] + nchild)
            if np.any((mesh.child0[kids] >= 0) & ~mesh.active[kids]):
                good = False
                break
        if good:
            keep.append(p)
    return np.asarray(keep, dtype=np.int64)


def _apply_marks(mesh, fields, weights, density, refine_pool, coarsen_parents):
    """Refine/coarsen marked cells and remap fields conservatively."""
    nchild = 1 << mesh.dims
    old_size = mesh.level.size
    old_pool_to_active = np.full(old_size, -1, dtype=np.int64)
    old_pool_to_active[: old_size] = mesh.pool_to_active
    old_active = mesh.active.copy()
    rho_old = np.asarray(density, dtype=float)

    mesh._ensure_children(refine_pool)
    if mesh.level.size > old_size:
        pad = mesh.level.size - old_size
        old_pool_to_active = np.concatenate(
            [old_pool_to_active, np.full(pad, -1, dtype=np.int64)])
        old_active = np.concatenate([old_active, np.zeros(pad, dtype=bool)])
    if refine_pool.size:
        mesh.active[refine_pool] = False
        c0 = mesh.child0[refine_pool]
        for k in range(nchild):
            mesh.active[c0 + k] = True
    if coarsen_parents.size:
        mesh.active[coarsen_parents] = True
        c0 = mesh.child0[coarsen_parents]
        for k in range(nchild):
            mesh.active[c0 + k] = False
    mesh._rebuild()

    new_ids = mesh.active_ids
    # provenance of each new active cell: itself (kept), parent (refined),
    # or its children (coarsened)
    kept = old_active[new_ids] & (old_pool_to_active[new_ids] >= 0)
    from_parent = ~kept & (mesh.parent[new_ids] >= 0)
    from_parent &= np.where(from_parent,
                            old_pool_to_active[np.maximum(mesh.parent[new_ids], 0)] >= 0,
                            False)
    from_children = ~kept & ~from_parent

    def remap(arr, weight_kind):
        arr = np.asarray(arr)
        out = np.empty((new_ids.size,) + arr.shape[1:], dtype=arr.dtype)
        out[kept] = arr[old_pool_to_active[new_ids[kept]]]
        sel = np.flatnonzero(from_parent)
        out[sel] = arr[old_pool_to_active[mesh.parent[new_ids[sel]]]]
        sel = np.flatnonzero(from_children)
        if sel.size:
            c0 = mesh.child0[new_ids[sel]]
            num = 0.0
            den = 0.0
            for k in range(nchild):
                j = old_pool_to_active[c0 + k]
                w = rho_old[j] if weight_kind == "mass" else 1.0
                num = num + (w * arr[j].T).T
                den = den + w
            out[sel] = (num.T / den).T
        return out

    new_fields = {name: remap(arr, weights.get(name, "volume"))
                  for name, arr in fields.items()}
    new_density = remap(rho_old, "volume")
    return new_fields, new_density
