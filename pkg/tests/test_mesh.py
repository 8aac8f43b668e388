"""Mesh topology, the refinement indicator and conservative adaptation."""

import numpy as np
import pytest

from esdflow import mesh as M


def refined_center(nx=3, ny=3):
    """3x3 mesh with the center cell split once."""
    m = M.StructuredMesh(nx, ny, bounds=((0, nx), (0, ny)),
                         periodic=(False, False))
    center = (nx // 2) * ny + ny // 2
    m._ensure_children(np.array([center]))
    m.active[center] = False
    m.active[m.child0[center]: m.child0[center] + 4] = True
    m._rebuild()
    return m, center


class TestTopology:
    def test_periodic_1d_face_count(self):
        m = M.StructuredMesh(8, bounds=((0.0, 1.0),), periodic=(True,))
        assert m.face_pairs()[0].size == 8
        assert m.bface_cell.size == 0

    def test_bounded_1d_faces(self):
        m = M.StructuredMesh(8, bounds=((0.0, 1.0),), periodic=(False,))
        assert m.face_pairs()[0].size == 7
        assert m.bface_cell.size == 2

    def test_2d_face_count(self):
        m = M.StructuredMesh(4, 3, bounds=((0, 4), (0, 3)),
                             periodic=(False, False))
        assert m.face_pairs()[0].size == 3 * 3 + 4 * 2
        assert m.bface_cell.size == 2 * 3 + 2 * 4

    def test_faces_unique(self):
        m, _ = refined_center()
        L, R, ax, _ = m.face_pairs()
        seen = {(int(a), int(l), int(r)) for a, l, r in zip(ax, L, R)}
        assert len(seen) == L.size

    def test_coarse_fine_interface_two_half_faces(self):
        m, center = refined_center()
        west = m.pool_to_active[center - 3]   # (ix-1, iy) of the center
        L, R, ax, area = m.face_pairs()
        hits = [float(area[k]) for k in range(L.size)
                if ax[k] == 0 and L[k] == west and R[k] != west]
        assert sorted(hits) == [0.5, 0.5]

    def test_surface_closure(self):
        m, _ = refined_center()
        L, R, ax, area = m.face_pairs()
        closure = np.zeros((m.n_active, 2))
        np.add.at(closure, (L, ax), area)
        np.add.at(closure, (R, ax), -area)
        ci, axb, sgn, ab, _ = m.boundary_faces()
        np.add.at(closure, (ci, axb), sgn * ab)
        assert np.abs(closure).max() < 1e-12


class TestIndicator:
    def test_constant_field_zero(self):
        m = M.StructuredMesh(5, bounds=((0.0, 5.0),), periodic=(False,))
        assert m.refinement_indicator(np.full(5, 3.0)).max() == 0.0

    def test_spike_hand_value(self):
        m = M.StructuredMesh(5, bounds=((0.0, 5.0),), periodic=(False,))
        e = m.refinement_indicator(np.array([1.0, 1.0, 2.0, 1.0, 1.0]))
        assert e[2] == pytest.approx(2.0 / 0.6, rel=1e-12)   # ~3.333
        assert e[2] > 0.1

    def test_linear_ramp_zero(self):
        m = M.StructuredMesh(6, bounds=((0.0, 6.0),), periodic=(False,))
        e = m.refinement_indicator(np.linspace(1.0, 2.0, 6))
        assert e.max() < 1e-12

    def test_scale_invariance(self):
        m = M.StructuredMesh(7, bounds=((0.0, 7.0),), periodic=(False,))
        f = np.array([1.0, 1.0, 2.0, 5.0, 2.0, 1.0, 1.0])
        assert np.allclose(m.refinement_indicator(f),
                           m.refinement_indicator(1e6 * f), rtol=1e-12)


class TestAdapt:
    def test_uniform_no_change(self):
        m = M.StructuredMesh(8, bounds=((0.0, 8.0),), periodic=(True,))
        M.adapt(m, {"u": np.ones(8)}, M.AmrConfig(max_levels=2),
                density=np.ones(8))
        assert m.n_active == 8

    def test_refine_then_coarsen_round_trip(self):
        m = M.StructuredMesh(8, bounds=((0.0, 8.0),), periodic=(True,))
        m._ensure_children(m.active_ids)
        for p in range(8):
            m.active[p] = False
            m.active[m.child0[p]: m.child0[p] + 2] = True
        m._rebuild()
        u = np.full(m.n_active, 2.5)
        out = M.adapt(m, {"u": u}, M.AmrConfig(max_levels=1), density=u)
        assert m.n_active == 8
        assert np.all(out["u"] == 2.5)
        assert np.all(m.level[m.active_ids] == 0)

    def test_conservation_through_adaptation(self):
        m = M.StructuredMesh(16, bounds=((0.0, 16.0),), periodic=(False,))
        rho = np.ones(16)
        rho[7] = 4.0
        rhoE = 2.0 + rho
        mass0 = float(np.sum(rho * m.cell_volumes()))
        energy0 = float(np.sum(rhoE * m.cell_volumes()))
        out = M.adapt(m, {"rho": rho, "rhoE": rhoE},
                      M.AmrConfig(max_levels=2), density=rho)
        V = m.cell_volumes()
        assert abs(np.sum(out["rho"] * V) - mass0) <= 1e-12 * mass0
        assert abs(np.sum(out["rhoE"] * V) - energy0) <= 1e-12 * energy0
        assert m.n_active > 16

    def test_two_one_balance_after_adapt(self):
        m = M.StructuredMesh(12, 12, bounds=((0, 12), (0, 12)),
                             periodic=(False, False))
        rho = np.ones(144)
        rho[6 * 12 + 6] = 50.0
        M.adapt(m, {"rho": rho}, M.AmrConfig(max_levels=3, e_ref=0.1),
                density=rho)
        assert not np.any(m._balance_marks())
        # every face has level difference <= 1 (indices are active-compact)
        L, R, ax, _ = m.face_pairs()
        lev = m.level[m.active_ids]
        ldiff = np.abs(lev[L] - lev[R])
        assert ldiff.max() <= 1

    def test_mass_weighted_restriction(self):
        m = M.StructuredMesh(2, bounds=((0.0, 2.0),), periodic=(False,))
        m._ensure_children(m.active_ids)
        for p in range(2):
            m.active[p] = False
            m.active[m.child0[p]: m.child0[p] + 2] = True
        m._rebuild()
        rho = np.array([1.0, 3.0, 1.0, 1.0])
        gs = np.array([1.4, 1.6, 1.4, 1.4])
        out = M.adapt(m, {"rho": rho, "gs": gs},
                      M.AmrConfig(max_levels=1, e_ref=1e9),
                      density=rho, weights={"gs": "mass"})
        assert m.n_active == 2
        # first coarse cell: (1*1.4 + 3*1.6)/4 mass-weighted
        assert out["gs"][np.argmax(out["rho"])] == pytest.approx(
            (1.0 * 1.4 + 3.0 * 1.6) / 4.0, rel=1e-12)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            M.AmrConfig(max_levels=7)
        with pytest.raises(ValueError):
            M.AmrConfig(e_ref=0.0)
