"""Acceptance suite: one test per acceptance criterion, each printing a
PASS/FAIL line with the measured figure of merit.

The shock-bubble run is by far the longest item (tens of minutes); it runs
once in a module-scoped fixture and several criteria assert against its
recorded history.
"""

import math
import time

import numpy as np
import pytest

from esdflow import cases as cs, flux as fx, mesh as M, state as st, thermo
from esdflow import verify as vf
from esdflow.cases import CaseSpec
from esdflow.solver import Solver, UnstableStateError

REPORT = []


def record(name, passed, detail):
    line = f"ACCEPTANCE {'PASS' if passed else 'FAIL'}: {name}: {detail}"
    REPORT.append(line)
    print("\n" + line)
    assert passed, line


@pytest.fixture(scope="module", autouse=True)
def write_report(request):
    yield
    with open("acceptance_report.txt", "w") as fh:
        fh.write("\n".join(REPORT) + "\n")


def test_entropy_convergence_res1():
    """res1, 500 cells, central flux, fixed-step sweep: fitted order of the
    final entropy change lies in [2.5, 3.5]."""
    t0 = time.time()
    pairs = []
    for dt in (4e-4, 2e-4, 1e-4, 5e-5):
        setup = cs.setup_case(CaseSpec(case="res1", dt=dt,
                                       scheme="esdf-central"))
        solver = Solver(setup.mix, setup.mesh, setup.U0, setup.cfg)
        S0 = solver.total_entropy()
        solver.run()
        pairs.append((dt, abs(solver.total_entropy() - S0)))
    order = cs.convergence_fit(pairs)
    wall = time.time() - t0
    record("entropy-convergence (order target 2.5..3.5, reported 2.91)",
           2.5 <= order <= 3.5,
           f"fitted order {order:.3f}; sweep {pairs}; {wall:.0f}s")


def test_ec_shuffle_identity():
    """10^4 random pairs, 1 <= n <= 4, d <= 2: shuffle residual of the
    entropy-conservative flux below 1e-10 x state scale."""
    t0 = time.time()
    rng = np.random.default_rng(2024)
    result = vf.check_ec_shuffle(rng, 10000)
    record("ec-shuffle-identity", result["passed"],
           f"max scaled residual {result['max_err']:.3e} (tol 1e-10); "
           f"{time.time() - t0:.1f}s")


def test_esdf_entropy_production():
    """10^4 random pairs: the central double-flux residual equals the
    closed-form species term at 1e-10 scaled, is non-positive, and the
    hybrid dissipation only lowers it."""
    rng = np.random.default_rng(77)
    result = vf.check_es_production(rng, 10000)
    record("esdf-entropy-production", result["passed"],
           f"identity err {result['max_err']:.3e}, sign max "
           f"{result['sign_max']:.3e}, dissipation monotone max "
           f"{result['dissipation_monotone_max']:.3e}")


def test_lemma_suite():
    """Jump identities behind the entropy-stability proof at 1e-10 scaled
    over 10^4 states; the composition-sign lemma on every sampled pair."""
    rng = np.random.default_rng(4242)
    results = vf.check_lemmas(rng, 10000)
    ok = all(r["passed"] for r in results)
    record("lemma-suite",
           ok, "; ".join(f"{r['name']}={r['max_err']:.2e}" for r in results))


def test_res2_oscillation_free_and_control():
    """Moving interface at 1000 cells to t = 1 ms: double-flux scheme keeps
    p and v within 1e-6 relative; the single-pair control exceeds 1e-3."""
    t0 = time.time()
    devs = {}
    for label, kw in (("esdf", {}), ("control", {"double_flux": False})):
        setup = cs.setup_case(CaseSpec(case="res2", **kw))
        solver = Solver(setup.mix, setup.mesh, setup.U0, setup.cfg)
        pmax = vmax = 0.0

        def on_out(s):
            nonlocal pmax, vmax
            _, _, vel, p = s.primitives(s.U)
            pmax = max(pmax, float(np.max(np.abs(p - 101325.0)) / 101325.0))
            vmax = max(vmax, float(np.max(np.abs(vel[:, 0] - 100.0)) / 100.0))

        solver.run(on_output=on_out)
        devs[label] = (pmax, vmax)
    ok = (devs["esdf"][0] <= 1e-6 and devs["esdf"][1] <= 1e-6
          and devs["control"][0] > 1e-3)
    record("res2-oscillation-free (esdf <= 1e-6, control > 1e-3)", ok,
           f"esdf p/v dev {devs['esdf'][0]:.2e}/{devs['esdf'][1]:.2e}; "
           f"control p/v dev {devs['control'][0]:.2e}/{devs['control'][1]:.2e}; "
           f"{time.time() - t0:.0f}s")


def test_kep_structure():
    """Momentum flux of both two-point fluxes decomposes exactly as
    p_face n + vbar (mass flux)."""
    rng = np.random.default_rng(5)
    result = vf.check_kep_structure(rng, 10000)
    record("kep-structure", result["passed"],
           f"max decomposition error {result['max_err']:.3e} (tol 1e-12)")


def test_dissipation_spd_and_a0_oracle():
    """Quadratic form of the dissipation operator non-negative on 10^4
    pairs; eigenvector-scaling reconstruction matches the finite-difference
    symmetrizer at coincident states to 1e-5."""
    rng = np.random.default_rng(99)
    spd = vf.check_spd(rng, 10000)
    a0 = vf.check_a0_oracle(np.random.default_rng(123), 10000)
    record("dissipation-spd+a0-oracle", spd["passed"] and a0["passed"],
           f"min quadratic form >= -{spd['max_err']:.1e}; "
           f"A0 reconstruction err {a0['max_err']:.3e} (tol 1e-5)")


def test_amr_indicator_and_conservation():
    """Hand-computed spike value triggers refinement at e_ref = 0.1;
    constant and linear fields give e = 0; adaptation conserves mass to
    1e-12."""
    m = M.StructuredMesh(5, bounds=((0.0, 5.0),), periodic=(False,))
    e_spike = m.refinement_indicator(np.array([1.0, 1.0, 2.0, 1.0, 1.0]))
    spike_ok = (abs(e_spike[2] - 10.0 / 3.0) < 1e-12) and e_spike[2] > 0.1
    e_const = m.refinement_indicator(np.full(5, 7.0)).max()
    e_lin = m.refinement_indicator(np.linspace(0.0, 4.0, 5) + 1.0).max()

    m2 = M.StructuredMesh(16, bounds=((0.0, 16.0),), periodic=(False,))
    rho = np.ones(16)
    rho[7] = 4.0
    mass0 = float(np.sum(rho * m2.cell_volumes()))
    out = M.adapt(m2, {"rho": rho}, M.AmrConfig(max_levels=2), density=rho)
    mass_err = abs(float(np.sum(out["rho"] * m2.cell_volumes())) - mass0) / mass0
    refined = m2.n_active > 16
    ok = spike_ok and e_const == 0.0 and e_lin < 1e-12 and mass_err <= 1e-12 \
        and refined
    record("amr-indicator", ok,
           f"spike e {e_spike[2]:.4f} (expect 3.3333), const {e_const:.1e}, "
           f"linear {e_lin:.1e}, adapt mass err {mass_err:.2e}")


def test_normal_shock_triplet():
    """Normal-shock helper reproduces (T2/T1, p2/p1, M2) =
    (1.14054, 1.56979, 0.829986) at M1 = 1.22, gamma = 1.4 to five
    significant digits."""
    pre = {"rho": 1.29, "p": 1.0e5, "T": 300.0, "v": 0.0}
    post = cs.normal_shock_state(1.22, pre, gamma=1.4)
    errs = (abs(post["T_ratio"] / 1.14054 - 1.0),
            abs(post["p_ratio"] / 1.56979 - 1.0),
            abs(post["M2"] / 0.829986 - 1.0))
    record("normal-shock-triplet", max(errs) < 1e-5,
           f"T2/T1 {post['T_ratio']:.6f}, p2/p1 {post['p_ratio']:.6f}, "
           f"M2 {post['M2']:.7f}; max rel err {max(errs):.2e}")


# ---------------------------------------------------------------------------
# shock-bubble desk run (shared by several criteria)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def res3_run():
    spec = CaseSpec(case="res3")          # 650 x 91 base, 1 AMR level
    setup = cs.setup_case(spec)
    solver = Solver(setup.mix, setup.mesh, setup.U0, setup.cfg)
    history = {"t": [], "front": [], "track": cs.InterfaceTrack(),
               "aborted": None}
    p_mid = 0.5 * (setup.meta["pre"]["p"] + setup.meta["post"]["p"])

    def on_out(s):
        _, _, _, p = s.primitives(s.U)
        xy = s.mesh.cell_centers()
        row = xy[:, 1] < 3.0e-4
        x = xy[row, 0]
        order = np.argsort(x)
        pr = p[row][order]
        i = int(np.argmax(pr > p_mid))
        history["t"].append(s.t)
        history["front"].append(x[order][i])
        rho_i = st.species_densities(s.U, s.n, s.d, clip=True)
        Y_he = rho_i[:, 0] / s.U[:, s.n - 1]
        history["track"].append(s.t, cs.track_interface_points(s.mesh, Y_he))

    t0 = time.time()
    try:
        solver.run(on_output=on_out)
    except UnstableStateError as err:
        history["aborted"] = str(err)
    history["wall"] = time.time() - t0
    history["solver"] = solver
    history["meta"] = setup.meta
    return history


def test_res3_completes_without_abort(res3_run):
    s = res3_run["solver"]
    ok = res3_run["aborted"] is None and s.t >= 850e-6 * (1 - 1e-12)
    record("res3-run-to-completion", ok,
           f"t = {s.t * 1e6:.1f} us in {s.step_count} steps, "
           f"{res3_run['wall'] / 60:.1f} min, {s.mesh.n_active} cells, "
           f"aborted={res3_run['aborted']}")


def test_res3_preimpact_shock_speed(res3_run):
    t = np.array(res3_run["t"])
    x = np.array(res3_run["front"])
    sel = (t > 5e-6) & (t < 5e-5)        # before the bubble is reached
    speed = np.polyfit(t[sel], x[sel], 1)[0]
    target = res3_run["meta"]["shock_speed"]
    err = abs(abs(speed) / target - 1.0)
    record("res3-shock-speed (2% of M1 c1)", err < 0.02,
           f"measured {speed:.1f} m/s vs -{target:.1f} m/s; err {err * 100:.2f}%")


def test_res3_species_mass_conservation(res3_run):
    rep = res3_run["solver"].conservation_report()
    he_audit = abs(rep["audit_mass_He"])
    he_drift = abs(rep["drift_mass_He"])
    record("res3-helium-mass-conservation (1e-10 relative)",
           he_audit <= 1e-10 and he_drift <= 1e-10,
           f"flux-form audit {he_audit:.2e}, raw drift {he_drift:.2e}")


def test_res3_trajectories_monotone(res3_run):
    """After impact the downstream, jet and upstream points all move with
    the post-shock stream (toward -x), monotonically up to contour flicker.

    At desk resolution the first-order interface smears over several fine
    cells, so the half-fraction contour position is only defined to that
    thickness; backsteps up to 5 percent of the net displacement (or a few
    fine cells, whichever is larger) are measurement jitter, not reversals.
    """
    tr = res3_run["track"]
    t = np.array(tr.t)
    sel = t > 1.5e-4
    h = res3_run["solver"].mesh.cell_sizes().min()
    ok = True
    details = []
    for name, series in (("downstream", tr.downstream), ("jet", tr.jet),
                         ("upstream", tr.upstream)):
        x = np.array(series)[sel]
        increases = np.diff(x)
        worst = increases.max() if increases.size else 0.0
        moved = x[0] - x[-1]
        tol = max(8.0 * h, 0.05 * abs(moved))
        ok &= worst <= tol and moved > 0.0
        details.append(f"{name}: net -{moved * 1000:.1f} mm, "
                       f"worst backstep {worst * 1e6:.0f} um (tol "
                       f"{tol * 1e6:.0f} um)")
    record("res3-interface-trajectories-monotone", ok, "; ".join(details))
