"""Randomized property suite behind ``esdflow verify``.

Checks the structural identities of the flux machinery on sampled states:

* shuffle condition of the entropy-conservative flux,
* sign and closed form of the central double-flux entropy production,
* the jump identities used in the entropy-stability proof,
* entropy-variable round trips and the finite-difference symmetrizer oracle,
* positive semidefiniteness of the hybrid dissipation,
* kinetic-energy-preserving momentum-flux structure,
* consistency and conservation antisymmetry of every flux.

Equality checks that are exact only for frozen heats sample calorically
perfect species; the entropy-production identity additionally samples
equal-r mixtures (shared molar mass, distinct heat capacities), the regime
in which the face gas constant is composition-independent and the closed
form holds.  A mutation hook (mutate="dissipation-sign") flips the
dissipation sign so the suite's failure detection can itself be tested.
"""

from __future__ import annotations

import numpy as np

from . import flux as fx
from . import state as st
from . import thermo


def sample_mixture(rng, n, equal_r=False, with_e0=False):
    """Random calorically perfect mixture with n species."""
    species = []
    m_shared = rng.uniform(0.004, 0.05)
    for i in range(n):
        m = m_shared if equal_r else rng.uniform(0.002, 0.05)
        r = thermo.R_UNIVERSAL / m
        gamma = rng.uniform(1.2, 1.7)
        cp = gamma * r / (gamma - 1.0)
        e0 = rng.uniform(-2e5, 2e5) if with_e0 else 0.0
        species.append(thermo.SpeciesData(f"s{i}", m, e0, (cp,)))
    return thermo.GasMixture(species=tuple(species))


def sample_states(rng, mix, d, count):
    """Batch of admissible conserved states (count, m)."""
    n = mix.n_species
    rho = rng.uniform(0.2, 3.0, count)
    T = rng.uniform(200.0, 1200.0, count)
    v = rng.uniform(-300.0, 300.0, (count, d))
    Y = rng.uniform(0.05, 1.0, (count, n))
    Y = Y / Y.sum(axis=1, keepdims=True)
    return st.conserved_from_primitive(mix, rho, v, T, Y), (rho, T, v, Y)


def _residual_scale(mix, uL, uR, F, nrm, d):
    dv = st.entropy_vars(mix, uR, d) - st.entropy_vars(mix, uL, d)
    dpsi = np.sum((st.entropy_potential(mix, uR, d)
                   - st.entropy_potential(mix, uL, d)) * nrm, axis=-1)
    return np.sum(np.abs(dv * F), axis=-1) + np.abs(dpsi) + 1.0


def _fail(name, err, tol, detail=""):
    return {"name": name, "passed": bool(err <= tol), "max_err": float(err),
            "tol": tol, "detail": detail}


def check_ec_shuffle(rng, count):
    """|[[v]].F_ec - [[psi.n]]| <= 1e-10 x scale over random pairs."""
    worst = 0.0
    per = max(count // 8, 1)
    for n in (1, 2, 3, 4):
        for d in (1, 2):
            mix = sample_mixture(rng, n)
            nrm = np.zeros(d)
            nrm[rng.integers(0, d)] = 1.0
            uL, _ = sample_states(rng, mix, d, per)
            uR, _ = sample_states(rng, mix, d, per)
            F = fx.ec_flux(mix, uL, uR, nrm)
            r = fx.entropy_residual(mix, uL, uR, F, nrm)
            worst = max(worst, float(np.max(np.abs(r) / _residual_scale(
                mix, uL, uR, F, nrm, d))))
    return _fail("ec-shuffle", worst, 1e-10)


def _es_production(rng, count, mutate=None):
    """Residual of the central double-flux flux: closed form and sign, and
    monotone decrease under the hybrid dissipation."""
    worst_eq = 0.0
    worst_sign = -np.inf
    worst_mono = -np.inf
    example = ""
    per = max(count // 6, 1)
    for n in (2, 3, 4):
        for d in (1, 2):
            mix = sample_mixture(rng, n, equal_r=True)
            nrm = np.zeros(d)
            nrm[0] = 1.0
            uL, (rhoL, TL, vL, YL) = sample_states(rng, mix, d, per)
            uR, (rhoR, TR, vR, YR) = sample_states(rng, mix, d, per)
            pL = thermo.pressure_eos(mix, rhoL, TL, YL)
            pR = thermo.pressure_eos(mix, rhoR, TR, YR)
            vn = 0.5 * np.sum((vL + vR) * nrm, axis=-1)
            Yup = np.where((vn >= 0.0)[:, None], YL, YR)
            sp = thermo.star_properties(mix, 300.0, Yup)
            fp = (np.asarray(sp.gamma_star), np.asarray(sp.e0_star))
            F = fx.esdf_central_flux(mix, uL, uR, nrm, fp, pL=pL, pR=pR)
            res = fx.entropy_residual(mix, uL, uR, F, nrm)
            rho_ln = fx.log_mean(rhoL, rhoR)
            rhs = np.einsum("i,ki,ki->k", mix.r_i, Yup,
                            np.log(YR) - np.log(YL)) * rho_ln * vn
            scale = np.abs(rhs) + _residual_scale(mix, uL, uR, F, nrm, d)
            worst_eq = max(worst_eq, float(np.max(np.abs(res - rhs) / scale)))
            worst_sign = max(worst_sign, float(np.max(res / scale)))

            spec = fx.DissipationSpec(mode="hybrid", jump_form="entropy")
            diss = fx.hybrid_dissipation(mix, uL, uR, nrm, fp, spec,
                                         pL=pL, pR=pR)
            if mutate == "dissipation-sign":
                diss = -diss
            res_es = fx.entropy_residual(mix, uL, uR, F - diss, nrm)
            mono = float(np.max((res_es - res) / scale))
            if mono > worst_mono:
                worst_mono = mono
                k = int(np.argmax((res_es - res) / scale))
                example = (f"n={n} d={d} rhoL={rhoL[k]:.4g} rhoR={rhoR[k]:.4g} "
                           f"TL={TL[k]:.4g} TR={TR[k]:.4g} YL={YL[k]} YR={YR[k]}")
    return worst_eq, worst_sign, worst_mono, example


def check_es_production(rng, count, mutate=None):
    eq, sign, mono, example = _es_production(rng, count, mutate)
    out = _fail("esdf-entropy-production", eq, 1e-10)
    out["passed"] = bool(out["passed"] and sign <= 1e-10 and mono <= 1e-10)
    out["sign_max"] = sign
    out["dissipation_monotone_max"] = mono
    if not out["passed"]:
        out["detail"] = example
    return out


def check_lemmas(rng, count):
    """Jump identities with frozen per-species heats.

    lemma-rho-jump: [[r(Y) rho]] = r [[rho]] whenever r(Y_L) = r(Y_R);
    lemma-composition-sign: the realized species production term is <= 0;
    lemma-gibbs-jump: [[theta g_i]] expansion into constant star heats;
    lemma-star-energy: the caloric identity behind the energy flux.
    """
    out = []
    worst = np.zeros(4)
    worst[1] = -np.inf
    per = max(count // 4, 1)
    for n in (2, 3):
        mix = sample_mixture(rng, n, equal_r=True, with_e0=True)
        _, (rhoL, TL, vL, YL) = sample_states(rng, mix, 1, per)
        _, (rhoR, TR, vR, YR) = sample_states(rng, mix, 1, per)

        # equal-r mixture: r(Y) is composition-independent, so the product
        # jump collapses onto the density jump
        r_state_L = YL @ mix.r_i
        r_state_R = YR @ mix.r_i
        r = 0.5 * (r_state_L + r_state_R)
        lhs1 = r_state_R * rhoR - r_state_L * rhoL
        rhs1 = r * (rhoR - rhoL)
        worst[0] = max(worst[0], float(np.max(np.abs(lhs1 - rhs1)
                                              / (np.abs(rhs1) + 1.0))))

        vn = 0.5 * (vL[:, 0] + vR[:, 0])
        Yup = np.where((vn >= 0)[:, None], YL, YR)
        rho_ln = fx.log_mean(rhoL, rhoR)
        term = np.einsum("i,ki,ki->k", mix.r_i, Yup,
                         np.log(YR) - np.log(YL)) * rho_ln * vn
        worst[1] = max(worst[1], float(np.max(term / (np.abs(term) + 1.0))))

        # [[theta g_i]] = e0_i [[theta]] + cv_i [[ln theta]] + r_i [[ln rho_i]]
        thetaL, thetaR = 1.0 / TL, 1.0 / TR
        gL = thermo.gibbs(mix, TL, rhoL[:, None] * YL)
        gR = thermo.gibbs(mix, TR, rhoR[:, None] * YR)
        cv = mix.cv_star_species(300.0)          # constant per-species heats
        lhs3 = thetaR[:, None] * gR - thetaL[:, None] * gL
        rhs3 = (mix.e0_i * (thetaR - thetaL)[:, None]
                + cv * (np.log(thetaR) - np.log(thetaL))[:, None]
                + mix.r_i * (np.log(rhoR[:, None] * YR)
                             - np.log(rhoL[:, None] * YL)))
        worst[2] = max(worst[2], float(np.max(np.abs(lhs3 - rhs3)
                                              / (np.abs(rhs3) + 1.0))))

        # star-energy identity at one fixed composition
        Yf = YL[0]
        e0s = Yf @ mix.e0_i
        cvs = Yf @ cv
        pL = thermo.pressure_eos(mix, rhoL, TL, Yf)
        pR = thermo.pressure_eos(mix, rhoR, TR, Yf)
        beta_ln = fx.log_mean(rhoL / pL, rhoR / pR)
        theta_ln = fx.log_mean(thetaL, thetaR)
        sp = thermo.star_properties(mix, 300.0, Yf)
        lhs4 = (e0s + cvs / theta_ln) * rho_ln
        rhs4 = (e0s + 1.0 / ((sp.gamma_star - 1.0) * beta_ln)) * rho_ln
        worst[3] = max(worst[3], float(np.max(np.abs(lhs4 - rhs4)
                                              / (np.abs(rhs4) + 1.0))))
    out.append(_fail("lemma-rho-jump", worst[0], 1e-10))
    sign = _fail("lemma-composition-sign", 0.0, 1e-10)
    sign["passed"] = bool(worst[1] <= 1e-10)
    sign["max_err"] = float(worst[1])
    out.append(sign)
    out.append(_fail("lemma-gibbs-jump", worst[2], 1e-10))
    out.append(_fail("lemma-star-energy", worst[3], 1e-10))
    return out


def check_roundtrips(rng, count):
    worst = 0.0
    per = max(count // 4, 1)
    for n in (1, 2, 3):
        for d in (1, 2):
            mix = sample_mixture(rng, n)
            u, _ = sample_states(rng, mix, d, per)
            v = st.entropy_vars(mix, u, d)
            u2 = st.conserved_from_entropy(mix, v, d)
            worst = max(worst, float(np.max(np.abs(u2 - u)
                                            / np.maximum(np.abs(u), 1e-12))))
            v2 = st.entropy_vars(mix, u2, d)
            worst = max(worst, float(np.max(np.abs(v2 - v)
                                            / np.maximum(np.abs(v), 1e-12))))
    return _fail("entropy-variable-roundtrip", worst, 1e-8)


def check_a0_oracle(rng, count):
    """R T R^T reconstruction against the finite-difference symmetrizer at
    coincident states: single species and uniform-gamma mixtures."""
    worst = 0.0
    trials = max(min(count // 500, 20), 3)
    for _ in range(trials):
        kind = rng.integers(0, 2)
        if kind == 0:
            mix = sample_mixture(rng, 1)
        else:
            # distinct molar masses, one shared gamma
            gamma = rng.uniform(1.25, 1.65)
            species = []
            for i in range(int(rng.integers(2, 4))):
                m = rng.uniform(0.004, 0.05)
                r = thermo.R_UNIVERSAL / m
                species.append(thermo.SpeciesData(
                    f"s{i}", m, 0.0, (gamma * r / (gamma - 1.0),)))
            mix = thermo.GasMixture(species=tuple(species))
        d = int(rng.integers(1, 3))
        u, (rho, T, v, Y) = sample_states(rng, mix, d, 1)
        u = u[0]
        sp = thermo.star_properties(mix, T[0], Y[0])
        fp = (float(sp.gamma_star), float(sp.e0_star))
        nrm = np.zeros(d)
        nrm[rng.integers(0, d)] = 1.0
        R, lam, Td = fx.eigensystem(mix, u, u, nrm, fp)
        A_rec = (R * Td) @ R.T
        A_fd = st.entropy_jacobian_fd(mix, u, d)
        worst = max(worst, float(np.linalg.norm(A_rec - A_fd)
                                 / np.linalg.norm(A_fd)))
    return _fail("a0-reconstruction", worst, 1e-5)


def check_spd(rng, count, mutate=None):
    """Quadratic form of the dissipation operator is non-negative."""
    worst = -np.inf
    per = max(count // 4, 1)
    for n in (1, 2, 3):
        d = int(rng.integers(1, 3))
        mix = sample_mixture(rng, n)
        uL, (_, TL, _, YL) = sample_states(rng, mix, d, per)
        uR, (_, TR, _, YR) = sample_states(rng, mix, d, per)
        spL = thermo.star_properties(mix, TL, YL)
        spR = thermo.star_properties(mix, TR, YR)
        fp = (0.5 * (np.asarray(spL.gamma_star) + np.asarray(spR.gamma_star)),
              0.5 * (np.asarray(spL.e0_star) + np.asarray(spR.e0_star)))
        nrm = np.zeros(d)
        nrm[0] = 1.0
        spec = fx.DissipationSpec(mode="hybrid", jump_form="entropy")
        diss = fx.hybrid_dissipation(mix, uL, uR, nrm, fp, spec)
        if mutate == "dissipation-sign":
            diss = -diss
        dv = st.entropy_vars(mix, uR, d) - st.entropy_vars(mix, uL, d)
        q = 2.0 * np.sum(dv * diss, axis=-1)     # dv^T M dv
        scale = np.sum(np.abs(dv), axis=-1) ** 2 + 1.0
        worst = max(worst, float(np.max(-q / scale)))
    out = _fail("dissipation-spd", max(worst, 0.0), 1e-10)
    out["passed"] = bool(worst <= 1e-10)
    return out


def check_kep_structure(rng, count):
    """Momentum flux decomposes as p_face n + vbar (mass flux)."""
    worst = 0.0
    per = max(count // 4, 1)
    for n in (1, 3):
        for d in (1, 2):
            mix = sample_mixture(rng, n)
            nrm = np.zeros(d)
            nrm[-1] = 1.0
            uL, (rhoL, TL, vL, YL) = sample_states(rng, mix, d, per)
            uR, (rhoR, TR, vR, YR) = sample_states(rng, mix, d, per)
            pL = thermo.pressure_eos(mix, rhoL, TL, YL)
            pR = thermo.pressure_eos(mix, rhoR, TR, YR)
            vbar = 0.5 * (vL + vR)

            F = fx.ec_flux(mix, uL, uR, nrm)
            rho_iL = rhoL[:, None] * YL
            rho_iR = rhoR[:, None] * YR
            theta_bar = 0.5 * (1.0 / TL + 1.0 / TR)
            p_ec = (0.5 * (rho_iL + rho_iR) @ mix.r_i) / theta_bar
            mom = F[:, n: n + d]
            recon = vbar * F[:, n - 1][:, None] + p_ec[:, None] * nrm
            worst = max(worst, float(np.max(np.abs(mom - recon)
                                            / (np.abs(mom) + 1.0))))

            sp = thermo.star_properties(mix, 0.5 * (TL + TR), 0.5 * (YL + YR))
            fp = (np.asarray(sp.gamma_star), np.asarray(sp.e0_star))
            F2 = fx.esdf_central_flux(mix, uL, uR, nrm, fp, pL=pL, pR=pR)
            p_bar = fx.face_pressure(mix, rho_iL, rho_iR, rhoL, rhoR, pL, pR)
            recon2 = vbar * F2[:, n - 1][:, None] + p_bar[:, None] * nrm
            worst = max(worst, float(np.max(np.abs(F2[:, n: n + d] - recon2)
                                            / (np.abs(F2[:, n: n + d]) + 1.0))))
    return _fail("kep-structure", worst, 1e-12)


def check_consistency(rng, count):
    """F(u, u, n) = F_phys(u).n and F(uL,uR,n) = -F(uR,uL,-n)."""
    worst = 0.0
    per = max(count // 8, 1)
    for n in (1, 2):
        for d in (1, 2):
            mix = sample_mixture(rng, n)
            nrm = np.zeros(d)
            nrm[0] = 1.0
            u, (rho, T, v, Y) = sample_states(rng, mix, d, per)
            sp = thermo.star_properties(mix, T, Y)
            fp = (np.asarray(sp.gamma_star), np.asarray(sp.e0_star))
            Fp = fx.physical_flux(mix, u, nrm)
            scale = np.abs(Fp) + 1.0
            for F in (fx.ec_flux(mix, u, u, nrm),
                      fx.esdf_central_flux(mix, u, u, nrm, fp),
                      fx.lax_friedrichs_flux(mix, u, u, nrm)):
                worst = max(worst, float(np.max(np.abs(F - Fp) / scale)))

            uL, _ = sample_states(rng, mix, d, per)
            uR, _ = sample_states(rng, mix, d, per)
            for f in (lambda a, b, nn: fx.ec_flux(mix, a, b, nn),
                      lambda a, b, nn: fx.lax_friedrichs_flux(mix, a, b, nn)):
                F1 = f(uL, uR, nrm)
                F2 = f(uR, uL, -nrm)
                worst = max(worst, float(np.max(np.abs(F1 + F2)
                                                / (np.abs(F1) + 1.0))))
    return _fail("flux-consistency", worst, 1e-12)


ALL_CHECKS = ("ec-shuffle", "esdf-entropy-production", "lemmas",
              "entropy-variable-roundtrip", "a0-reconstruction",
              "dissipation-spd", "kep-structure", "flux-consistency")


def run_suite(seed=0, count=10000, mutate=None):
    """Run every property check; returns (passed, list of result dicts)."""
    rng = np.random.default_rng(seed)
    results = [check_ec_shuffle(rng, count)]
    results.append(check_es_production(rng, count, mutate=mutate))
    results.extend(check_lemmas(rng, count))
    results.append(check_roundtrips(rng, count))
    results.append(check_a0_oracle(rng, count))
    results.append(check_spd(rng, count, mutate=mutate))
    results.append(check_kep_structure(rng, count))
    results.append(check_consistency(rng, count))
    passed = all(r["passed"] for r in results)
    return passed, results
