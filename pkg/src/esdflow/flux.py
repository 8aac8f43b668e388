"""Interface numerical fluxes for the multi-component Euler system.

Provided fluxes (all per unit face area, conserved layout of
:mod:`esdflow.state`):

* ``physical_flux``        -- F(u).n
* ``ec_flux``              -- entropy-conservative, kinetic-energy-preserving
                              two-point flux (per-species log means)
* ``esdf_central_flux``    -- entropy-stable central flux of the double-flux
                              model (two log means total)
* ``hybrid_dissipation``   -- matrix dissipation R |Lam| T R^T (v_R - v_L)
                              with pressure-blended eigenvalues
* ``esdf_flux``            -- central flux minus hybrid dissipation
* ``lax_friedrichs_flux``  -- baseline
* ``entropy_residual``     -- [[v]].F - [[psi.n]] diagnostic

Averaging conventions (pinned by the entropy identities and checked in the
test suite):

* face composition of the central flux = upwind mass fractions; this keeps
  the species entropy production a KL divergence, hence <= 0 for equal-r
  mixtures, with exactly two logarithmic mean evaluations per face;
* the kinetic contribution to the energy flux is v_L.v_R / 2 (the product
  mean), which the shuffle condition requires;
* face pressure of the central flux is (p theta)bar / theta bar by default,
  with rho bar / beta bar available as an option.

The conserved-jump variant ``hybrid_dissipation_conserved`` applies the same
blended spectrum directly to the jump of the (caloric-relation-consistent)
conserved state; it is transparent to material contacts and is what the
solver uses in double-flux mode.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import state as st
from . import thermo
from .thermo import GasMixture, RHO_FLOOR


class FluxDomainError(ValueError):
    """Invalid input to a flux kernel (e.g. non-positive log-mean argument)."""


@dataclass(frozen=True)
class FaceNormal:
    """Unit normal and area of a face."""

    n: np.ndarray
    area: float = 1.0

    def __post_init__(self):
        n = np.atleast_1d(np.asarray(self.n, dtype=float))
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("face normal must be a unit vector")
        if self.area <= 0.0:
            raise ValueError("face area must be positive")
        object.__setattr__(self, "n", n)


@dataclass(frozen=True)
class FrozenPair:
    """Per-cell frozen equivalent-perfect-gas pair (gamma*, e0*)."""

    gamma_star: float
    e0_star: float = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.gamma_star) <= 1.0):
            raise ValueError("gamma* must exceed 1")


@dataclass(frozen=True)
class DissipationSpec:
    """Dissipation configuration.

    mode: "none", "hybrid" or "full-lf".  jump_form selects whether the
    hybrid operator acts on the entropy-variable jump (the symmetrizable
    form) or directly on the conserved jump (contact-transparent; solver
    default in double-flux mode).
    """

    mode: str = "hybrid"
    jump_form: str = "entropy"

    def __post_init__(self):
        if self.mode not in ("none", "hybrid", "full-lf"):
            raise ValueError(f"unknown dissipation mode {self.mode!r}")
        if self.jump_form not in ("entropy", "conserved"):
            raise ValueError(f"unknown jump form {self.jump_form!r}")


# ---------------------------------------------------------------------------
# logarithmic mean with a test hook counting evaluations
# ---------------------------------------------------------------------------

_counter = threading.local()


class count_log_means:
    """Context manager counting log_mean calls (test hook, thread-local)."""

    def __enter__(self):
        _counter.active = True
        _counter.count = 0
        return self

    def __exit__(self, *exc):
        _counter.active = False
        return False

    @property
    def count(self):
        return getattr(_counter, "count", 0)


def log_mean(a, b):
    """Logarithmic mean (a-b)/(ln a - ln b), series expansion near a = b.

    The series branch (relative difference below 1 percent) avoids the
    cancellation of the direct formula; the exact branch is evaluated only
    on the remaining entries.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0.0) or np.any(b <= 0.0):
        raise FluxDomainError("log mean requires positive arguments")
    if getattr(_counter, "active", False):
        _counter.count += 1
    zeta = a / b
    f = zeta - 1.0
    f /= zeta + 1.0
    u = f * f
    # Horner form of 1 + u/3 + u^2/5 + u^3/7
    F = u * (1.0 / 7.0)
    F += 1.0 / 5.0
    F *= u
    F += 1.0 / 3.0
    F *= u
    F += 1.0
    if u.ndim == 0:
        if u >= 1e-4:
            F = np.log(zeta) / (2.0 * f)
    else:
        rough = u >= 1e-4
        if rough.any():
            F[rough] = np.log(zeta[rough]) / (2.0 * f[rough])
    return (a + b) / (2.0 * F)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _normal(fn):
    if isinstance(fn, FaceNormal):
        return fn.n
    return np.atleast_1d(np.asarray(fn, dtype=float))


def _pair(fp):
    if isinstance(fp, FrozenPair):
        return np.asarray(fp.gamma_star, dtype=float), np.asarray(fp.e0_star, dtype=float)
    g, e0 = fp
    return np.asarray(g, dtype=float), np.asarray(e0, dtype=float)


def _prim(mix, u, d, p=None, T=None):
    """(rho_i_clipped, rho, vel, p, T, theta) of a state."""
    n = mix.n_species
    _, rho, mom, rhoE = st.split(u, n, d)
    rho_i = st.species_densities(u, n, d, clip=True)
    vel = mom / rho[..., None]
    if p is None or T is None:
        rho_e = rhoE - 0.5 * rho * np.sum(vel * vel, axis=-1)
        T = thermo.temperature_from_energy(mix, rho_e, rho_i)
        Y = rho_i / rho[..., None]
        p = thermo.pressure_eos(mix, rho, T, Y)
    return rho_i, rho, vel, np.asarray(p, dtype=float), np.asarray(T, dtype=float)


def _assemble(f_sp, f_mass, f_mom, f_E):
    return np.concatenate(
        [f_sp, f_mass[..., None], f_mom, f_E[..., None]], axis=-1)


def sound_speed(mix, u, d, fp=None):
    """c = sqrt(gamma* p / rho); gamma* frozen if fp given, else at T(u)."""
    n = mix.n_species
    rho_i, rho, vel, p, T = _prim(mix, u, d)
    if fp is not None:
        gs, _ = _pair(fp)
    else:
        gs = thermo.star_properties(mix, T, rho_i / rho[..., None]).gamma_star
    return np.sqrt(gs * p / rho)


# ---------------------------------------------------------------------------
# fluxes
# ---------------------------------------------------------------------------

def physical_flux(mix: GasMixture, u, fn, p=None, T=None):
    """Exact flux F(u).n."""
    n = mix.n_species
    nrm = _normal(fn)
    d = nrm.shape[-1]
    rho_i, rho, vel, p, T = _prim(mix, u, d, p=p, T=T)
    _, _, mom, rhoE = st.split(u, n, d)
    vn = np.sum(vel * nrm, axis=-1)
    return _assemble(
        rho_i[..., : n - 1] * vn[..., None],
        rho * vn,
        mom * vn[..., None] + p[..., None] * nrm,
        (rhoE + p) * vn,
    )


def ec_flux(mix: GasMixture, uL, uR, fn, pL=None, pR=None, TL=None, TR=None):
    """Entropy-conservative KEP flux with per-species logarithmic means."""
    n = mix.n_species
    nrm = _normal(fn)
    d = nrm.shape[-1]
    rho_iL, rhoL, vL, pL, TL = _prim(mix, uL, d, pL, TL)
    rho_iR, rhoR, vR, pR, TR = _prim(mix, uR, d, pR, TR)

    rho_i_ln = log_mean(np.maximum(rho_iL, RHO_FLOOR), np.maximum(rho_iR, RHO_FLOOR))
    thetaL, thetaR = 1.0 / TL, 1.0 / TR
    theta_ln = log_mean(thetaL, thetaR)
    theta_bar = 0.5 * (thetaL + thetaR)
    vbar = 0.5 * (vL + vR)
    vn = np.sum(vbar * nrm, axis=-1)
    kin_cross = 0.5 * np.sum(vL * vR, axis=-1)

    f_sp_all = rho_i_ln * vn[..., None]                        # (..., n)
    f_mass = f_sp_all.sum(axis=-1)
    p_ec = ((0.5 * (rho_iL + rho_iR)) @ mix.r_i) / theta_bar
    f_mom = vbar * f_mass[..., None] + p_ec[..., None] * nrm
    cv_star = mix.cv_star_species(1.0 / theta_bar)
    coeff = mix.e0_i + cv_star / theta_ln[..., None] + kin_cross[..., None]
    f_E = np.sum(coeff * f_sp_all, axis=-1) + p_ec * vn
    return _assemble(f_sp_all[..., : n - 1], f_mass, f_mom, f_E)


def esdf_central_flux(mix: GasMixture, uL, uR, fn, fp, pL=None, pR=None,
                      p_mean="ptheta"):
    """Entropy-stable central flux of the double-flux model.

    The frozen pair fp belongs to the cell whose flux evaluation is in
    progress; pressures default to the frozen caloric relation but callers
    may pass per-state pressures.  Exactly two logarithmic means are
    evaluated per call (total density and beta = rho/p).
    """
    n = mix.n_species
    nrm = _normal(fn)
    d = nrm.shape[-1]
    gs, e0s = _pair(fp)
    rho_iL, rhoL, vL, pL, _ = _caloric_prim(mix, uL, d, gs, e0s, pL)
    rho_iR, rhoR, vR, pR, _ = _caloric_prim(mix, uR, d, gs, e0s, pR)

    rho_ln = log_mean(rhoL, rhoR)
    beta_ln = log_mean(rhoL / pL, rhoR / pR)
    vbar = 0.5 * (vL + vR)
    vn = np.sum(vbar * nrm, axis=-1)
    kin_cross = 0.5 * np.sum(vL * vR, axis=-1)

    Y_face = upwind_composition(rho_iL / rhoL[..., None],
                                rho_iR / rhoR[..., None], vn)
    f_sp_all = Y_face * (rho_ln * vn)[..., None]
    f_mass = rho_ln * vn
    p_bar = face_pressure(mix, rho_iL, rho_iR, rhoL, rhoR, pL, pR, p_mean)
    f_mom = vbar * f_mass[..., None] + p_bar[..., None] * nrm
    f_E = (e0s + 1.0 / ((gs - 1.0) * beta_ln) + kin_cross) * f_mass + p_bar * vn
    return _assemble(f_sp_all[..., : n - 1], f_mass, f_mom, f_E)


def upwind_composition(YL, YR, vn):
    """Upwind face mass fractions, clipped at zero and renormalized.

    No flooring: a vanished species carries exactly zero flux, which keeps
    species totals exact through open boundaries (the entropy diagnostics
    floor their own logarithms).
    """
    Y = np.where((vn >= 0.0)[..., None], YL, YR)
    Y = np.maximum(Y, 0.0)
    return Y / Y.sum(axis=-1, keepdims=True)


def face_pressure(mix, rho_iL, rho_iR, rhoL, rhoR, pL, pR, p_mean="ptheta"):
    """Central-flux face pressure: (p theta)bar/theta bar or rho bar/beta bar."""
    if p_mean == "ptheta":
        thetaL = (rho_iL @ mix.r_i) / pL
        thetaR = (rho_iR @ mix.r_i) / pR
        return (pL * thetaL + pR * thetaR) / (thetaL + thetaR)
    if p_mean == "rhobeta":
        return (rhoL + rhoR) / (rhoL / pL + rhoR / pR)
    raise ValueError(f"unknown face pressure average {p_mean!r}")


def _caloric_prim(mix, u, d, gs, e0s, p=None):
    """Primitives with pressure from the frozen caloric relation."""
    n = mix.n_species
    _, rho, mom, rhoE = st.split(u, n, d)
    rho_i = st.species_densities(u, n, d, clip=True)
    vel = mom / rho[..., None]
    if p is None:
        rho_e = rhoE - 0.5 * rho * np.sum(vel * vel, axis=-1)
        p = thermo.caloric_pressure(rho, rho_e, gs, e0s)
    p = np.asarray(p, dtype=float)
    T = p / ((rho_i @ mix.r_i))
    return rho_i, rho, vel, p, T


def lax_friedrichs_flux(mix: GasMixture, uL, uR, fn, pL=None, pR=None,
                        cL=None, cR=None):
    """Global-wavespeed Lax-Friedrichs flux."""
    nrm = _normal(fn)
    d = nrm.shape[-1]
    rho_iL, rhoL, vL, pL, TL = _prim(mix, uL, d, pL)
    rho_iR, rhoR, vR, pR, TR = _prim(mix, uR, d, pR)
    if cL is None:
        cL = np.sqrt(thermo.star_properties(mix, TL, rho_iL / rhoL[..., None]).gamma_star * pL / rhoL)
    if cR is None:
        cR = np.sqrt(thermo.star_properties(mix, TR, rho_iR / rhoR[..., None]).gamma_star * pR / rhoR)
    lam = np.maximum(np.abs(np.sum(vL * nrm, axis=-1)) + cL,
                     np.abs(np.sum(vR * nrm, axis=-1)) + cR)
    FL = physical_flux(mix, uL, fn, p=pL, T=TL)
    FR = physical_flux(mix, uR, fn, p=pR, T=TR)
    return 0.5 * (FL + FR) - 0.5 * lam[..., None] * (np.asarray(uR) - np.asarray(uL))


# ---------------------------------------------------------------------------
# eigensystem and matrix dissipation
# ---------------------------------------------------------------------------

def pressure_blend_theta(pL, pR):
    """Hybrid blend factor theta = clamp(sqrt(|[[p]] / (2 pbar)|), 0, 1)."""
    pbar = 0.5 * (np.asarray(pL) + np.asarray(pR))
    return np.clip(np.sqrt(np.abs((np.asarray(pR) - np.asarray(pL)) / (2.0 * pbar))), 0.0, 1.0)


def _face_averages(mix, uL, uR, fn, fp, pL=None, pR=None):
    """Face averages shared by the eigensystem construction (batched)."""
    n = mix.n_species
    nrm = _normal(fn)
    d = nrm.shape[-1]
    gs, e0s = _pair(fp)
    rho_iL, rhoL, vL, pL, _ = _caloric_prim(mix, uL, d, gs, e0s, pL)
    rho_iR, rhoR, vR, pR, _ = _caloric_prim(mix, uR, d, gs, e0s, pR)

    rho_hat = log_mean(rhoL, rhoR)
    thetaL = (rho_iL @ mix.r_i) / pL
    thetaR = (rho_iR @ mix.r_i) / pR
    T_hat = 1.0 / log_mean(thetaL, thetaR)
    YL = np.maximum(rho_iL, RHO_FLOOR) / rhoL[..., None]
    YR = np.maximum(rho_iR, RHO_FLOOR) / rhoR[..., None]
    Y_hat = 0.5 * (YL + YR)
    Y_hat = Y_hat / Y_hat.sum(axis=-1, keepdims=True)
    vbar = 0.5 * (vL + vR)
    vn = np.sum(vbar * nrm, axis=-1)
    kin2 = 0.25 * (np.sum(vL * vL, axis=-1) + np.sum(vR * vR, axis=-1))
    r_hat = Y_hat @ mix.r_i
    c_hat = np.sqrt(gs * r_hat * T_hat)
    e0_hat = Y_hat @ mix.e0_i
    return dict(n=nrm, d=d, gs=gs, rho_hat=rho_hat, T_hat=T_hat, Y_hat=Y_hat,
                vbar=vbar, vn=vn, kin2=kin2, r_hat=r_hat, c_hat=c_hat,
                e0_hat=e0_hat, pL=pL, pR=pR)


def eigensystem(mix: GasMixture, uL, uR, fn, fp, pL=None, pR=None):
    """Averaged right eigenvectors, KEP eigenvalues and Barth scaling.

    Returns (Rbar, lam, Tdiag) with Rbar (..., m, m), lam and Tdiag
    (..., m) such that Rbar diag(Tdiag) Rbar^T reproduces the entropy
    Jacobian du/dv at coincident states (exact for uniform-gamma mixtures;
    positive semidefinite always).  Column order: n-1 species modes,
    acoustic-, entropy, [shear], acoustic+.  Both acoustic eigenvalues are
    vn + c (the KEP choice that keeps the dissipation kinetic-energy
    consistent).
    """
    f = _face_averages(mix, uL, uR, fn, fp, pL, pR)
    n = mix.n_species
    d = f["d"]
    m = st.nvars(n, d)
    nrm = np.broadcast_to(f["n"], np.shape(f["vbar"]))
    vbar, vn = f["vbar"], f["vn"]
    batch = np.shape(vn)
    rho_hat, T_hat, Y_hat = f["rho_hat"], f["T_hat"], f["Y_hat"]
    gs, r_hat, c_hat, kin2, e0_hat = (f["gs"], f["r_hat"], f["c_hat"],
                                      f["kin2"], f["e0_hat"])
    if np.any(~np.isfinite(c_hat)) or np.any(c_hat <= 0.0):
        raise FluxDomainError("non-finite face sound speed")

    sigma = rho_hat[..., None] * Y_hat / mix.r_i

    def Kmode(i):
        """Constant-pressure species mode i."""
        col = np.zeros(batch + (m,))
        if i < n - 1:
            col[..., i] = 1.0
        col[..., n - 1] = 1.0
        col[..., n : n + d] = vbar
        col[..., n + d] = mix.e0_i[i] + kin2
        return col

    cols, lam, tdiag = [], [], []
    one = np.ones(batch)

    # species columns: orthogonal completion of the entropy direction
    # inside the contact eigenspace, sqrt(sigma)-scaled (unit Barth weight)
    if n > 1:
        w = np.sqrt(Y_hat * mix.r_i / rho_hat[..., None])
        w_hat = w / np.linalg.norm(w, axis=-1, keepdims=True)
        q = w_hat.copy()
        q[..., -1] -= 1.0
        qq = np.maximum(np.sum(q * q, axis=-1), 1e-28)
        Kmat = np.stack([Kmode(i) for i in range(n)], axis=-1)  # (..., m, n)
        for k in range(n - 1):
            e = np.zeros(batch + (n,))
            e[..., k] = 1.0
            e = e - (2.0 * q[..., k] / qq)[..., None] * q
            coeff = np.sqrt(sigma) * e
            cols.append(np.einsum("...mi,...i->...m", Kmat, coeff))
            lam.append(vn)
            tdiag.append(one)

    h_hat = e0_hat + gs * r_hat * T_hat / (gs - 1.0) + kin2

    def acoustic(sgn):
        col = np.zeros(batch + (m,))
        col[..., : n - 1] = Y_hat[..., : n - 1]
        col[..., n - 1] = 1.0
        col[..., n : n + d] = vbar + sgn * c_hat[..., None] * nrm
        col[..., n + d] = h_hat + sgn * c_hat * vn
        return col

    t_a = rho_hat / (2.0 * gs * r_hat)

    cols.append(acoustic(-1.0))
    lam.append(vn + c_hat)
    tdiag.append(t_a * one)

    ent = np.zeros(batch + (m,))
    ent[..., : n - 1] = Y_hat[..., : n - 1]
    ent[..., n - 1] = 1.0
    ent[..., n : n + d] = vbar
    ent[..., n + d] = e0_hat + kin2
    cols.append(ent)
    lam.append(vn)
    tdiag.append(rho_hat * (gs - 1.0) / (gs * r_hat) * one)

    if d == 2:
        tvec = np.stack([-nrm[..., 1], nrm[..., 0]], axis=-1)
        shear = np.zeros(batch + (m,))
        shear[..., n : n + d] = tvec
        shear[..., n + d] = np.sum(vbar * tvec, axis=-1)
        cols.append(shear)
        lam.append(vn)
        tdiag.append(rho_hat * T_hat * one)

    cols.append(acoustic(1.0))
    lam.append(vn + c_hat)
    tdiag.append(t_a * one)

    R = np.stack(cols, axis=-1)
    lam = np.stack([np.broadcast_to(x, batch) for x in lam], axis=-1)
    return R, lam, np.stack(tdiag, axis=-1)


def _blended_spectrum(lam, vn, c_hat, theta):
    lam_max = abs(vn) + c_hat
    return (1.0 - theta) * np.abs(lam) + theta * lam_max


def hybrid_dissipation(mix: GasMixture, uL, uR, fn, fp, spec: DissipationSpec,
                       pL=None, pR=None):
    """Hybrid matrix dissipation 1/2 R |Lam| T R^T (v_R - v_L).

    The operator matrix is positive semidefinite for any blend factor; with
    spec.mode == "none" a zero vector is returned.  Batched over leading
    axes.
    """
    if spec.mode == "none":
        return np.zeros(np.shape(uL))
    f = _face_averages(mix, uL, uR, fn, fp, pL, pR)
    R, lam, tdiag = eigensystem(mix, uL, uR, fn, fp, pL, pR)
    theta = 1.0 if spec.mode == "full-lf" else pressure_blend_theta(f["pL"], f["pR"])
    alam = _blended_spectrum(lam, f["vn"][..., None], f["c_hat"][..., None], theta
                             if np.ndim(theta) == 0 else theta[..., None])
    dv = (st.entropy_vars(mix, np.asarray(uR, dtype=float), f["d"])
          - st.entropy_vars(mix, np.asarray(uL, dtype=float), f["d"]))
    return 0.5 * np.einsum("...mk,...k->...m", R,
                           alam * tdiag * np.einsum("...mk,...m->...k", R, dv))


def hybrid_dissipation_conserved(mix: GasMixture, uL, uR, fn, fp,
                                 spec: DissipationSpec, pL=None, pR=None):
    """Hybrid dissipation applied to the conserved jump (batched).

    States are reinterpreted through a shared frozen pair: the energy of
    each side is rebuilt from its pressure via the caloric relation, so a
    material contact (uniform p and v) produces a jump proportional to a
    contact eigenvector and passes through untouched.  Only the two
    acoustic projections are treated separately; all contact modes share
    the blended normal eigenvalue.
    """
    n = mix.n_species
    nrm = _normal(fn)
    nrm = np.broadcast_to(nrm, np.shape(np.asarray(uL))[:-1] + (nrm.shape[-1],))
    d = nrm.shape[-1]
    if spec.mode == "none":
        return np.zeros(np.shape(uL))
    gs, e0s = _pair(fp)
    rho_iL, rhoL, vL, pL, _ = _caloric_prim(mix, uL, d, gs, e0s, pL)
    rho_iR, rhoR, vR, pR, _ = _caloric_prim(mix, uR, d, gs, e0s, pR)

    beta_ln = log_mean(rhoL / pL, rhoR / pR)
    c_hat = np.sqrt(gs / beta_ln)
    vbar = 0.5 * (vL + vR)
    vn = np.sum(vbar * nrm, axis=-1)
    kin2 = 0.25 * (np.sum(vL * vL, axis=-1) + np.sum(vR * vR, axis=-1))

    theta = 1.0 if spec.mode == "full-lf" else pressure_blend_theta(pL, pR)
    lam_max = np.abs(vn) + c_hat
    lam_n = (1.0 - theta) * np.abs(vn) + theta * lam_max
    lam_ac = (1.0 - theta) * np.abs(vn + c_hat) + theta * lam_max

    # conserved jump with energies rebuilt from pressure (shared pair)
    d_rho_i = rho_iR - rho_iL
    d_rho = rhoR - rhoL
    d_mom = rhoR[..., None] * vR - rhoL[..., None] * vL
    d_E = ((pR - pL) / (gs - 1.0) + d_rho_i @ mix.e0_i
           + 0.5 * (rhoR * np.sum(vR * vR, axis=-1) - rhoL * np.sum(vL * vL, axis=-1)))
    du = _assemble(d_rho_i[..., : n - 1], d_rho, d_mom, d_E)

    # acoustic projections (exactly zero across contacts)
    dvn = np.sum((d_mom - vbar * d_rho[..., None]) * nrm, axis=-1)
    alpha_p = 0.5 * ((pR - pL) / c_hat**2 + dvn / c_hat)
    alpha_m = 0.5 * ((pR - pL) / c_hat**2 - dvn / c_hat)

    Y_hat = 0.5 * (np.maximum(rho_iL, RHO_FLOOR) / rhoL[..., None]
                   + np.maximum(rho_iR, RHO_FLOOR) / rhoR[..., None])
    Y_hat = Y_hat / Y_hat.sum(axis=-1, keepdims=True)
    e0_hat = Y_hat @ mix.e0_i
    h_hat = e0_hat + c_hat**2 / (gs - 1.0) + kin2

    def acoustic(sgn):
        return _assemble(Y_hat[..., : n - 1],
                         np.ones_like(d_rho),
                         vbar + sgn * c_hat[..., None] * nrm,
                         h_hat + sgn * c_hat * vn)

    diss = lam_n[..., None] * du + ((lam_ac - lam_n) * alpha_p)[..., None] * acoustic(1.0) \
        + ((lam_ac - lam_n) * alpha_m)[..., None] * acoustic(-1.0)
    return 0.5 * diss


def esdf_flux(mix: GasMixture, uL, uR, fn, fp, spec: DissipationSpec,
              pL=None, pR=None, p_mean="ptheta"):
    """Entropy-stable/double-flux interface flux: central minus dissipation."""
    central = esdf_central_flux(mix, uL, uR, fn, fp, pL, pR, p_mean)
    if spec.mode == "none":
        return central
    if spec.jump_form == "conserved":
        diss = hybrid_dissipation_conserved(mix, uL, uR, fn, fp, spec, pL, pR)
    else:
        diss = hybrid_dissipation(mix, uL, uR, fn, fp, spec, pL, pR)
    return central - diss


def entropy_residual(mix: GasMixture, uL, uR, flux, fn, fp=None):
    """[[v]].F - [[psi.n]]: zero for EC fluxes, negative for ES fluxes."""
    nrm = _normal(fn)
    d = nrm.shape[-1]
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    dv = st.entropy_vars(mix, uR, d, fp=fp) - st.entropy_vars(mix, uL, d, fp=fp)
    dpsi = np.sum((st.entropy_potential(mix, uR, d)
                   - st.entropy_potential(mix, uL, d)) * nrm, axis=-1)
    return np.sum(dv * np.asarray(flux), axis=-1) - dpsi
