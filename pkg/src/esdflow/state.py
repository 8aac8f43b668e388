"""State representations and the entropy-symmetrization maps.

Conserved layout (length m = n + d + 1):

    u = (rho Y_1, ..., rho Y_{n-1}, rho, rho v_1..rho v_d, rho E)

Species n is stored by difference.  The generalized entropy is U = -rho s
with entropy flux calF = U v; the entropy variables are its gradient,

    v(u) = (1/T) * (g_1 - g_n, ..., g_{n-1} - g_n, g_n - |v|^2/2, v, -1).

The sign of g_n in the mass entry is fixed by v = dU/du (checked against
finite differences in the tests) and by the inverse map below, which
recovers g_n = T v_mass + |v|^2/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import thermo
from .thermo import GasMixture, RHO_FLOOR


class InvalidEntropyStateError(Exception):
    """Entropy-variable vector does not map to an admissible state."""


class OracleFailureError(Exception):
    """Finite-difference oracle could not produce a usable Jacobian."""


@dataclass(frozen=True)
class PrimitiveState:
    """Primitive fields; arrays broadcast over leading axes."""

    rho: np.ndarray
    v: np.ndarray      # (..., d)
    p: np.ndarray
    T: np.ndarray
    Y: np.ndarray      # (..., n)


def nvars(n: int, d: int) -> int:
    return n + d + 1


def split(u, n: int, d: int):
    """(rhoY_minor, rho, mom, rhoE) views of the conserved vector."""
    u = np.asarray(u)
    return (u[..., : n - 1], u[..., n - 1], u[..., n : n + d], u[..., n + d])


def species_densities(u, n: int, d: int, clip: bool = False):
    """Partial densities (..., n); species n recovered by difference.

    With clip=True the result is clipped to [0, rho] and renormalized --
    used when deriving primitive fields, never for conserved updates.
    """
    rhoY_m, rho, _, _ = split(u, n, d)
    rho_n = rho - rhoY_m.sum(axis=-1)
    rho_i = np.concatenate([rhoY_m, rho_n[..., None]], axis=-1)
    if clip:
        rho_i = np.clip(rho_i, 0.0, None)
        tot = rho_i.sum(axis=-1)
        rho_i = rho_i * (rho / np.where(tot > 0, tot, 1.0))[..., None]
    return rho_i


def conserved_from_primitive(mix: GasMixture, rho, v, T, Y):
    """Build the conserved vector from (rho, v, T, Y)."""
    rho = np.asarray(rho, dtype=float)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    Y = np.asarray(Y, dtype=float)
    rho_i = rho[..., None] * Y
    rho_e = thermo.energy_from_temperature(mix, T, rho_i)
    ke = 0.5 * rho * np.sum(v * v, axis=-1)
    return np.concatenate(
        [rho_i[..., :-1], rho[..., None], rho[..., None] * v,
         (rho_e + ke)[..., None]], axis=-1)


def primitive_from_conserved(mix: GasMixture, u, d: int, T_guess=None):
    """Recover (rho, v, p, T, Y); T via the caloric energy inversion."""
    n = mix.n_species
    _, rho, mom, rhoE = split(u, n, d)
    rho_i = species_densities(u, n, d, clip=True)
    Y = rho_i / rho[..., None]
    v = mom / rho[..., None]
    rho_e = rhoE - 0.5 * np.sum(mom * mom, axis=-1) / rho
    T = thermo.temperature_from_energy(mix, rho_e, rho_i, T_guess=T_guess)
    p = thermo.pressure_eos(mix, rho, T, Y)
    return PrimitiveState(rho=rho, v=v, p=p, T=T, Y=Y)


def entropy_vars(mix: GasMixture, u, d: int, fp=None):
    """Entropy variables v(u) = dU/du, U = -rho s; shape (..., n+d+1).

    If fp = (gamma_star, e0_star) is given, T is taken from the frozen
    caloric relation instead of the full energy inversion.
    """
    n = mix.n_species
    _, rho, mom, rhoE = split(u, n, d)
    rho_i = species_densities(u, n, d, clip=False)
    vel = mom / rho[..., None]
    ke = 0.5 * np.sum(vel * vel, axis=-1)
    rho_e = rhoE - rho * ke
    if fp is None:
        T = thermo.temperature_from_energy(mix, rho_e, np.clip(rho_i, 0.0, None))
    else:
        gamma_star, e0_star = fp
        Y = rho_i / rho[..., None]
        p = thermo.caloric_pressure(rho, rho_e, gamma_star, e0_star)
        T = p / (thermo.mixture_gas_constant(mix, Y, validate=False) * rho)
    theta = 1.0 / T
    g = thermo.gibbs(mix, T, np.maximum(rho_i, RHO_FLOOR))
    out = np.empty(np.shape(u), dtype=float)
    out[..., : n - 1] = theta[..., None] * (g[..., : n - 1] - g[..., n - 1 : n])
    out[..., n - 1] = theta * (g[..., n - 1] - ke)
    out[..., n : n + d] = theta[..., None] * vel
    out[..., n + d] = -theta
    return out


def conserved_from_entropy(mix: GasMixture, v, d: int):
    """Inverse map v -> u.

    Recovers T = -1/v_last, the velocities, the Gibbs functions, then each
    partial density from rho_i = exp((cv_i* ln T - s_i)/r_i).
    """
    n = mix.n_species
    v = np.asarray(v, dtype=float)
    v_last = v[..., n + d]
    if np.any(v_last >= 0.0):
        raise InvalidEntropyStateError("last entropy variable must be negative")
    T = -1.0 / v_last
    vel = T[..., None] * v[..., n : n + d]
    ke = 0.5 * np.sum(vel * vel, axis=-1)
    g_n = T * v[..., n - 1] + ke
    g = np.empty(v.shape[:-1] + (n,), dtype=float)
    g[..., : n - 1] = T[..., None] * v[..., : n - 1] + g_n[..., None]
    g[..., n - 1] = g_n
    theta = (1.0 / T)[..., None]
    # from theta*g_i = theta*e0_i + cp_i* - s_i
    s_i = mix.cp_star_species(T) + (mix.e0_i - g) * theta
    log_rho_i = (mix.cv_star_species(T) * np.log(T)[..., None] - s_i) / mix.r_i
    with np.errstate(over="raise"):
        try:
            rho_i = np.exp(log_rho_i)
        except FloatingPointError as err:
            raise InvalidEntropyStateError("overflow recovering densities") from err
    if np.any(~np.isfinite(rho_i)):
        raise InvalidEntropyStateError("non-finite density recovered")
    rho = rho_i.sum(axis=-1)
    rho_e = thermo.energy_from_temperature(mix, T, rho_i)
    return np.concatenate(
        [rho_i[..., : n - 1], rho[..., None], rho[..., None] * vel,
         (rho_e + rho * ke)[..., None]], axis=-1)


def entropy_function(mix: GasMixture, u, d: int):
    """Generalized entropy density U = -rho s."""
    n = mix.n_species
    prim = primitive_from_conserved(mix, u, d)
    s = thermo.mixture_entropy(mix, prim.rho, prim.T, prim.Y)
    return -prim.rho * s


def entropy_pair(mix: GasMixture, u, d: int):
    """(U, calF): entropy density and its flux calF = U v."""
    n = mix.n_species
    prim = primitive_from_conserved(mix, u, d)
    s = thermo.mixture_entropy(mix, prim.rho, prim.T, prim.Y)
    U = -prim.rho * s
    return U, U[..., None] * prim.v


def entropy_potential(mix: GasMixture, u, d: int):
    """psi = r(Y) rho v; satisfies psi = F^T v - calF."""
    n = mix.n_species
    _, rho, mom, _ = split(u, n, d)
    Y = species_densities(u, n, d, clip=True) / rho[..., None]
    r = thermo.mixture_gas_constant(mix, Y, validate=False)
    return r[..., None] * mom


def entropy_jacobian_fd(mix: GasMixture, u, d: int, scale: float = 1e-6):
    """A0 = du/dv by central differences around v(u); test oracle only."""
    v0 = entropy_vars(mix, np.asarray(u, dtype=float), d)
    if v0.ndim != 1:
        raise OracleFailureError("FD oracle takes a single state")
    m = v0.shape[0]
    A = np.empty((m, m))
    for k in range(m):
        h = scale * max(abs(v0[k]), 1.0)
        vp = v0.copy()
        vm = v0.copy()
        vp[k] += h
        vm[k] -= h
        try:
            up = conserved_from_entropy(mix, vp, d)
            um = conserved_from_entropy(mix, vm, d)
        except InvalidEntropyStateError as err:
            raise OracleFailureError(f"FD step broke down at component {k}") from err
        A[:, k] = (up - um) / (2.0 * h)
    if np.any(~np.isfinite(A)):
        raise OracleFailureError("non-finite entries in FD Jacobian")
    return A
