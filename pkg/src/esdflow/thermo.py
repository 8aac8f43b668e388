"""Species data, mixture thermodynamics and the equivalent perfect-gas
("star") properties used by the double-flux machinery.

Conventions
-----------
* All specific quantities are mass-based (J/kg, J/(kg K)).
* cp polynomials are in temperature: cp_i(T) = sum_k a_k T^k, valid on the
  species' temperature range.  Degree 0 means a calorically perfect species.
* The reference temperature for all caloric integrals is T0 = 0 K, so
  e_i(T) = e0_i + int_0^T cv_i dT' and cp_i*(T) = (int_0^T cp_i dT') / T.
* Entropy and Gibbs functions use the star heats evaluated at the current
  temperature; this keeps the entropy-variable algebra consistent with the
  frozen perfect-gas model the interface fluxes are built on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

R_UNIVERSAL = 8.314462618  # J/(mol K)

# Floors applied inside logarithms / denominators only; conserved fields are
# never clipped, so conservation audits stay exact.
Y_FLOOR = 1e-11
RHO_FLOOR = 1e-12


class ThermoError(Exception):
    """Base class for thermodynamics errors."""


class InvalidCompositionError(ThermoError):
    """Mass fractions negative or not summing to one."""


class ThermoRangeError(ThermoError):
    """Temperature outside the mixture validity range."""


class ThermodynamicFailureError(ThermoError):
    """No admissible thermodynamic state (e.g. temperature solve failed)."""


@dataclass(frozen=True)
class SpeciesData:
    """Constant data for one species.

    cp_coeffs are polynomial coefficients of cp(T) in increasing powers,
    J/(kg K); e0 is the reference internal energy at T0 = 0 K, J/kg.
    """

    name: str
    molar_mass: float          # kg/mol
    e0: float = 0.0            # J/kg
    cp_coeffs: tuple = (1004.5,)
    T_range: tuple = (1.0, 5000.0)

    def __post_init__(self):
        if self.molar_mass <= 0.0:
            raise ValueError(f"species {self.name}: molar mass must be positive")
        r = R_UNIVERSAL / self.molar_mass
        T = np.linspace(self.T_range[0], self.T_range[1], 64)
        if np.any(self._cp(T) <= r):
            raise ValueError(
                f"species {self.name}: cp(T) <= r inside validity range "
                "(gamma must exceed 1)")

    @property
    def r(self) -> float:
        """Specific gas constant R/m, J/(kg K)."""
        return R_UNIVERSAL / self.molar_mass

    def _cp(self, T):
        c = np.asarray(self.cp_coeffs, dtype=float)
        out = np.zeros_like(np.asarray(T, dtype=float))
        for a in c[::-1]:
            out = out * T + a
        return out


@dataclass(frozen=True)
class StarProperties:
    """Equivalent perfect-gas properties at a given (T, Y)."""

    cp_star: np.ndarray | float
    gamma_star: np.ndarray | float
    e0_star: np.ndarray | float
    cv_star: np.ndarray | float


@dataclass(frozen=True)
class GasMixture:
    """An ordered, immutable collection of species with mixture rules.

    Precomputes per-species constant arrays; safe to share across threads.
    """

    species: tuple
    R: float = R_UNIVERSAL

    # filled in __post_init__
    masses: np.ndarray = field(init=False, repr=False)
    r_i: np.ndarray = field(init=False, repr=False)
    e0_i: np.ndarray = field(init=False, repr=False)
    cp_matrix: np.ndarray = field(init=False, repr=False)
    T_validity: tuple = field(init=False)

    def __post_init__(self):
        sp = tuple(self.species)
        if len(sp) < 1:
            raise ValueError("mixture needs at least one species")
        names = [s.name for s in sp]
        if len(set(names)) != len(names):
            raise ValueError("species names must be unique")
        object.__setattr__(self, "species", sp)
        object.__setattr__(self, "masses", np.array([s.molar_mass for s in sp]))
        object.__setattr__(self, "r_i", self.R / self.masses)
        object.__setattr__(self, "e0_i", np.array([s.e0 for s in sp]))
        deg = max(len(s.cp_coeffs) for s in sp)
        C = np.zeros((len(sp), deg))
        for i, s in enumerate(sp):
            C[i, : len(s.cp_coeffs)] = s.cp_coeffs
        object.__setattr__(self, "cp_matrix", C)
        object.__setattr__(
            self,
            "T_validity",
            (max(s.T_range[0] for s in sp), min(s.T_range[1] for s in sp)),
        )

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def names(self):
        return tuple(s.name for s in self.species)

    # -- per-species caloric functions (vectorized over trailing T axis) ----

    def cp_species(self, T):
        """cp_i(T); shape (..., n)."""
        T = np.asarray(T, dtype=float)[..., None]
        out = np.zeros(np.broadcast_shapes(T.shape, (self.n_species,)))
        for k in range(self.cp_matrix.shape[1] - 1, -1, -1):
            out = out * T + self.cp_matrix[:, k]
        return out

    def cp_integral_species(self, T):
        """int_0^T cp_i dT'; shape (..., n)."""
        T = np.asarray(T, dtype=float)[..., None]
        out = np.zeros(np.broadcast_shapes(T.shape, (self.n_species,)))
        K = self.cp_matrix.shape[1]
        for k in range(K - 1, -1, -1):
            out = out * T + self.cp_matrix[:, k] / (k + 1)
        return out * T

    def cp_star_species(self, T):
        """cp_i*(T) = (int_0^T cp_i dT')/T; shape (..., n)."""
        T = np.asarray(T, dtype=float)[..., None]
        out = np.zeros(np.broadcast_shapes(T.shape, (self.n_species,)))
        K = self.cp_matrix.shape[1]
        for k in range(K - 1, -1, -1):
            out = out * T + self.cp_matrix[:, k] / (k + 1)
        return out

    def cv_star_species(self, T):
        return self.cp_star_species(T) - self.r_i

    def energy_species(self, T):
        """e_i(T) = e0_i + int_0^T cv_i dT'; shape (..., n)."""
        T = np.asarray(T, dtype=float)
        return self.e0_i + self.cp_integral_species(T) - self.r_i * T[..., None]

    def cv_species(self, T):
        return self.cp_species(T) - self.r_i

    def check_T(self, T):
        T = np.asarray(T)
        lo, hi = self.T_validity
        if np.any(T < lo) or np.any(T > hi):
            raise ThermoRangeError(
                f"temperature outside validity range [{lo}, {hi}]")


def validate_composition(Y, tol_sum=1e-10, tol_neg=-1e-12):
    """Raise InvalidCompositionError unless Y is a valid mass-fraction set."""
    Y = np.asarray(Y, dtype=float)
    if np.any(Y < tol_neg):
        raise InvalidCompositionError(f"negative mass fraction: min {Y.min()}")
    s = Y.sum(axis=-1)
    if np.any(np.abs(s - 1.0) > tol_sum):
        raise InvalidCompositionError("mass fractions do not sum to 1")
    return Y


def mixture_gas_constant(mix: GasMixture, Y, validate: bool = True):
    """r(Y) = sum_i Y_i R/m_i, J/(kg K)."""
    Y = np.asarray(Y, dtype=float)
    if validate:
        validate_composition(Y)
    return Y @ mix.r_i


def mixture_heats(mix: GasMixture, Y, T):
    """(cp, cv) of the mixture at temperature T."""
    mix.check_T(T)
    Y = np.asarray(Y, dtype=float)
    cp = np.einsum("...i,...i->...", Y, mix.cp_species(T))
    r = mixture_gas_constant(mix, Y, validate=False)
    return cp, cp - r


def energy_from_temperature(mix: GasMixture, T, rhoY):
    """rho_e(T) = sum_i rho_i e_i(T), J/m^3."""
    rhoY = np.asarray(rhoY, dtype=float)
    return np.einsum("...i,...i->...", rhoY, mix.energy_species(T))


def temperature_from_energy(mix: GasMixture, rho_e, rhoY, T_guess=None,
                            rtol=1e-10, max_newton=50):
    """Invert sum_i rho_i e_i(T) = rho_e for T.

    Constant-cv mixtures use the closed form; otherwise Newton with the
    analytic derivative sum_i rho_i cv_i(T), falling back to bisection on the
    validity range.  T_guess seeds the Newton iteration (e.g. the previous
    cell temperature).
    """
    rho_e = np.asarray(rho_e, dtype=float)
    rhoY = np.asarray(rhoY, dtype=float)
    rho = rhoY.sum(axis=-1)
    if np.any(rho <= 0.0):
        raise ThermodynamicFailureError("non-positive density in temperature solve")

    if mix.cp_matrix.shape[1] == 1:  # calorically perfect: closed form
        cv_const = mix.cp_matrix[:, 0] - mix.r_i
        T = (rho_e - rhoY @ mix.e0_i) / (rhoY @ cv_const)
        if np.any(~np.isfinite(T)) or np.any(T <= 0.0):
            raise ThermodynamicFailureError("temperature solve gave T <= 0")
        return T

    lo, hi = mix.T_validity
    if T_guess is None:
        cv0 = np.einsum("...i,...i->...", rhoY, mix.cv_species(300.0 * np.ones_like(rho)))
        T = np.clip((rho_e - rhoY @ mix.e0_i) / cv0, lo, hi)
    else:
        T = np.clip(np.asarray(T_guess, dtype=float) * np.ones_like(rho), lo, hi)

    converged = np.zeros(np.shape(T), dtype=bool)
    for _ in range(max_newton):
        f = energy_from_temperature(mix, T, rhoY) - rho_e
        df = np.einsum("...i,...i->...", rhoY, mix.cv_species(T))
        step = f / df
        T_new = T - step
        converged = ((np.abs(f) <= rtol * np.maximum(np.abs(rho_e), 1e-300))
                     & (np.abs(step) <= 1e-12 * np.maximum(np.abs(T), 1.0)))
        bad = (~np.isfinite(T_new)) | (T_new < lo) | (T_new > hi)
        T = np.where(bad & ~converged, T, np.where(converged, T, T_new))
        if np.all(converged | bad):
            break
    if np.all(converged):
        return T

    # bisection fallback for unconverged entries
    a = np.full_like(np.atleast_1d(T), lo, dtype=float)
    b = np.full_like(a, hi)
    scalar = np.ndim(rho_e) == 0
    rho_e1 = np.atleast_1d(rho_e)
    rhoY1 = np.atleast_2d(rhoY)
    fa = energy_from_temperature(mix, a, rhoY1) - rho_e1
    fb = energy_from_temperature(mix, b, rhoY1) - rho_e1
    if np.any(fa * fb > 0.0):
        raise ThermodynamicFailureError("no temperature root in validity range")
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = energy_from_temperature(mix, m, rhoY1) - rho_e1
        left = fa * fm <= 0.0
        b = np.where(left, m, b)
        fb = np.where(left, fm, fb)
        a = np.where(left, a, m)
        fa = np.where(left, fa, fm)
        if np.max(b - a) < 1e-12 * hi:
            break
    T = 0.5 * (a + b)
    if np.any(T <= 0.0):
        raise ThermodynamicFailureError("temperature solve gave T <= 0")
    return T[0] if scalar else T


def pressure_eos(mix: GasMixture, rho, T, Y):
    """Ideal-gas pressure p = r(Y) rho T."""
    return mixture_gas_constant(mix, Y, validate=False) * np.asarray(rho) * np.asarray(T)


def species_entropy(mix: GasMixture, T, rho_i):
    """s_i = cv_i*(T) ln T - r_i ln(rho_i); shape (..., n).

    Partial densities are floored before the log, so vanishing species stay
    finite.
    """
    T = np.asarray(T, dtype=float)
    rho_i = np.maximum(np.asarray(rho_i, dtype=float), RHO_FLOOR)
    return (mix.cv_star_species(T) * np.log(T)[..., None]
            - mix.r_i * np.log(rho_i))


def mixture_entropy(mix: GasMixture, rho, T, Y):
    """Specific mixture entropy s = sum_i Y_i s_i, J/(kg K)."""
    rho = np.asarray(rho, dtype=float)
    Y = np.asarray(Y, dtype=float)
    rho_i = rho[..., None] * Y
    s_i = species_entropy(mix, T, rho_i)
    return np.einsum("...i,...i->...", Y, s_i)


def gibbs(mix: GasMixture, T, rho_i):
    """Species Gibbs functions g_i = e_i + r_i T - T s_i, J/kg; shape (..., n).

    Uses the star heats at T: e_i = e0_i + cv_i*(T) T.
    """
    T = np.asarray(T, dtype=float)
    e_i = mix.e0_i + mix.cv_star_species(T) * T[..., None]
    s_i = species_entropy(mix, T, rho_i)
    return e_i + (mix.r_i - s_i) * T[..., None]


def star_properties(mix: GasMixture, T, Y) -> StarProperties:
    """Equivalent perfect-gas (cp*, gamma*, e0*, cv*) at (T, Y)."""
    Y = np.asarray(Y, dtype=float)
    cp_star = np.einsum("...i,...i->...", Y, mix.cp_star_species(T))
    r = mixture_gas_constant(mix, Y, validate=False)
    cv_star = cp_star - r
    if np.any(cv_star <= 0.0):
        raise ThermodynamicFailureError("cp* <= r: no admissible gamma*")
    e0_star = Y @ mix.e0_i
    return StarProperties(cp_star=cp_star, gamma_star=cp_star / cv_star,
                          e0_star=e0_star, cv_star=cv_star)


def caloric_pressure(rho, rho_e, gamma_star, e0_star, p_floor=None,
                     floor_counter=None):
    """p = (gamma*-1)(rho_e - rho e0*) from the frozen caloric relation.

    rho_e is the internal energy per volume.  If p_floor is given, pressures
    at or below it are floored and counted in floor_counter (a one-element
    list used as a mutable counter).
    """
    p = (np.asarray(gamma_star) - 1.0) * (np.asarray(rho_e)
                                          - np.asarray(rho) * np.asarray(e0_star))
    if p_floor is not None:
        flagged = p <= p_floor
        if np.any(flagged):
            if floor_counter is not None:
                floor_counter[0] += int(np.count_nonzero(flagged))
            p = np.where(flagged, p_floor, p)
    return p


def caloric_energy(rho, p, gamma_star, e0_star):
    """Inverse of caloric_pressure: rho_e = rho e0* + p/(gamma*-1)."""
    return np.asarray(rho) * np.asarray(e0_star) + np.asarray(p) / (np.asarray(gamma_star) - 1.0)


# ---------------------------------------------------------------------------
# Built-in species database
# ---------------------------------------------------------------------------

def _perfect_gamma(name, molar_mass, gamma, e0=0.0, T_range=(1.0, 5000.0)):
    r = R_UNIVERSAL / molar_mass
    cp = gamma * r / (gamma - 1.0)
    return SpeciesData(name=name, molar_mass=molar_mass, e0=e0,
                       cp_coeffs=(cp,), T_range=T_range)


# Desk-scale caloric fits (cp in J/(kg K)).  Hydrogen gets a linear cp(T)
# capturing its rotational activation below room temperature: cp(300 K)
# matches the standard 14.31 kJ/(kg K) while the equivalent-perfect-gas
# ratio at 300 K comes out near 1.51 versus nitrogen's 1.40 -- the heat
# capacity contrast that drives interface pressure artifacts in fully
# conservative schemes.
BUILTIN_SPECIES = {
    "H2": SpeciesData("H2", 2.016e-3, 0.0, (10100.0, 14.0), T_range=(50.0, 3000.0)),
    "N2": SpeciesData("N2", 28.014e-3, 0.0, (1039.0,)),   # gamma ~ 1.400
    "O2": SpeciesData("O2", 31.999e-3, 0.0, (918.0,)),    # gamma ~ 1.395
    "He": SpeciesData("He", 4.0026e-3, 0.0, (5193.0,)),   # gamma = 5/3
    # nondimensional ideal gas: r = 1, gamma = 1.4, e0 = 0
    "ideal": _perfect_gamma("ideal", R_UNIVERSAL, 1.4, T_range=(1e-8, 1e8)),
}


def mixture_of(*names: str) -> GasMixture:
    """Mixture from built-in species names."""
    return GasMixture(species=tuple(BUILTIN_SPECIES[n] for n in names))


def load_species_db(path) -> dict:
    """Parse a species database file.

    One record per line:
        name  molar_mass  e0  T_min  T_max  cp0 [cp1 cp2 ...]
    '#' starts a comment.  Returns {name: SpeciesData}.
    """
    db = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 6:
                raise ValueError(f"{path}:{lineno}: expected at least 6 fields")
            name = parts[0]
            m, e0, tlo, thi = map(float, parts[1:5])
            coeffs = tuple(float(x) for x in parts[5:])
            db[name] = SpeciesData(name=name, molar_mass=m, e0=e0,
                                   cp_coeffs=coeffs, T_range=(tlo, thi))
    return db
