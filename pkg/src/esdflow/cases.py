"""Benchmark cases, analytic helpers and diagnostics.

Cases
-----
res1-periodic-discontinuity
    Single nondimensional gas (r = 1, gamma = 1.4), discontinuous density
    on [-1, 1] with p = rho^gamma, v = 0, periodic, 500 cells, t_end = 2.
    Run with the central entropy-stable flux this probes the discrete
    entropy evolution: the change of total entropy converges to zero at
    the order of the time integrator.

res2-moving-interface
    Hydrogen slab in nitrogen advected at 100 m/s, 1 atm / 300 K, periodic
    domain [-0.05, 0.5] m with 1000 cells, t_end = 1 ms.  Double-flux keeps
    pressure and velocity constant to round-off; the conservative control
    run shows the classic interface artifacts.

res3-shock-bubble
    Mach 1.22 shock in air hitting a helium disk; domain
    (0, 0.325) x (0, 0.0455) m, shock at x = 0.225 m moving left, bubble
    center (0.175, 0), radius 0.025 m.  Slip wall on top, symmetry at the
    centerline, Dirichlet post-shock state on the right, outflow left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import state as st
from . import thermo
from .mesh import AmrConfig, StructuredMesh
from .solver import BoundaryCondition, RunConfig

CASES = ("res1-periodic-discontinuity", "res2-moving-interface", "res3-shock-bubble")
_ALIASES = {"res1": CASES[0], "res2": CASES[1], "res3": CASES[2]}


class DegenerateFitError(ValueError):
    """Convergence fit impossible (duplicate steps or non-positive data)."""


@dataclass(frozen=True)
class CaseSpec:
    """Case id plus overrides of the stock configuration."""

    case: str
    cells: int | None = None
    scheme: str | None = None
    cfl: float | None = None
    dt: float | None = None
    t_end: float | None = None
    amr_levels: int | None = None
    double_flux: bool | None = None

    def resolved(self):
        return _ALIASES.get(self.case, self.case)


@dataclass
class CaseSetup:
    """Everything needed to construct a Solver plus reference metadata."""

    mix: thermo.GasMixture
    mesh: StructuredMesh
    U0: np.ndarray
    cfg: RunConfig
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# res1: periodic discontinuity, single nondimensional gas
# ---------------------------------------------------------------------------

RES1_GAMMA = 1.4


def init_res1(mesh: StructuredMesh):
    """rho = 3 inside |x| < 0.5 else 2, v = 0, p = rho^gamma."""
    mix = thermo.mixture_of("ideal")
    x = mesh.cell_centers()[:, 0]
    rho = np.where(np.abs(x) < 0.5, 3.0, 2.0)
    p = rho ** RES1_GAMMA
    T = p / rho                       # r = 1
    U = st.conserved_from_primitive(mix, rho, np.zeros((x.size, 1)), T,
                                    np.ones((x.size, 1)))
    return mix, U


def setup_res1(spec: CaseSpec) -> CaseSetup:
    cells = spec.cells or 500
    mesh = StructuredMesh(cells, bounds=((-1.0, 1.0),), periodic=(True,))
    mix, U0 = init_res1(mesh)
    cfg = RunConfig(
        scheme=spec.scheme or "esdf-central",
        t_end=spec.t_end if spec.t_end is not None else 2.0,
        cfl=None if spec.dt is not None else (spec.cfl or 0.75),
        dt=spec.dt,
        bcs={"x_lo": BoundaryCondition("periodic"),
             "x_hi": BoundaryCondition("periodic")},
        amr=AmrConfig(max_levels=spec.amr_levels or 0),
        case="res1-periodic-discontinuity",
    )
    return CaseSetup(mix=mix, mesh=mesh, U0=U0, cfg=cfg)


# ---------------------------------------------------------------------------
# res2: moving material interface
# ---------------------------------------------------------------------------

RES2_P = 101325.0
RES2_T = 300.0
RES2_V = 100.0


def init_res2(mesh: StructuredMesh):
    """Hydrogen for 0 < x < 0.05 m, nitrogen elsewhere; uniform p, T, v."""
    mix = thermo.mixture_of("H2", "N2")
    x = mesh.cell_centers()[:, 0]
    in_slab = (x > 0.0) & (x < 0.05)
    Y = np.stack([np.where(in_slab, 1.0, 0.0), np.where(in_slab, 0.0, 1.0)],
                 axis=-1)
    r = thermo.mixture_gas_constant(mix, Y)
    rho = RES2_P / (r * RES2_T)
    v = np.full((x.size, 1), RES2_V)
    U = st.conserved_from_primitive(mix, rho, v, np.full(x.size, RES2_T), Y)
    return mix, U


def setup_res2(spec: CaseSpec) -> CaseSetup:
    cells = spec.cells or 1000
    mesh = StructuredMesh(cells, bounds=((-0.05, 0.5),), periodic=(True,))
    mix, U0 = init_res2(mesh)
    cfg = RunConfig(
        scheme=spec.scheme or "esdf",
        t_end=spec.t_end if spec.t_end is not None else 1.0e-3,
        cfl=None if spec.dt is not None else (spec.cfl or 0.75),
        dt=spec.dt,
        bcs={"x_lo": BoundaryCondition("periodic"),
             "x_hi": BoundaryCondition("periodic")},
        amr=AmrConfig(max_levels=spec.amr_levels or 0),
        double_flux=True if spec.double_flux is None else spec.double_flux,
        p_ref=RES2_P,
        v_ref=RES2_V,
        case="res2-moving-interface",
    )
    return CaseSetup(mix=mix, mesh=mesh, U0=U0, cfg=cfg,
                     meta={"p_ref": RES2_P, "v_ref": RES2_V})


# ---------------------------------------------------------------------------
# res3: shock / helium-bubble interaction
# ---------------------------------------------------------------------------

RES3_DOMAIN = ((0.0, 0.325), (0.0, 0.0455))
RES3_SHOCK_X = 0.225
RES3_BUBBLE_X = 0.175
RES3_BUBBLE_R = 0.025          # Haas-Sturtevant geometry (assumption)
RES3_AIR_Y = {"N2": 0.215, "O2": 0.785}   # kept verbatim from the source table
RES3_RHO_PRE = 1.29
RES3_T_PRE = 300.0
RES3_RHO_HE = 0.2347
RES3_P_HE = 1.0e5
RES3_M1 = 1.22


def normal_shock_state(M1, pre, gamma=1.4):
    """Post-shock primitive state from the normal-shock relations.

    pre is a dict with rho, p, T, v (velocity along the shock normal; the
    shock propagates toward -x into the pre-shock gas).  Returns a dict
    with the post-shock rho, p, T, v and M2.
    """
    if M1 <= 1.0:
        raise ValueError("normal shock requires M1 > 1")
    g = gamma
    M1sq = M1 * M1
    p_ratio = (2.0 * g * M1sq - (g - 1.0)) / (g + 1.0)
    T_ratio = ((2.0 * g * M1sq - (g - 1.0)) * ((g - 1.0) * M1sq + 2.0)
               / ((g + 1.0) ** 2 * M1sq))
    M2 = math.sqrt(((g - 1.0) * M1sq + 2.0) / (2.0 * g * M1sq - (g - 1.0)))
    rho_ratio = p_ratio / T_ratio
    c1 = math.sqrt(g * pre["p"] / pre["rho"])
    T2 = pre["T"] * T_ratio
    c2 = c1 * math.sqrt(T_ratio)
    # lab-frame velocity behind a shock advancing toward -x
    v2 = pre["v"] + (M2 * c2 - M1 * c1)
    return {"rho": pre["rho"] * rho_ratio, "p": pre["p"] * p_ratio,
            "T": T2, "v": v2, "M2": M2,
            "p_ratio": p_ratio, "T_ratio": T_ratio}


def res3_states():
    """(mix, pre-shock air, post-shock air, helium) primitive dictionaries."""
    mix = thermo.mixture_of("He", "N2", "O2")
    Y_air = np.array([0.0, RES3_AIR_Y["N2"], RES3_AIR_Y["O2"]])
    r_air = thermo.mixture_gas_constant(mix, Y_air)
    p_pre = RES3_RHO_PRE * r_air * RES3_T_PRE
    pre = {"rho": RES3_RHO_PRE, "p": p_pre, "T": RES3_T_PRE, "v": 0.0, "Y": Y_air}
    post = normal_shock_state(RES3_M1, pre, gamma=1.4)
    post["Y"] = Y_air
    Y_he = np.array([1.0, 0.0, 0.0])
    T_he = RES3_P_HE / (RES3_RHO_HE * thermo.mixture_gas_constant(mix, Y_he))
    he = {"rho": RES3_RHO_HE, "p": RES3_P_HE, "T": T_he, "v": 0.0, "Y": Y_he}
    return mix, pre, post, he


def init_res3(mesh: StructuredMesh):
    """Three regions: post-shock air right of the shock, pre-shock air,
    helium disk; sharp (cell-center) region assignment."""
    mix, pre, post, he = res3_states()
    xy = mesh.cell_centers()
    x, y = xy[:, 0], xy[:, 1]
    in_post = x > RES3_SHOCK_X
    in_bubble = (x - RES3_BUBBLE_X) ** 2 + y ** 2 <= RES3_BUBBLE_R ** 2

    rho = np.where(in_post, post["rho"], np.where(in_bubble, he["rho"], pre["rho"]))
    T = np.where(in_post, post["T"], np.where(in_bubble, he["T"], pre["T"]))
    vx = np.where(in_post, post["v"], 0.0)
    Y = np.where(in_bubble[:, None], he["Y"], pre["Y"])
    v = np.stack([vx, np.zeros_like(vx)], axis=-1)
    U = st.conserved_from_primitive(mix, rho, v, T, Y)
    return mix, U


def setup_res3(spec: CaseSpec) -> CaseSetup:
    nx = spec.cells or 650
    ny = max(int(round(nx * 0.0455 / 0.325)), 2)
    mesh = StructuredMesh(nx, ny, bounds=RES3_DOMAIN, periodic=(False, False))
    mix, U0 = init_res3(mesh)
    _, pre, post, he = res3_states()
    levels = 1 if spec.amr_levels is None else spec.amr_levels
    cfg = RunConfig(
        scheme=spec.scheme or "esdf",
        t_end=spec.t_end if spec.t_end is not None else 850e-6,
        cfl=None if spec.dt is not None else (spec.cfl or 0.75),
        dt=spec.dt,
        bcs={"x_hi": BoundaryCondition("inflow", rho=post["rho"],
                                       v=(post["v"], 0.0), T=post["T"],
                                       Y=tuple(post["Y"])),
             "x_lo": BoundaryCondition("outflow"),
             "y_hi": BoundaryCondition("slip-wall"),
             "y_lo": BoundaryCondition("symmetry")},
        amr=AmrConfig(max_levels=levels),
        snapshot_times=(200e-6, 350e-6, 500e-6, 600e-6, 850e-6),
        case="res3-shock-bubble",
    )
    c1 = math.sqrt(1.4 * pre["p"] / pre["rho"])
    return CaseSetup(mix=mix, mesh=mesh, U0=U0, cfg=cfg,
                     meta={"shock_speed": RES3_M1 * c1, "pre": pre,
                           "post": post, "he": he})


def setup_case(spec: CaseSpec) -> CaseSetup:
    case = spec.resolved()
    if case == CASES[0]:
        return setup_res1(spec)
    if case == CASES[1]:
        return setup_res2(spec)
    if case == CASES[2]:
        return setup_res3(spec)
    raise ValueError(f"unknown case {spec.case!r}")


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

@dataclass
class InterfaceTrack:
    """Time series of characteristic bubble-interface positions (m)."""

    t: list = field(default_factory=list)
    downstream: list = field(default_factory=list)
    jet: list = field(default_factory=list)
    upstream: list = field(default_factory=list)

    def append(self, t, sample):
        if sample is None:
            return
        self.t.append(t)
        self.downstream.append(sample[0])
        self.jet.append(sample[1])
        self.upstream.append(sample[2])


def rasterize(mesh: StructuredMesh, values, level=None):
    """Paint per-active-cell values onto the finest covering uniform grid.

    Returns (x_edges, y_edges, grid) with grid shape (nx_fine, ny_fine).
    """
    ids = mesh.active_ids
    L = int(mesh.level[ids].max()) if level is None else level
    nx, ny = mesh.nx << L, mesh.ny << L
    grid = np.empty((nx, ny))
    for lev in range(L + 1):
        sel = mesh.level[ids] == lev
        if not np.any(sel):
            continue
        f = 1 << (L - lev)
        cx = mesh.ix[ids[sel]] * f
        cy = mesh.iy[ids[sel]] * f
        vals = np.asarray(values)[sel]
        for dx in range(f):
            for dy in range(f):
                grid[cx + dx, cy + dy] = vals
    x_edges = np.linspace(*mesh.bounds[0], nx + 1)
    y_edges = np.linspace(*mesh.bounds[1], ny + 1)
    return x_edges, y_edges, grid


def _cross_left(xc, row, thresh):
    """Leftmost crossing position (linear interpolation between samples)."""
    above = row >= thresh
    if not above.any():
        return None
    i = int(np.argmax(above))
    if i == 0:
        return xc[0]
    x0, x1 = xc[i - 1], xc[i]
    f0, f1 = row[i - 1], row[i]
    return x0 + (thresh - f0) / (f1 - f0) * (x1 - x0)


def _cross_right(xc, row, thresh):
    """Rightmost crossing position (linear interpolation between samples)."""
    above = row >= thresh
    if not above.any():
        return None
    i = len(row) - 1 - int(np.argmax(above[::-1]))
    if i == len(row) - 1:
        return xc[-1]
    x0, x1 = xc[i], xc[i + 1]
    f0, f1 = row[i], row[i + 1]
    return x0 + (thresh - f0) / (f1 - f0) * (x1 - x0)


def track_interface_points(mesh: StructuredMesh, Y_he, thresh=0.5):
    """(downstream, jet, upstream) x-positions of the Y_He = thresh contour.

    downstream: leftmost contour point anywhere; jet: rightmost along the
    y = 0 centerline; upstream: rightmost anywhere.  Returns None when no
    cell reaches the threshold.
    """
    xe, ye, grid = rasterize(mesh, Y_he)
    if not (grid >= thresh).any():
        return None
    xc = 0.5 * (xe[:-1] + xe[1:])
    down = np.inf
    up = -np.inf
    for j in range(grid.shape[1]):
        row = grid[:, j]
        if not (row >= thresh).any():
            continue
        down = min(down, _cross_left(xc, row, thresh))
        up = max(up, _cross_right(xc, row, thresh))
    jet = _cross_right(xc, grid[:, 0], thresh)
    if jet is None:
        jet = down
    return down, jet, up


def entropy_history(rows):
    """(t, delta_S) arrays from diagnostics rows (dicts with t, entropy)."""
    t = np.array([r["t"] for r in rows])
    S = np.array([r["entropy_total"] for r in rows])
    return t, S - S[0]


def convergence_fit(pairs):
    """Least-squares slope of log|dS| against log dt.

    pairs: sequence of (dt, |dS|); needs >= 3 points with distinct dt and
    positive values.
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise DegenerateFitError("need at least 3 (dt, |dS|) points")
    dts = np.array([p[0] for p in pairs], dtype=float)
    vals = np.array([p[1] for p in pairs], dtype=float)
    if len(np.unique(dts)) != len(dts):
        raise DegenerateFitError("time steps must be distinct")
    if np.any(vals <= 0.0) or np.any(dts <= 0.0):
        raise DegenerateFitError("entropy changes must be positive for the log fit")
    slope = np.polyfit(np.log(dts), np.log(vals), 1)[0]
    return float(slope)
