"""Figure builders.  All rendering is deterministic (Agg backend, fixed
sizes and dpi, no timestamps) so repeated runs hash identically."""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .readers import SchemaError, read_csv, read_vtk_cells, rasterize_cells  # noqa: E402

DPI = 140


def _save(fig, out_path):
    fig.savefig(out_path, dpi=DPI, bbox_inches="tight",
                metadata={"Software": "plotkit"})
    plt.close(fig)
    return out_path


def plot_entropy_convergence(table_path, out_path):
    """Log-log entropy-change-versus-step plot with the fitted slope."""
    meta, cols = read_csv(table_path, require=("dt", "abs_ds"))
    dt, ds = cols["dt"], cols["abs_ds"]
    if dt.size < 3:
        raise SchemaError(f"{table_path}: need at least 3 sweep points")
    slope = np.polyfit(np.log(dt), np.log(ds), 1)[0]
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(dt, ds, "o-", color="tab:blue")
    ref = ds[0] * (dt / dt[0]) ** 3
    ax.loglog(dt, ref, "--", color="0.6", label="slope 3")
    ax.set_xlabel(r"$\Delta t$")
    ax.set_ylabel(r"$|\Delta S(t_{end})|$")
    ax.set_title(f"entropy change, fitted slope {slope:.2f}")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, out_path), slope


def plot_profiles(snapshot_path, out_path, p_ref=None, v_ref=None):
    """Two-panel pressure/velocity profile with deviation insets.

    The insets show (q - q_ref)/q_ref, making sub-1e-6 deviations visible
    even when the main panels look perfectly flat.
    """
    meta, cols = read_csv(snapshot_path, require=("x", "p", "v"))
    x, p, v = cols["x"], cols["p"], cols["v"]
    p_ref = np.median(p) if p_ref is None else p_ref
    v_ref = np.median(v) if v_ref is None else v_ref

    fig, axes = plt.subplots(2, 1, figsize=(6.4, 6.0), sharex=True)
    axes[0].plot(x, p, color="tab:blue", lw=1.0)
    axes[0].set_ylabel("p [Pa]")
    axes[1].plot(x, v, color="tab:red", lw=1.0)
    axes[1].set_ylabel("v [m/s]")
    axes[1].set_xlabel("x [m]")
    for ax, q, ref, color in ((axes[0], p, p_ref, "tab:blue"),
                              (axes[1], v, v_ref, "tab:red")):
        pad = 0.05 * max(abs(ref), 1.0)
        ax.set_ylim(min(q.min(), ref - pad), max(q.max(), ref + pad))
        inset = ax.inset_axes([0.58, 0.12, 0.38, 0.35])
        dev = (q - ref) / (abs(ref) if ref else 1.0)
        inset.plot(x, dev, color=color, lw=0.7)
        inset.set_title("relative deviation", fontsize=7)
        inset.tick_params(labelsize=6)
        inset.yaxis.get_offset_text().set_fontsize(6)
    if "t" in meta:
        axes[0].set_title(f"t = {float(meta['t']):.6g} s")
    return _save(fig, out_path)


def render_schlieren(vtk_path, out_path):
    """Density-gradient-magnitude image on the finest covering grid,
    logarithmic grayscale."""
    centers, sizes, data = read_vtk_cells(vtk_path)
    if "rho" not in data:
        raise SchemaError(f"{vtk_path}: no density field")
    xe, ye, rho = rasterize_cells(centers, sizes, data["rho"])
    hx = xe[1] - xe[0]
    hy = ye[1] - ye[0]
    gx = np.gradient(rho, hx, axis=0)
    gy = np.gradient(rho, hy, axis=1)
    g = np.hypot(gx, gy)
    ref = g.max()
    shade = np.log10(1.0 + g / (0.01 * ref)) if ref > 0 else g
    fig, ax = plt.subplots(
        figsize=(7.2, 7.2 * (ye[-1] - ye[0]) / (xe[-1] - xe[0]) + 0.6))
    ax.imshow(shade.T, origin="lower", cmap="gray_r",
              extent=(xe[0], xe[-1], ye[0], ye[-1]), aspect="equal",
              interpolation="nearest")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    return _save(fig, out_path)


def plot_trajectories(diag_path, out_path):
    """Interface characteristic-point trajectories x(t)."""
    meta, cols = read_csv(diag_path, require=("t",))
    names = [n for n in ("downstream", "jet", "upstream") if n in cols]
    if not names:
        raise SchemaError(f"{diag_path}: no interface-track columns")
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    for name, color in zip(names, ("tab:blue", "tab:orange", "tab:green")):
        sel = np.isfinite(cols[name])
        ax.plot(cols["t"][sel] * 1e6, cols[name][sel] * 1e3, "-o", ms=2.5,
                color=color, label=name)
    ax.set_xlabel("t [us]")
    ax.set_ylabel("x [mm]")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, out_path)
