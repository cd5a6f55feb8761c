"""Static figures for sweeps, Wigner grids and fixed-point scans."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from .classical import ClassicalFixedPoint  # noqa: E402
from .errors import OutputUnwritable  # noqa: E402
from .wigner import WignerGrid  # noqa: E402

METRIC_LABELS = {
    "delta_hs": r"$\delta(\rho)$",
    "s_entropy": r"$s(\rho)$",
    "q_photon": r"$Q(\rho)$",
}
MARKERS = {
    "stable": dict(marker="o", color="white", edgecolor="black", s=50),
    "saddle": dict(marker="x", color="red", s=50),
    "unstable": dict(marker="s", color="none", edgecolor="red", s=40),
}


def _save(fig: plt.Figure, path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, dpi=120, bbox_inches="tight")
    except OSError as exc:
        raise OutputUnwritable(f"cannot write {path}: {exc}") from exc
    finally:
        plt.close(fig)


def _column(rows: Sequence[dict[str, Any]], key: str) -> np.ndarray:
    return np.array([r[key] for r in rows], dtype=float)


def plot_sweep(rows: Sequence[dict[str, Any]], path: Path) -> None:
    """Metric curves for one-dimensional sweeps, log-scaled heatmaps for 2D ones."""
    hs = sorted({r["h"] for r in rows})
    Fs = sorted({r["F"] for r in rows})
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.8))
    if len(hs) > 1 and len(Fs) > 1:
        hth = 2.0 * rows[0]["g"]
        for ax, key in zip(axes, METRIC_LABELS):
            grid = _column(rows, key).reshape(len(hs), len(Fs)).T
            positive = grid[np.isfinite(grid) & (grid > 0)]
            norm = LogNorm(vmin=positive.min(), vmax=positive.max()) if positive.size else None
            mesh = ax.pcolormesh(np.array(hs) / hth, Fs, np.where(grid > 0, grid, np.nan),
                                 norm=norm, shading="nearest", cmap="viridis")  # fmt: skip
            fig.colorbar(mesh, ax=ax)
            ax.set_xlabel(r"$h/h_{th}$")
            ax.set_ylabel("$F$")
            ax.set_title(METRIC_LABELS[key])
    else:
        by_h = len(hs) >= len(Fs)
        x = _column(rows, "h_over_hth" if by_h else "F")
        for ax, key in zip(axes, METRIC_LABELS):
            ax.plot(x, _column(rows, key), "o-", ms=3)
            ax.set_xlabel(r"$h/h_{th}$" if by_h else "$F$")
            ax.set_title(METRIC_LABELS[key])
            ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_wigner(
    grid: WignerGrid, fixed: Sequence[ClassicalFixedPoint], path: Path, title: str = ""
) -> None:
    """Wigner colormap with mean-field fixed points overlaid."""
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    vmax = np.abs(grid.values).max()
    img = ax.imshow(
        grid.values,
        origin="lower",
        extent=(grid.x_axis[0], grid.x_axis[-1], grid.p_axis[0], grid.p_axis[-1]),
        cmap="RdBu_r",
        vmin=-vmax,
        vmax=vmax,
    )
    fig.colorbar(img, ax=ax, label="$W(z)$")
    seen: set[str] = set()
    for fp in fixed:
        style = MARKERS[fp.stability]
        label = fp.stability if fp.stability not in seen else None
        seen.add(fp.stability)
        ax.scatter([fp.A.real], [fp.A.imag], label=label, zorder=3, **style)
    if fixed:
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel(r"Re $z$")
    ax.set_ylabel(r"Im $z$")
    ax.set_title(title)
    _save(fig, path)


def plot_classical(rows: Sequence[dict[str, Any]], path: Path) -> None:
    """Real fixed-point amplitude against ``F``, one marker style per stability class."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for kind, style in MARKERS.items():
        sel = [r for r in rows if r["stability"] == kind]
        if sel:
            ax.scatter(_column(sel, "F"), _column(sel, "A_re"), label=kind, **{**style, "s": 14})
    ax.set_xlabel("$F$")
    ax.set_ylabel(r"Re $A$")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, path)
