"""PNG figures for a diagnosed run."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import closed_form as cf  # noqa: E402

# drop the version stamp so identical data gives identical bytes
_PNG_META = {"Software": None}


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def _time_axis(series, cfg):
    omega = cfg.params.omega
    if omega != 0:
        return series.times * abs(omega) / (2 * math.pi), "t / period"
    return series.times, "t"


def nodal_angle_figure(series, cfg, path: Path) -> None:
    t, label = _time_axis(series, cfg)
    fig, ax = plt.subplots(figsize=(6, 4))
    if np.isfinite(series.angles).any():
        ax.plot(t, series.angles, "o-", label="fitted nodal angle")
        tt = np.linspace(0, series.times.max(), 200)
        ref = np.array([cf.nodal_line(s, cfg.params).angle for s in tt])
        shift = math.pi * round((series.angles[np.isfinite(series.angles)][0] - ref[0]) / math.pi)
        scale = t[-1] / series.times[-1] if series.times[-1] > 0 else 1.0
        ax.plot(tt * scale, ref + shift, "--", label="closed form")
        ax.legend()
    else:
        ax.text(0.5, 0.5, "no nodal line in this state", ha="center", transform=ax.transAxes)
    ax.set_xlabel(label)
    ax.set_ylabel("angle [rad]")
    _save(fig, path)


def widths_figure(series, cfg, path: Path) -> None:
    t, label = _time_axis(series, cfg)
    w = series.column("widths")
    lw = series.column("larmor_widths")
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, name in enumerate("xyz"):
        ax.plot(t, w[:, k], "o-", ms=3, label=f"sigma_{name}")
    ax.plot(t, lw[:, 0], "k--", label="sigma_u (rotating axes)")
    ax.set_xlabel(label)
    ax.set_ylabel("width")
    ax.legend()
    _save(fig, path)


def orbit_figure(series, cfg, path: Path) -> None:
    c = series.column("centroid")
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(c[:, 0], c[:, 1], "o", label="centroid")
    if series.times.size:
        tt = np.linspace(0, series.times.max(), 400)
        ref = np.array([cf.classical_center(s, cfg.beam, cfg.params) for s in tt])
        ax.plot(ref[:, 0], ref[:, 1], "-", lw=1, label="classical")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend()
    _save(fig, path)


def snapshots_figure(frames, cfg, path: Path, count: int = 4) -> None:
    """|psi|^2 in the packet plane for a few evenly spaced frames."""
    frames = sorted(frames, key=lambda f: f.t)
    pick = [frames[i] for i in np.linspace(0, len(frames) - 1, min(count, len(frames))).astype(int)]
    fig, axes = plt.subplots(1, len(pick), figsize=(3 * len(pick), 3), squeeze=False)
    for ax, f in zip(axes[0], pick):
        zc = cf.classical_center(f.t, cfg.beam, cfg.params)[2]
        sl = f.slice_z(zc)
        (x0, x1), (y0, y1) = sl.grid.extents
        ax.imshow(np.abs(sl.data.T) ** 2, origin="lower", extent=(x0, x1, y0, y1), cmap="viridis")
        ax.set_title(f"t = {f.t:.3g}")
        ax.set_xticks([])
        ax.set_yticks([])
    _save(fig, path)


def render_figures(out_dir, series, cfg, frames=None) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = ["nodal_angle.png", "widths.png", "orbit.png"]
    nodal_angle_figure(series, cfg, out / names[0])
    widths_figure(series, cfg, out / names[1])
    orbit_figure(series, cfg, out / names[2])
    if frames:
        names.append("snapshots.png")
        snapshots_figure(frames, cfg, out / names[3])
    return [out / n for n in names]
