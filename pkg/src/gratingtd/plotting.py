"""Figures written next to the text outputs (Agg backend, no display)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_energy", "plot_snapshots", "plot_convergence", "plot_boundary_traces"]

# no Software/date chunks, so identical data gives identical bytes
_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)


def plot_energy(times, e1, e2, path, delay: float | None = None):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(times, e1, label="$e_1$")
    ax.plot(times, e2, label="$e_2$")
    if delay is not None:
        ax.axvline(delay, color="0.6", ls=":", lw=1, label="arrival")
    ax.set_yscale("symlog", linthresh=max(1e-8, 1e-6 * float(np.max(e2))))
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def plot_snapshots(snaps, period: float, h1: float, h2: float, path):
    """``snaps`` is a list of ``(t, grid)`` with ``grid`` shaped ``(nz + 1, nx)``."""
    n = len(snaps)
    fig, axes = plt.subplots(1, max(n, 1), figsize=(3.0 * max(n, 1), 3.2), squeeze=False)
    vmax = max((float(np.max(np.abs(g))) for _, g in snaps), default=1.0) or 1.0
    for ax, (t, g) in zip(axes[0], snaps):
        # close the period for display
        img = np.concatenate([g, g[:, :1]], axis=1)
        im = ax.imshow(img, origin="lower", extent=(0, period, h2, h1), cmap="RdBu_r", vmin=-vmax, vmax=vmax,
                       aspect="auto")
        ax.set_title(f"t = {t:.3g}")
        ax.set_xlabel("x")
    axes[0][0].set_ylabel("z")
    fig.colorbar(im, ax=axes[0].tolist(), shrink=0.85)
    _save(fig, path)


def plot_convergence(tables: dict, path):
    """``tables`` maps a label to a list of rows with ``h`` and ``error``."""
    fig, ax = plt.subplots(figsize=(4.8, 3.8))
    for label, rows in tables.items():
        h = np.array([r.h for r in rows])
        e = np.array([r.error for r in rows])
        ax.loglog(h, e, "o-", label=label)
    if tables:
        rows = next(iter(tables.values()))
        h = np.array([r.h for r in rows])
        ax.loglog(h, rows[-1].error * (h / h[-1]) ** 2, "k--", lw=0.8, label="$h^2$")
    ax.set_xlabel("h")
    ax.set_ylabel("relative error")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def plot_boundary_traces(times, traces: dict, path):
    fig, ax = plt.subplots(figsize=(6, 3.4))
    for label, vals in traces.items():
        ax.plot(times, vals, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("U")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)
