"""Matplotlib renderers for the report paths; every figure goes straight to a file."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _finish(fig, path):
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def spectrum_figure(quads, sys, path):
    """Eigenvalues in the complex plane with the localization disks."""
    fig, ax = plt.subplots(figsize=(5.0, 6.0))
    radius = sys.b_norm
    for quad in quads:
        sig = np.array(quad.all_sigmas)
        ax.plot(sig.real, sig.imag, "k.", ms=3)
    theta = np.linspace(0.0, 2.0 * np.pi, 100)
    for w in sys.omega:
        for center in (w, -w):
            ax.plot(radius * np.cos(theta), center + radius * np.sin(theta),
                    color="0.8", lw=0.4, zorder=0)
    ax.axvline(0.0, color="0.6", lw=0.6)
    ax.set_xlabel(r"Re $\sigma$")
    ax.set_ylabel(r"Im $\sigma$")
    ax.set_title(f"generator spectrum, N={sys.n}")
    return _finish(fig, path)


def profile_figure(prof, T, envelope_c, path):
    """Deviation profile against its polynomial envelope (log scale)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    t = prof.times
    bracket = (t + 1.0) ** (-prof.beta) + (T - t + 1.0) ** (-prof.beta)
    ax.semilogy(t, np.maximum(prof.dev, 1e-300), "b-", lw=0.8, label="deviation")
    ax.semilogy(t, envelope_c * prof.denom * bracket, "r--", lw=1.0,
                label=f"envelope, C={envelope_c:.3g}")
    ax.set_xlabel("t")
    ax.set_ylabel("weighted deviation")
    ax.set_title(f"T={T:g}, beta={prof.beta:g}")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def sweep_figure(records, path):
    """Envelope constants and shooting ratios across the (N, T) ladder."""
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))
    groups = sorted({(r["N"], r["beta"]) for r in records})
    for n, beta in groups:
        rows = sorted((r for r in records if r["N"] == n and r["beta"] == beta),
                      key=lambda r: r["T"])
        ts = [r["T"] for r in rows]
        label = f"N={n}" if len({b for _, b in groups}) == 1 else f"N={n}, b={beta:g}"
        axes[0].plot(ts, [r["envelope_constant"] for r in rows], "o-", label=label)
        axes[1].plot(ts, [r["shooting_ratio"] for r in rows], "s-", label=label)
    for ax, title in zip(axes, ("envelope constant", "shooting ratio")):
        ax.set_xlabel("T")
        ax.set_title(title)
        ax.legend(fontsize=8)
    fig.tight_layout()
    return _finish(fig, path)


def beam_modes_figure(n_shapes, path, mode_shape):
    """First few clamped-free shapes on the unit interval."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    x = np.linspace(0.0, 1.0, 400)
    for n in range(1, n_shapes + 1):
        ax.plot(x, mode_shape(n, x), lw=1.0, label=f"n={n}")
    ax.set_xlabel("x / l")
    ax.set_ylabel(r"$\phi_n$")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def solution_figure(traj, static_sol, path):
    """Control history and distance to the steady state."""
    fig, axes = plt.subplots(2, 1, figsize=(6.0, 5.0), sharex=True)
    axes[0].plot(traj.times, traj.u, "b-", lw=0.8)
    axes[0].axhline(static_sol.uhat, color="r", ls="--", lw=0.8)
    axes[0].set_ylabel("u(t)")
    dist = np.sqrt(np.sum((traj.xi - static_sol.xhat.xi) ** 2
                          + (traj.eta - static_sol.xhat.eta) ** 2, axis=1))
    axes[1].semilogy(traj.times, np.maximum(dist, 1e-300), "k-", lw=0.8)
    axes[1].set_ylabel("|x(t) - xhat|")
    axes[1].set_xlabel("t")
    fig.tight_layout()
    return _finish(fig, path)
