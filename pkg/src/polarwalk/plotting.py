"""Figures rendered next to the CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_PNG_META = {"Software": None}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def plot_convergence(eps, delta, path, fidelity_deviation=None, slope=None, title=None):
    """Log-log plot of the one-step error against the lattice step."""
    eps = np.asarray(eps)
    delta = np.asarray(delta)
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.loglog(eps, delta, "o-", color="k", label=r"$\delta(\epsilon)$")
    if fidelity_deviation is not None:
        ax.loglog(eps, fidelity_deviation, "s--", color="0.5",
                  label=r"$1-|\langle\Phi^0|\Phi^1\rangle|$")
    if slope is not None:
        ref = delta[-1] * (eps / eps[-1]) ** slope
        ax.loglog(eps, ref, ":", color="tab:red", label=f"slope {slope:.2f}")
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel("error")
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(frameon=False, fontsize=8)
    _finish(fig, path)


def plot_audit(steps, norm, J, even_fraction, path):
    steps = np.asarray(steps)
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(5.0, 6.0))
    axes[0].plot(steps, np.asarray(norm) - norm[0], color="k")
    axes[0].set_ylabel(r"$\|\Phi\| - \|\Phi_0\|$")
    axes[1].plot(steps, np.asarray(J) - J[0], color="k")
    axes[1].set_ylabel(r"$\langle J\rangle - \langle J\rangle_0$")
    axes[2].semilogy(steps, np.maximum(even_fraction, 1e-300), color="k")
    axes[2].set_ylabel("integer-mode fraction")
    axes[2].set_xlabel("step")
    for ax in axes[:2]:
        ax.ticklabel_format(axis="y", style="sci", scilimits=(-2, 2), useOffset=False)
    _finish(fig, path)
