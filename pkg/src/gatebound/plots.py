"""Figure rendering for sweep results, written to files next to the tables."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["sweep_figure", "bosonic_figure", "trace_figure"]

_STYLE = {
    "measured": dict(marker="o", color="#1f77b4", label="best found 1 - F$^2$"),
    "bound": dict(marker="s", linestyle="--", color="#d62728"),
}


def sweep_figure(rows, path: str) -> str:
    """Best infidelity and the 1/(4 n^2) floor against implementation size."""
    sizes = [r.size for r in rows]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(sizes, [r.best_infidelity for r in rows], **_STYLE["measured"])
    ax.plot(sizes, [r.bound for r in rows], label=r"floor $1/(4n^2)$", **_STYLE["bound"])
    ax.set_yscale("log")
    ax.set_xticks(sizes)
    ax.set_xlabel("implementation size n (total qubits)")
    ax.set_ylabel(r"gate error $1 - F^2$")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
    return path


def bosonic_figure(rows, path: str) -> str:
    """Best infidelity and the 1/(16 <N>) floor against mean photon number."""
    mean_n = [r.mean_photons for r in rows]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(mean_n, [r.best_infidelity for r in rows], **_STYLE["measured"])
    ax.plot(mean_n, [r.bound for r in rows],
            label=r"floor $1/(16\langle N\rangle)$", **_STYLE["bound"])
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"mean photon number $\langle N\rangle$")
    ax.set_ylabel(r"gate error $1 - F^2$")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
    return path


def trace_figure(trace, path: str) -> str:
    """Running best objective value over the course of an optimization."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(range(1, len(trace) + 1), trace, color="#1f77b4")
    ax.set_xlabel("objective evaluation")
    ax.set_ylabel("best objective so far")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
    return path
