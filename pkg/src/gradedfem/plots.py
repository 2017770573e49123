"""Figure rendering for meshes and convergence reports (headless backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import matplotlib.tri as mtri  # noqa: E402
import numpy as np  # noqa: E402

from .benchmark import ConvergenceReport, predicted_linf_rate  # noqa: E402
from .geometry import TriangleMesh  # noqa: E402


def plot_mesh(mesh: TriangleMesh, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    tri = mtri.Triangulation(mesh.nodes[:, 0], mesh.nodes[:, 1], mesh.triangles)
    ax.triplot(tri, linewidth=0.4, color="tab:blue")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_convergence(report: ConvergenceReport, path) -> None:
    """Log-log error history with h^2 and h^predicted reference slopes."""
    rows = report.rows
    h = np.array([r.h for r in rows])
    linf = np.array([r.err_linf for r in rows])
    l2 = np.array([r.err_l2 for r in rows])
    cfg = report.config
    lam = np.pi / cfg.omega
    rate = predicted_linf_rate(lam, cfg.mu)

    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ax.loglog(h, linf, "o-", label="discrete max error")
    ax.loglog(h, l2, "s--", label="L2 error")
    anchor = linf[-1]
    ax.loglog(h, anchor * (h / h[-1]) ** rate, "k:",
              label=f"h^{rate:.3g} (predicted)")
    if abs(rate - 2.0) > 1e-12:
        ax.loglog(h, anchor * (h / h[-1]) ** 2, "k-.", alpha=0.5, label="h^2")
    ax.set_xlabel("mesh size h")
    ax.set_ylabel("error")
    ax.invert_xaxis()
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(f"omega = {cfg.omega:.6g}, mu = {cfg.mu:.6g} ({cfg.problem})")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
