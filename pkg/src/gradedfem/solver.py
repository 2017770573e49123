"""Problem-level drivers: linear Neumann solve, semilinear Newton, Ritz projection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .assembly import (
    QuadratureRule,
    assemble_load,
    assemble_system,
    assemble_weighted_mass,
    edge_rule,
    triangle_rule,
    volume_quadrature_points,
)
from .exceptions import (
    AssumptionViolationError,
    NewtonFailureError,
    SolverFailureError,
)
from .geometry import TriangleMesh, signed_areas
from .linalg import CgReport, cg_solve, csr_add, spmv


@dataclass
class LinearProblem:
    """Data of -lap(y) + y = f with Neumann data g = dy/dn."""

    f: Callable  # (n, 2) points -> values
    g: Callable  # (n, 2) points, (n, 2) outward normals -> values


@dataclass
class SemilinearProblem:
    """Data of -lap(y) + y + d(y) = f; d must be monotonically increasing.

    With position_dependent=True, d and d_prime take (values, points) so the
    lower-order term can be a function d(x, y); coercivity is then the
    caller's responsibility.
    """

    f: Callable
    g: Callable
    d: Callable
    d_prime: Callable
    position_dependent: bool = False


@dataclass
class SolverOptions:
    quad_degree_vol: int = 5
    quad_degree_edge: int = 5
    cg_tol: float = 1e-12
    cg_max_iter: Optional[int] = None
    newton_increment_tol: float = 1e-11
    newton_residual_tol: float = 1e-10
    newton_max_iter: int = 50
    damping_max_halvings: int = 10
    newton_initial_guess: str = "linear"  # "linear" | "zero"
    corner_subdiv: int = 0
    corners: tuple = ()


@dataclass
class NewtonReport:
    iterations: int
    final_increment_max: float
    final_relative_residual: float
    converged: bool
    cg_reports: list = field(default_factory=list)
    increment_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)


def _rules(opts: SolverOptions) -> tuple[QuadratureRule, QuadratureRule]:
    return triangle_rule(opts.quad_degree_vol), edge_rule(opts.quad_degree_edge)


def solve_linear(mesh: TriangleMesh, prob: LinearProblem,
                 opts: SolverOptions | None = None) -> tuple[np.ndarray, CgReport]:
    """Nodal values of the discrete solution of the linear Neumann problem."""
    opts = opts or SolverOptions()
    vol_rule, bnd_rule = _rules(opts)
    a = assemble_system(mesh)
    b = assemble_load(mesh, prob.f, prob.g, vol_rule, bnd_rule,
                      corner_subdiv=opts.corner_subdiv, corners=opts.corners)
    x, report = cg_solve(a, b, tol=opts.cg_tol, max_iter=opts.cg_max_iter)
    if not report.converged:
        raise SolverFailureError(
            f"CG stagnated at relative residual {report.relative_residual:.3e} "
            f"after {report.iterations} iterations", report=report)
    return x, report


def ritz_projection(mesh: TriangleMesh, exact,
                    opts: SolverOptions | None = None) -> tuple[np.ndarray, CgReport]:
    """Projection with a(y - proj, v_h) = 0 for all v_h.

    Valid because the exact solution solves the linear problem with data
    (f_lin, g); the projection is then just that linear FEM solve.
    """
    return solve_linear(mesh, LinearProblem(f=exact.f_lin, g=exact.g), opts)


def _check_derivative_consistency(prob: SemilinearProblem, lo: float, hi: float) -> None:
    """Finite-difference spot check that d_prime matches d (10 points, rel 1e-5)."""
    rng = np.random.default_rng(20240817)
    y = rng.uniform(lo, hi, size=10)
    step = 1e-6 * (1.0 + np.abs(y))
    if prob.position_dependent:
        pts = np.zeros((10, 2))
        fd = (prob.d(y + step, pts) - prob.d(y - step, pts)) / (2.0 * step)
        dp = prob.d_prime(y, pts)
    else:
        fd = (prob.d(y + step) - prob.d(y - step)) / (2.0 * step)
        dp = prob.d_prime(y)
    scale = np.maximum(np.abs(dp), np.maximum(np.abs(fd), 1e-8))
    if np.any(np.abs(fd - dp) > 1e-5 * scale):
        i = int(np.argmax(np.abs(fd - dp) / scale))
        raise AssumptionViolationError(
            f"d_prime inconsistent with d at y = {y[i]:.6g}: "
            f"finite difference {fd[i]:.8g} vs d_prime {dp[i]:.8g}")


def solve_semilinear(mesh: TriangleMesh, prob: SemilinearProblem,
                     opts: SolverOptions | None = None
                     ) -> tuple[np.ndarray, NewtonReport]:
    """Newton iteration for the discrete semilinear problem.

    Linearizes with the SPD matrix A + M_{d'(u)} and damps by step halving
    whenever the residual norm fails to decrease.
    """
    opts = opts or SolverOptions()
    vol_rule, bnd_rule = _rules(opts)
    a = assemble_system(mesh)
    b = assemble_load(mesh, prob.f, prob.g, vol_rule, bnd_rule,
                      corner_subdiv=opts.corner_subdiv, corners=opts.corners)
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        norm_b = 1.0

    qpoints = volume_quadrature_points(mesh, vol_rule)
    flat_pts = qpoints.reshape(-1, 2)
    bary = vol_rule.points
    areas = signed_areas(mesh.nodes, mesh.triangles)

    def at_qp(u: np.ndarray) -> np.ndarray:
        return np.einsum("qi,mi->mq", bary, u[mesh.triangles])

    def d_values(u_qp: np.ndarray) -> np.ndarray:
        if prob.position_dependent:
            return np.asarray(prob.d(u_qp.ravel(), flat_pts)).reshape(u_qp.shape)
        return np.asarray(prob.d(u_qp.ravel())).reshape(u_qp.shape)

    def d_prime_values(u_qp: np.ndarray) -> np.ndarray:
        if prob.position_dependent:
            return np.asarray(prob.d_prime(u_qp.ravel(), flat_pts)).reshape(u_qp.shape)
        return np.asarray(prob.d_prime(u_qp.ravel())).reshape(u_qp.shape)

    def nonlinear_term(u: np.ndarray) -> np.ndarray:
        dv = d_values(at_qp(u))
        out = np.zeros(mesh.num_nodes)
        contrib = 2.0 * areas[:, None] * np.einsum("q,mq,qi->mi",
                                                   vol_rule.weights, dv, bary)
        np.add.at(out, mesh.triangles, contrib)
        return out

    def residual(u: np.ndarray) -> np.ndarray:
        return spmv(a, u) + nonlinear_term(u) - b

    cg_reports = []
    if opts.newton_initial_guess == "zero":
        u = np.zeros(mesh.num_nodes)
    else:
        # default initial guess: the linear problem with d dropped
        u, first_cg = cg_solve(a, b, tol=opts.cg_tol, max_iter=opts.cg_max_iter)
        if not first_cg.converged:
            raise SolverFailureError("CG failed on the Newton initial guess",
                                     report=first_cg)
        cg_reports.append(first_cg)
    lo, hi = float(u.min()) - 1.0, float(u.max()) + 1.0
    _check_derivative_consistency(prob, lo, hi)

    res = residual(u)
    res_norm = float(np.linalg.norm(res))
    increments: list[float] = []
    residuals: list[float] = [res_norm / norm_b]
    increment_max = np.inf
    newton_steps = 0
    while True:
        if (increment_max <= opts.newton_increment_tol
                and res_norm <= opts.newton_residual_tol * norm_b):
            return u, NewtonReport(iterations=newton_steps,
                                   final_increment_max=float(increment_max),
                                   final_relative_residual=res_norm / norm_b,
                                   converged=True, cg_reports=cg_reports,
                                   increment_history=increments,
                                   residual_history=residuals)
        if newton_steps >= opts.newton_max_iter:
            break
        dprime = d_prime_values(at_qp(u))
        if np.any(dprime < 0.0):
            m, q = np.unravel_index(int(np.argmax(dprime < 0.0)), dprime.shape)
            raise AssumptionViolationError(
                f"d_prime < 0 ({dprime[m, q]:.6g}) at quadrature point "
                f"({qpoints[m, q, 0]:.6g}, {qpoints[m, q, 1]:.6g}): "
                "d is not monotonically increasing")
        jac = csr_add(a, assemble_weighted_mass(mesh, vol_rule, dprime))
        # forcing tolerance: the correction only needs to be accurate on the
        # scale of the outer load, not of the shrinking Newton residual
        inner_tol = opts.cg_tol
        if res_norm > 0.0:
            inner_tol = min(max(opts.cg_tol, opts.cg_tol * norm_b / res_norm), 1e-2)
        delta, cg_report = cg_solve(jac, -res, tol=inner_tol,
                                    max_iter=opts.cg_max_iter)
        cg_reports.append(cg_report)
        if not cg_report.converged:
            raise SolverFailureError(
                f"CG failed inside Newton iteration {newton_steps + 1}",
                report=cg_report)
        step = 1.0
        for _ in range(opts.damping_max_halvings + 1):
            trial = u + step * delta
            trial_res = residual(trial)
            trial_norm = float(np.linalg.norm(trial_res))
            if trial_norm < res_norm or res_norm == 0.0:
                break
            step *= 0.5
        u, res, res_norm = trial, trial_res, trial_norm
        increment_max = float(np.max(np.abs(step * delta)))
        increments.append(increment_max)
        residuals.append(res_norm / norm_b)
        newton_steps += 1

    report = NewtonReport(iterations=newton_steps,
                          final_increment_max=float(increment_max),
                          final_relative_residual=res_norm / norm_b,
                          converged=False, cg_reports=cg_reports,
                          increment_history=increments,
                          residual_history=residuals)
    raise NewtonFailureError(
        f"Newton did not converge in {opts.newton_max_iter} iterations "
        f"(last increment {increment_max:.3e}, relative residual "
        f"{res_norm / norm_b:.3e})", report=report)
