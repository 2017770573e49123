"""Benchmark problem, error norms, EOC and the convergence study harness.

The benchmark solution is the harmonic corner function r^lambda*cos(lambda*phi)
with lambda = pi/omega, which solves -lap(y) + y = y with Neumann data dy/dn.
The study builds a sequence of graded meshes, solves on each and tabulates
discrete max-norm, L2 and H1 errors together with their experimental orders.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .assembly import QuadratureRule, assemble_system, triangle_rule
from .exceptions import ConfigError, SingularPointError
from .geometry import (
    GradingSpec,
    TriangleMesh,
    apply_grading,
    build_sector_domain,
    coarse_triangulation,
    signed_areas,
    uniform_refine,
)
from .linalg import spmv
from .solver import (
    LinearProblem,
    SemilinearProblem,
    SolverOptions,
    ritz_projection,
    solve_linear,
    solve_semilinear,
)


def _polar(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar coordinates with the angle wrapped into [0, 2*pi)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    # tiny negative angles are roundoff on the phi = 0 edge, not 2*pi wraps
    phi = np.where(phi < -1e-12, phi + 2.0 * np.pi, np.maximum(phi, 0.0))
    return r, phi


@dataclass
class BenchmarkProblem:
    """Exact corner-singularity solution and its Neumann data."""

    omega: float
    lam: float
    exact: Callable
    exact_gradient: Callable
    f_lin: Callable
    g: Callable


def make_benchmark(omega: float) -> BenchmarkProblem:
    if not 0.0 < omega < 2.0 * np.pi:
        raise ConfigError(f"omega must lie in (0, 2*pi), got {omega}")
    lam = np.pi / omega

    def exact(pts):
        r, phi = _polar(pts)
        return r ** lam * np.cos(lam * phi)

    def exact_gradient(pts):
        r, phi = _polar(pts)
        if lam < 1.0 and np.any(r == 0.0):
            i = int(np.argmax(r == 0.0))
            raise SingularPointError(
                f"gradient of r^{lam:.6g} is unbounded at the corner "
                f"(point index {i})")
        scale = lam * r ** (lam - 1.0)
        return np.column_stack([scale * np.cos((lam - 1.0) * phi),
                                -scale * np.sin((lam - 1.0) * phi)])

    def g(pts, normals):
        grad = exact_gradient(pts)
        return np.einsum("ij,ij->i", grad, np.asarray(normals, dtype=float))

    return BenchmarkProblem(omega=omega, lam=lam, exact=exact,
                            exact_gradient=exact_gradient, f_lin=exact, g=g)


# ---------------------------------------------------------------------------
# error norms

def error_linf_discrete(mesh: TriangleMesh, y_h: np.ndarray, exact) -> float:
    """max over mesh nodes of |y - y_h|, i.e. the error against I_h y."""
    if len(y_h) != mesh.num_nodes:
        raise ValueError("nodal vector length does not match the mesh")
    return float(np.max(np.abs(np.asarray(exact(mesh.nodes)) - y_h)))


def _qp_values(mesh: TriangleMesh, rule: QuadratureRule):
    pts = np.einsum("qi,mid->mqd", rule.points, mesh.nodes[mesh.triangles])
    areas = signed_areas(mesh.nodes, mesh.triangles)
    return pts, areas


def error_l2(mesh: TriangleMesh, y_h: np.ndarray, exact,
             rule: QuadratureRule | None = None) -> float:
    rule = rule or triangle_rule(7)
    if rule.exact_degree < 4:
        raise ValueError("L2 error rule must be exact to degree >= 4")
    pts, areas = _qp_values(mesh, rule)
    yex = np.asarray(exact(pts.reshape(-1, 2))).reshape(pts.shape[:2])
    yh = np.einsum("qi,mi->mq", rule.points, y_h[mesh.triangles])
    per_tri = 2.0 * areas * np.einsum("q,mq->m", rule.weights, (yex - yh) ** 2)
    return float(np.sqrt(np.sum(per_tri)))


def _p1_gradients(mesh: TriangleMesh, y_h: np.ndarray) -> np.ndarray:
    p = mesh.nodes[mesh.triangles]
    areas = signed_areas(mesh.nodes, mesh.triangles)
    b = np.stack([p[:, 1, 1] - p[:, 2, 1],
                  p[:, 2, 1] - p[:, 0, 1],
                  p[:, 0, 1] - p[:, 1, 1]], axis=1)
    c = np.stack([p[:, 2, 0] - p[:, 1, 0],
                  p[:, 0, 0] - p[:, 2, 0],
                  p[:, 1, 0] - p[:, 0, 0]], axis=1)
    vals = y_h[mesh.triangles]
    gx = np.einsum("mi,mi->m", vals, b) / (2.0 * areas)
    gy = np.einsum("mi,mi->m", vals, c) / (2.0 * areas)
    return np.column_stack([gx, gy])


def error_h1_semi(mesh: TriangleMesh, y_h: np.ndarray, exact_gradient,
                  rule: QuadratureRule | None = None) -> float:
    """H1 seminorm of y - y_h; the discrete gradient is constant per triangle."""
    rule = rule or triangle_rule(7)
    pts, areas = _qp_values(mesh, rule)
    gex = np.asarray(exact_gradient(pts.reshape(-1, 2))).reshape(*pts.shape[:2], 2)
    gh = _p1_gradients(mesh, y_h)
    diff = gex - gh[:, None, :]
    per_tri = 2.0 * areas * np.einsum("q,mq->m", rule.weights,
                                      np.einsum("mqd,mqd->mq", diff, diff))
    return float(np.sqrt(np.sum(per_tri)))


def h1_semi_diff(mesh: TriangleMesh, u: np.ndarray, v: np.ndarray,
                 rule: QuadratureRule | None = None) -> float:
    """Quadrature-path H1 seminorm of the difference of two nodal vectors."""
    d = np.asarray(u) - np.asarray(v)
    return error_h1_semi(mesh, d, lambda pts: np.zeros((len(pts), 2)), rule)


# ---------------------------------------------------------------------------
# rates

def eoc(err_prev: float, err_curr: float, h_prev: float, h_curr: float
        ) -> Optional[float]:
    """Experimental order ln(e1/e2)/ln(h1/h2); None if a zero error makes it undefined."""
    if h_prev <= 0.0 or h_curr <= 0.0 or h_prev <= h_curr:
        raise ValueError(f"need h_prev > h_curr > 0, got {h_prev}, {h_curr}")
    if err_prev <= 0.0 or err_curr <= 0.0:
        return None
    return math.log(err_prev / err_curr) / math.log(h_prev / h_curr)


def predicted_linf_rate(lam: float, mu: float) -> float:
    """Expected max-norm rate: 2 under sufficient grading, min(2, lambda) on
    quasi-uniform meshes, and the observed lambda/mu in between."""
    if lam <= 0.0:
        raise ValueError(f"singular exponent must be positive, got {lam}")
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"grading parameter must be in (0, 1], got {mu}")
    if mu < lam / 2.0:
        return 2.0
    if mu == 1.0:
        return min(2.0, lam)
    return min(2.0, lam / mu)


# ---------------------------------------------------------------------------
# study harness

NONLINEARITIES = {
    "cubic": (lambda y: y ** 3, lambda y: 3.0 * y ** 2),
}

CSV_HEADER = "level,h,nodes,triangles,err_linf,eoc_linf,err_l2,eoc_l2,err_h1,solver_iters"


@dataclass
class StudyConfig:
    omega: float
    mu: float
    radius: float = 1.0
    levels: tuple[int, int] = (3, 6)
    problem: str = "linear"           # "linear" | "semilinear"
    nonlinearity: str = "cubic"
    quad_degree_vol: int = 5
    quad_degree_edge: int = 5
    error_quad_degree: int = 7
    cg_tol: float = 1e-12
    cg_max_iter: Optional[int] = None
    newton_increment_tol: float = 1e-11
    newton_residual_tol: float = 1e-10
    newton_max_iter: int = 50

    def validate(self) -> None:
        if not 0.0 < self.omega < 2.0 * np.pi:
            raise ConfigError(f"omega must lie in (0, 2*pi), got {self.omega}")
        if not 0.0 < self.mu <= 1.0:
            raise ConfigError(f"mu must lie in (0, 1], got {self.mu}")
        if self.radius <= 0.0:
            raise ConfigError(f"radius must be positive, got {self.radius}")
        lo, hi = self.levels
        if lo < 1 or hi < lo:
            raise ConfigError(f"levels must satisfy 1 <= first <= last, got {lo}..{hi}")
        if self.problem not in ("linear", "semilinear"):
            raise ConfigError(f"problem must be 'linear' or 'semilinear', got "
                              f"'{self.problem}'")
        if self.problem == "semilinear" and self.nonlinearity not in NONLINEARITIES:
            raise ConfigError(f"unknown nonlinearity '{self.nonlinearity}'; "
                              f"built-in: {sorted(NONLINEARITIES)}")
        for key in ("quad_degree_vol", "quad_degree_edge", "error_quad_degree"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1, got {getattr(self, key)}")
        for key in ("cg_tol", "newton_increment_tol", "newton_residual_tol"):
            if getattr(self, key) <= 0.0:
                raise ConfigError(f"{key} must be positive, got {getattr(self, key)}")

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            quad_degree_vol=self.quad_degree_vol,
            quad_degree_edge=self.quad_degree_edge,
            cg_tol=self.cg_tol,
            cg_max_iter=self.cg_max_iter,
            newton_increment_tol=self.newton_increment_tol,
            newton_residual_tol=self.newton_residual_tol,
            newton_max_iter=self.newton_max_iter,
        )

    def echo(self) -> dict:
        lo, hi = self.levels
        out = {
            "omega": repr(self.omega),
            "mu": repr(self.mu),
            "radius": repr(self.radius),
            "levels": f"{lo}..{hi}",
            "problem": self.problem,
            "quad_degree_vol": self.quad_degree_vol,
            "quad_degree_edge": self.quad_degree_edge,
            "error_quad_degree": self.error_quad_degree,
            "cg_tol": repr(self.cg_tol),
        }
        if self.problem == "semilinear":
            out["nonlinearity"] = self.nonlinearity
            out["newton_increment_tol"] = repr(self.newton_increment_tol)
            out["newton_residual_tol"] = repr(self.newton_residual_tol)
        return out


@dataclass
class StudyRow:
    level: int
    h: float
    nodes: int
    triangles: int
    err_linf: float
    err_l2: float
    err_h1: float
    eoc_linf: Optional[float]
    eoc_l2: Optional[float]
    solver_iters: int
    newton_iters: Optional[int] = None
    superclose_ratio: Optional[float] = None


@dataclass
class ConvergenceReport:
    config: StudyConfig
    rows: list = field(default_factory=list)

    def finest_pair_eoc_linf(self) -> Optional[float]:
        return self.rows[-1].eoc_linf if self.rows else None

    def finest_pair_eoc_l2(self) -> Optional[float]:
        return self.rows[-1].eoc_l2 if self.rows else None

    def write_csv(self, stream) -> None:
        for key, value in self.config.echo().items():
            stream.write(f"# {key} = {value}\n")
        stream.write(CSV_HEADER + "\n")
        for row in self.rows:
            cells = [
                str(row.level),
                f"{row.h:.5e}",
                str(row.nodes),
                str(row.triangles),
                f"{row.err_linf:.5e}",
                "" if row.eoc_linf is None else f"{row.eoc_linf:.5e}",
                f"{row.err_l2:.5e}",
                "" if row.eoc_l2 is None else f"{row.eoc_l2:.5e}",
                f"{row.err_h1:.5e}",
                str(row.solver_iters),
            ]
            stream.write(",".join(cells) + "\n")

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def build_study_mesh(config: StudyConfig, level: int) -> TriangleMesh:
    """Coarse sector mesh, `level` uniform refinements, then corner grading."""
    mesh = coarse_triangulation(build_sector_domain(config.omega))
    for _ in range(level):
        mesh = uniform_refine(mesh)
    spec = GradingSpec(corner=np.zeros(2), radius=config.radius, mu=config.mu)
    return apply_grading(mesh, spec)


def run_convergence_study(config: StudyConfig,
                          progress: Callable | None = None) -> ConvergenceReport:
    """Solve the benchmark on each level and tabulate errors and EOCs."""
    config.validate()
    bench = make_benchmark(config.omega)
    opts = config.solver_options()
    err_rule = triangle_rule(config.error_quad_degree)
    spec = GradingSpec(corner=np.zeros(2), radius=config.radius, mu=config.mu)

    if config.problem == "semilinear":
        d, d_prime = NONLINEARITIES[config.nonlinearity]

        def f_semi(pts):
            y = bench.exact(pts)
            return y + d(y)

        problem = SemilinearProblem(f=f_semi, g=bench.g, d=d, d_prime=d_prime)
    else:
        problem = LinearProblem(f=bench.f_lin, g=bench.g)

    report = ConvergenceReport(config=config)
    lo, hi = config.levels
    mesh = coarse_triangulation(build_sector_domain(config.omega))
    level = 0
    prev = None
    for target in range(lo, hi + 1):
        while level < target:
            mesh = uniform_refine(mesh)
            level += 1
        graded = apply_grading(mesh, spec)
        if progress is not None:
            progress(f"level {level}: {graded.num_nodes} nodes")

        newton_iters = None
        superclose = None
        if config.problem == "semilinear":
            y_h, newton_report = solve_semilinear(graded, problem, opts)
            solver_iters = newton_report.iterations
            newton_iters = newton_report.iterations
            ritz, _ = ritz_projection(graded, bench, opts)
            # full H1 norm through the bilinear form: a(v, v) = |v|_H1^2
            a = assemble_system(graded)
            diff = ritz - y_h
            h1_full = math.sqrt(float(diff @ spmv(a, diff)))
            ritz_l2 = error_l2(graded, ritz, bench.exact, err_rule)
            superclose = h1_full / ritz_l2 if ritz_l2 > 0.0 else float("inf")
        else:
            y_h, cg_report = solve_linear(graded, problem, opts)
            solver_iters = cg_report.iterations

        h = graded.h_global
        row = StudyRow(
            level=level,
            h=h,
            nodes=graded.num_nodes,
            triangles=graded.num_triangles,
            err_linf=error_linf_discrete(graded, y_h, bench.exact),
            err_l2=error_l2(graded, y_h, bench.exact, err_rule),
            err_h1=error_h1_semi(graded, y_h, bench.exact_gradient, err_rule),
            eoc_linf=None,
            eoc_l2=None,
            solver_iters=solver_iters,
            newton_iters=newton_iters,
            superclose_ratio=superclose,
        )
        if prev is not None:
            row.eoc_linf = eoc(prev.err_linf, row.err_linf, prev.h, row.h)
            row.eoc_l2 = eoc(prev.err_l2, row.err_l2, prev.h, row.h)
        report.rows.append(row)
        prev = row
    return report
