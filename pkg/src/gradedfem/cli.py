"""Command-line surface: mesh generation, grading audits, solves and studies.

Exit codes: 0 success / audit pass, 1 audit fail, 2 configuration error,
3 I/O or parse or geometry error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import benchmark as bm
from .exceptions import (
    AssumptionViolationError,
    ConfigError,
    DataEvaluationError,
    DomainParameterError,
    GradedFemError,
    GradingError,
    MeshFormatError,
    NotSpdError,
    PreconditionerError,
    SolverFailureError,
    TriangulationError,
)
from .geometry import (
    DEFAULT_AUDIT_C1,
    DEFAULT_AUDIT_C2,
    GradingSpec,
    apply_grading,
    audit_grading,
    build_sector_domain,
    coarse_triangulation,
    compute_h_global,
    load_mesh,
    min_angle_deg,
    uniform_refine,
    write_mesh,
)
from .solver import LinearProblem, SolverOptions, solve_linear, solve_semilinear

EXIT_OK = 0
EXIT_AUDIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4

_CONFIG_ERRORS = (ConfigError, DomainParameterError)
_IO_ERRORS = (MeshFormatError, TriangulationError, GradingError, OSError)
_SOLVER_ERRORS = (SolverFailureError, NotSpdError, PreconditionerError,
                  DataEvaluationError, AssumptionViolationError)


def parse_angle(text: str) -> float:
    """Accepts radians ('2.356') or multiples of pi ('0.75pi', '1.5pi', 'pi')."""
    s = text.strip().lower().replace(" ", "")
    try:
        if s.endswith("pi"):
            coef = s[:-2]
            return (float(coef) if coef else 1.0) * np.pi
        return float(s)
    except ValueError:
        raise ConfigError(f"omega: cannot parse angle '{text}' "
                          "(use radians or '<number>pi')") from None


def parse_levels(text: str) -> tuple[int, int]:
    """'a..b' for a range, a single integer for one level."""
    s = text.strip()
    try:
        if ".." in s:
            lo_s, hi_s = s.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
        else:
            lo = hi = int(s)
    except ValueError:
        raise ConfigError(f"levels: cannot parse '{text}' (use N or A..B)") from None
    if lo < 1 or hi < lo:
        raise ConfigError(f"levels: need 1 <= first <= last, got {text}")
    return lo, hi


_CONFIG_KEYS = {
    "omega", "mu", "radius", "levels", "problem", "nonlinearity",
    "quad_degree_vol", "quad_degree_edge", "error_quad_degree",
    "cg_tol", "newton_increment_tol", "newton_residual_tol", "newton_max_iter",
    "out", "plot",
}


def read_config_file(path: str) -> dict:
    """Flat 'key = value' file; '#' starts a comment; flags override these."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        values[key] = value
    return values


def _merged(args, key: str, cast, default):
    """Flag value if given, else config-file value, else default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    cfg = getattr(args, "_file_config", {})
    if key in cfg:
        return cast(cfg[key])
    return default


def _study_config(args) -> bm.StudyConfig:
    omega = _merged(args, "omega", parse_angle, None)
    if omega is None:
        raise ConfigError("omega: required (e.g. --omega 1.5pi)")
    config = bm.StudyConfig(
        omega=omega,
        mu=_merged(args, "mu", float, 1.0),
        radius=_merged(args, "radius", float, 1.0),
        levels=_merged(args, "levels", parse_levels, (3, 6)),
        problem=_merged(args, "problem", str, "linear"),
        nonlinearity=_merged(args, "nonlinearity", str, "cubic"),
        quad_degree_vol=_merged(args, "quad_degree_vol", int, 5),
        quad_degree_edge=_merged(args, "quad_degree_edge", int, 5),
        error_quad_degree=_merged(args, "error_quad_degree", int, 7),
        cg_tol=_merged(args, "cg_tol", float, 1e-12),
        newton_increment_tol=_merged(args, "newton_increment_tol", float, 1e-11),
        newton_residual_tol=_merged(args, "newton_residual_tol", float, 1e-10),
        newton_max_iter=_merged(args, "newton_max_iter", int, 50),
    )
    config.validate()
    return config


def _build_mesh(config: bm.StudyConfig, level: int):
    mesh = coarse_triangulation(build_sector_domain(config.omega))
    for _ in range(level):
        mesh = uniform_refine(mesh)
    spec = GradingSpec(corner=np.zeros(2), radius=config.radius, mu=config.mu)
    return apply_grading(mesh, spec), spec


# ---------------------------------------------------------------------------
# subcommands

def cmd_mesh(args) -> int:
    config = _study_config(args)
    lo, hi = config.levels
    mesh, spec = _build_mesh(config, hi)
    audit = audit_grading(mesh, spec)
    out = _merged(args, "out", str, None)
    if out:
        with open(out, "w", encoding="ascii") as f:
            write_mesh(mesh, f)
        stats_stream = sys.stdout
    else:
        write_mesh(mesh, sys.stdout)
        stats_stream = sys.stdout
    stats = [
        f"# nodes {mesh.num_nodes}",
        f"# triangles {mesh.num_triangles}",
        f"# h_global {mesh.h_global:.17g}",
        f"# min_angle_deg {min_angle_deg(mesh):.6g}",
        f"# audit_lower_ratio {audit.worst_lower_ratio:.6g}",
        f"# audit_upper_ratio {audit.worst_upper_ratio:.6g}",
        f"# audit_satisfied {str(audit.satisfied).lower()}",
    ]
    print("\n".join(stats), file=stats_stream)
    plot = _merged(args, "plot", str, None)
    if plot:
        from .plots import plot_mesh
        plot_mesh(mesh, plot, title=f"omega={config.omega:.6g} mu={config.mu:.6g} "
                                    f"level={hi}")
    return EXIT_OK


def cmd_check_grading(args) -> int:
    mesh = load_mesh(args.mesh_file)
    corner = np.array([float(c) for c in args.corner.split(",")]) \
        if args.corner else np.zeros(2)
    spec = GradingSpec(corner=corner, radius=args.radius, mu=args.mu)
    h = compute_h_global(mesh, [spec])
    mesh = type(mesh)(
        nodes=mesh.nodes, triangles=mesh.triangles,
        boundary_edges=mesh.boundary_edges, boundary_normals=mesh.boundary_normals,
        boundary_tags=mesh.boundary_tags, level=mesh.level, h_global=h,
    )
    report = audit_grading(mesh, spec, args.c1, args.c2)
    print(f"h_global: {h:.17g}")
    print(report.summary())
    return EXIT_OK if report.satisfied else EXIT_AUDIT_FAIL


def cmd_solve(args) -> int:
    config = _study_config(args)
    lo, hi = config.levels
    mesh, _ = _build_mesh(config, hi)
    opts = config.solver_options()
    bench = bm.make_benchmark(config.omega)

    newton_report = None
    if args.patch_test:
        prob = LinearProblem(f=lambda p: np.ones(len(p)),
                             g=lambda p, n: np.zeros(len(p)))
        y, cg_report = solve_linear(mesh, prob, opts)
        solver_line = f"cg_iterations {cg_report.iterations}"
        exact = None
    elif config.problem == "semilinear":
        d, d_prime = bm.NONLINEARITIES[config.nonlinearity]
        from .solver import SemilinearProblem

        def f_semi(p):
            yv = bench.exact(p)
            return yv + d(yv)

        prob = SemilinearProblem(f=f_semi, g=bench.g, d=d, d_prime=d_prime)
        y, newton_report = solve_semilinear(mesh, prob, opts)
        solver_line = (f"newton_iterations {newton_report.iterations} "
                       f"final_increment {newton_report.final_increment_max:.6g}")
        exact = bench.exact
    else:
        prob = LinearProblem(f=bench.f_lin, g=bench.g)
        y, cg_report = solve_linear(mesh, prob, opts)
        solver_line = f"cg_iterations {cg_report.iterations}"
        exact = bench.exact

    out = _merged(args, "out", str, None)
    if out:
        with open(out, "w", encoding="ascii") as f:
            for i, v in enumerate(y):
                f.write(f"{i} {v:.17g}\n")
    else:
        for i, v in enumerate(y):
            sys.stdout.write(f"{i} {v:.17g}\n")
    print(f"# nodes {mesh.num_nodes}")
    print(f"# h_global {mesh.h_global:.17g}")
    print(f"# {solver_line}")
    if exact is not None:
        rule = bm.triangle_rule(config.error_quad_degree)
        print(f"# err_linf_discrete {bm.error_linf_discrete(mesh, y, exact):.6e}")
        print(f"# err_l2 {bm.error_l2(mesh, y, exact, rule):.6e}")
    return EXIT_OK


def cmd_study(args) -> int:
    config = _study_config(args)
    report = bm.run_convergence_study(config)
    out = _merged(args, "out", str, None)
    if out:
        with open(out, "w", encoding="ascii", newline="\n") as f:
            report.write_csv(f)
    else:
        report.write_csv(sys.stdout)
    plot = _merged(args, "plot", str, None)
    if plot is None and out and not args.no_plot:
        plot = str(Path(out).with_suffix(".png"))
    if plot:
        from .plots import plot_convergence
        plot_convergence(report, plot)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file; flags win")
    p.add_argument("--omega", type=parse_angle,
                   help="opening angle, radians or '<x>pi'")
    p.add_argument("--mu", type=float, help="grading parameter in (0, 1]")
    p.add_argument("--radius", type=float, help="grading radius R")
    p.add_argument("--levels", type=parse_levels,
                   help="refinement level or range A..B")
    p.add_argument("--problem", choices=["linear", "semilinear"])
    p.add_argument("--nonlinearity", help="built-in nonlinearity name (cubic)")
    p.add_argument("--quad-degree-vol", dest="quad_degree_vol", type=int)
    p.add_argument("--quad-degree-edge", dest="quad_degree_edge", type=int)
    p.add_argument("--error-quad-degree", dest="error_quad_degree", type=int)
    p.add_argument("--cg-tol", dest="cg_tol", type=float)
    p.add_argument("--newton-max-iter", dest="newton_max_iter", type=int)
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradedfem",
        description="P1 FEM on corner-graded sector meshes: mesh generation, "
                    "Neumann solves and max-norm convergence studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_mesh = sub.add_parser("mesh", help="generate a graded mesh")
    _add_common(p_mesh)
    p_mesh.add_argument("--plot", help="also render the mesh to this image file")
    p_mesh.set_defaults(func=cmd_mesh)

    p_chk = sub.add_parser("check-grading", help="audit a mesh file against "
                                                 "the graded-size condition")
    p_chk.add_argument("mesh_file")
    p_chk.add_argument("--corner", help="corner as 'x,y' (default origin)")
    p_chk.add_argument("--radius", type=float, default=1.0)
    p_chk.add_argument("--mu", type=float, required=True)
    p_chk.add_argument("--c1", type=float, default=DEFAULT_AUDIT_C1)
    p_chk.add_argument("--c2", type=float, default=DEFAULT_AUDIT_C2)
    p_chk.set_defaults(func=cmd_check_grading)

    p_solve = sub.add_parser("solve", help="solve the benchmark on one mesh")
    _add_common(p_solve)
    p_solve.add_argument("--patch-test", action="store_true",
                         help="override data with f=1, g=0 (solution is 1)")
    p_solve.set_defaults(func=cmd_solve)

    p_study = sub.add_parser("study", help="run a convergence study (CSV report)")
    _add_common(p_study)
    p_study.add_argument("--plot", help="figure path (default: CSV path with .png)")
    p_study.add_argument("--no-plot", action="store_true",
                         help="do not render a figure next to --out")
    p_study.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags, which matches our config-error code
        return int(exc.code) if exc.code else 0
    try:
        args._file_config = read_config_file(args.config) \
            if getattr(args, "config", None) else {}
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _SOLVER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except GradedFemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
