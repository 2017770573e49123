"""P1 finite elements on corner-graded sector triangulations.

Solves linear and semilinear Neumann problems -lap(y) + y (+ d(y)) = f and
reproduces the expected maximum-norm convergence orders on graded meshes.
"""

from .assembly import (
    AssembledSystem,
    QuadratureRule,
    assemble,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    assemble_system,
    assemble_weighted_mass,
    edge_rule,
    local_stiffness_mass,
    triangle_rule,
)
from .benchmark import (
    BenchmarkProblem,
    ConvergenceReport,
    StudyConfig,
    StudyRow,
    build_study_mesh,
    eoc,
    error_h1_semi,
    error_l2,
    error_linf_discrete,
    h1_semi_diff,
    make_benchmark,
    predicted_linf_rate,
    run_convergence_study,
)
from .geometry import (
    GradingAuditReport,
    GradingSpec,
    SectorDomain,
    TriangleMesh,
    apply_grading,
    audit_grading,
    build_sector_domain,
    coarse_triangulation,
    compute_h_global,
    load_mesh,
    read_mesh,
    save_mesh,
    uniform_refine,
    validate_grading_specs,
    validate_mesh,
    write_mesh,
)
from .linalg import CgReport, SparseMatrixCSR, cg_solve, csr_add, csr_from_coo, spmv
from .solver import (
    LinearProblem,
    NewtonReport,
    SemilinearProblem,
    SolverOptions,
    ritz_projection,
    solve_linear,
    solve_semilinear,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem",
    "BenchmarkProblem",
    "CgReport",
    "ConvergenceReport",
    "GradingAuditReport",
    "GradingSpec",
    "LinearProblem",
    "NewtonReport",
    "QuadratureRule",
    "SectorDomain",
    "SemilinearProblem",
    "SolverOptions",
    "SparseMatrixCSR",
    "StudyConfig",
    "StudyRow",
    "TriangleMesh",
    "apply_grading",
    "assemble",
    "assemble_load",
    "assemble_mass",
    "assemble_stiffness",
    "assemble_system",
    "assemble_weighted_mass",
    "audit_grading",
    "build_sector_domain",
    "build_study_mesh",
    "cg_solve",
    "coarse_triangulation",
    "compute_h_global",
    "csr_add",
    "csr_from_coo",
    "edge_rule",
    "eoc",
    "error_h1_semi",
    "error_l2",
    "error_linf_discrete",
    "h1_semi_diff",
    "load_mesh",
    "local_stiffness_mass",
    "make_benchmark",
    "predicted_linf_rate",
    "read_mesh",
    "ritz_projection",
    "run_convergence_study",
    "save_mesh",
    "solve_linear",
    "solve_semilinear",
    "spmv",
    "triangle_rule",
    "uniform_refine",
    "validate_grading_specs",
    "validate_mesh",
    "write_mesh",
]
