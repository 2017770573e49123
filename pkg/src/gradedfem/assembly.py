"""Quadrature rules and P1 assembly of the stiffness-plus-mass system.

The bilinear form is a(y, v) = (grad y, grad v) + (y, v); the load combines a
volume term (f, v) and a Neumann boundary term (g, v) on the boundary.
Element loops are vectorized over all triangles and triplets are merged into
CSR by a stable (row, col) sort, so the assembled matrix is bit-identical
regardless of processing order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .exceptions import DataEvaluationError, ElementError
from .geometry import TriangleMesh, signed_areas
from .linalg import SparseMatrixCSR, csr_from_coo


@dataclass(frozen=True)
class QuadratureRule:
    """Points in barycentric (triangle) or [0,1] (edge) coordinates.

    Weights are positive and sum to the reference measure: 1/2 for the
    reference triangle, 1 for the reference edge.
    """

    points: np.ndarray
    weights: np.ndarray
    exact_degree: int
    kind: str  # "triangle" | "edge"

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)


# degree-5 rule: centroid plus two symmetric orbits
_TRI7_A = 0.059715871789770
_TRI7_B = 0.470142064105115
_TRI7_C = 0.797426985353087
_TRI7_D = 0.101286507323456
_TRI7_WA = 0.132394152788506 / 2.0
_TRI7_WB = 0.125939180544827 / 2.0


def _orbit(a: float, b: float) -> list[tuple[float, float, float]]:
    return [(a, b, b), (b, a, b), (b, b, a)]


def triangle_rule(degree: int) -> QuadratureRule:
    """Symmetric positive rule on the reference triangle, exact to >= degree."""
    if degree < 0:
        raise ValueError(f"quadrature degree must be nonnegative, got {degree}")
    if degree <= 1:
        pts = np.array([(1 / 3, 1 / 3, 1 / 3)])
        return QuadratureRule(pts, np.array([0.5]), 1, "triangle")
    if degree <= 2:
        pts = np.array(_orbit(0.0, 0.5))
        return QuadratureRule(pts, np.full(3, 1 / 6), 2, "triangle")
    if degree <= 5:
        pts = np.array([(1 / 3, 1 / 3, 1 / 3)] + _orbit(_TRI7_A, _TRI7_B)
                       + _orbit(_TRI7_C, _TRI7_D))
        w = np.array([0.1125] + [_TRI7_WA] * 3 + [_TRI7_WB] * 3)
        return QuadratureRule(pts, w, 5, "triangle")
    return _conical_rule(degree)


def _conical_rule(degree: int) -> QuadratureRule:
    """Gauss-Jacobi x Gauss-Legendre conical product: n^2 positive points."""
    n = (degree + 2) // 2
    pj, wj = roots_jacobi(n, 1.0, 0.0)   # weight (1-x) on [-1, 1]
    pl, wl = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (pj + 1.0)                 # radial direction, weight (1-u)
    v = 0.5 * (pl + 1.0)
    x = np.repeat(u, n)
    y = np.tile(v, n) * (1.0 - x)
    w = 0.25 * np.repeat(wj, n) * 0.5 * np.tile(wl, n)
    pts = np.column_stack([1.0 - x - y, x, y])
    return QuadratureRule(pts, w, 2 * n - 1, "triangle")


def edge_rule(degree: int) -> QuadratureRule:
    """Gauss-Legendre rule mapped to [0, 1]."""
    if degree < 0:
        raise ValueError(f"quadrature degree must be nonnegative, got {degree}")
    n = max(1, (degree + 2) // 2)
    p, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(0.5 * (p + 1.0), 0.5 * w, 2 * n - 1, "edge")


# ---------------------------------------------------------------------------
# local element matrices

def local_stiffness_mass(triangle: np.ndarray) -> np.ndarray:
    """K + M for one triangle given as three CCW points; both terms exact."""
    p = np.asarray(triangle, dtype=float)
    d1, d2 = p[1] - p[0], p[2] - p[0]
    area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
    if area <= 0.0:
        raise ElementError(f"triangle with non-positive area {area}")
    return _local_stiffness(p, area) + _local_mass(area)


def _local_stiffness(p: np.ndarray, area: float) -> np.ndarray:
    # grad phi_i = (b_i, c_i) / (2A) with b, c the usual cyclic differences
    b = np.array([p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]])
    c = np.array([p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]])
    return (np.outer(b, b) + np.outer(c, c)) / (4.0 * area)


def _local_mass(area: float) -> np.ndarray:
    return area / 12.0 * (np.ones((3, 3)) + np.eye(3))


def _element_geometry(mesh: TriangleMesh):
    p = mesh.nodes[mesh.triangles]
    areas = signed_areas(mesh.nodes, mesh.triangles)
    if np.any(areas <= 0.0):
        k = int(np.argmax(areas <= 0.0))
        raise ElementError(f"triangle {k} has non-positive area {areas[k]}")
    return p, areas


def _all_local_stiffness(p: np.ndarray, areas: np.ndarray) -> np.ndarray:
    b = np.stack([p[:, 1, 1] - p[:, 2, 1],
                  p[:, 2, 1] - p[:, 0, 1],
                  p[:, 0, 1] - p[:, 1, 1]], axis=1)
    c = np.stack([p[:, 2, 0] - p[:, 1, 0],
                  p[:, 0, 0] - p[:, 2, 0],
                  p[:, 1, 0] - p[:, 0, 0]], axis=1)
    kmat = np.einsum("mi,mj->mij", b, b) + np.einsum("mi,mj->mij", c, c)
    return kmat / (4.0 * areas)[:, None, None]


def _scatter(mesh: TriangleMesh, local: np.ndarray) -> SparseMatrixCSR:
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    return csr_from_coo(mesh.num_nodes, rows, cols, local.ravel())


@dataclass(frozen=True)
class AssembledSystem:
    """System matrix and load of the discrete problem; P1 keeps one degree of
    freedom per node, so dof_map is the identity permutation."""

    matrix: SparseMatrixCSR
    load: np.ndarray
    dof_map: np.ndarray


def assemble_system(mesh: TriangleMesh) -> SparseMatrixCSR:
    """Global matrix of the bilinear form: stiffness plus mass."""
    p, areas = _element_geometry(mesh)
    local = _all_local_stiffness(p, areas)
    local += (areas / 12.0)[:, None, None] * (np.ones((3, 3)) + np.eye(3))
    return _scatter(mesh, local)


def assemble_stiffness(mesh: TriangleMesh) -> SparseMatrixCSR:
    p, areas = _element_geometry(mesh)
    return _scatter(mesh, _all_local_stiffness(p, areas))


def assemble_mass(mesh: TriangleMesh) -> SparseMatrixCSR:
    _, areas = _element_geometry(mesh)
    local = (areas / 12.0)[:, None, None] * (np.ones((3, 3)) + np.eye(3))
    return _scatter(mesh, local)


def assemble_weighted_mass(mesh: TriangleMesh, rule: QuadratureRule,
                           weight_at_qp: np.ndarray) -> SparseMatrixCSR:
    """Mass matrix with a per-quadrature-point weight (shape m x nq)."""
    _, areas = _element_geometry(mesh)
    bary = rule.points  # (nq, 3): also the P1 basis values at the points
    wq = rule.weights
    local = 2.0 * areas[:, None, None] * np.einsum(
        "q,mq,qi,qj->mij", wq, weight_at_qp, bary, bary)
    return _scatter(mesh, local)


# ---------------------------------------------------------------------------
# load vector

def _check_finite(values: np.ndarray, points: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.argmax(bad.ravel()))
        loc = points.reshape(-1, 2)[i]
        raise DataEvaluationError(
            f"{what} evaluated to a non-finite value at ({loc[0]:.6g}, {loc[1]:.6g})")


def _subdivided_rule(rule: QuadratureRule, depth: int) -> QuadratureRule:
    """Composite rule from `depth` dyadic splits of the reference triangle."""
    pts, w = rule.points, rule.weights
    for _ in range(depth):
        verts = np.eye(3)
        mids = {(i, j): 0.5 * (verts[i] + verts[j]) for i in range(3) for j in range(3)}
        children = [
            (verts[0], mids[(0, 1)], mids[(0, 2)]),
            (mids[(0, 1)], verts[1], mids[(1, 2)]),
            (mids[(0, 2)], mids[(1, 2)], verts[2]),
            (mids[(0, 1)], mids[(1, 2)], mids[(0, 2)]),
        ]
        new_pts, new_w = [], []
        for tri in children:
            vmat = np.stack(tri)  # rows: child vertices in parent barycentrics
            new_pts.append(pts @ vmat)
            new_w.append(w / 4.0)
        pts = np.concatenate(new_pts)
        w = np.concatenate(new_w)
    return QuadratureRule(pts, w, rule.exact_degree, "triangle")


def volume_quadrature_points(mesh: TriangleMesh, rule: QuadratureRule) -> np.ndarray:
    """Physical quadrature points, shape (m, nq, 2)."""
    p = mesh.nodes[mesh.triangles]
    return np.einsum("qi,mid->mqd", rule.points, p)


def assemble_load(mesh: TriangleMesh, f, g, vol_rule: QuadratureRule,
                  edge_rule: QuadratureRule, corner_subdiv: int = 0,
                  corners: tuple = ()) -> np.ndarray:
    """Load vector b_i = (f, phi_i) + (g, phi_i)_boundary by quadrature.

    f maps an (n, 2) point array to values; g additionally receives the
    matching outward unit normals.  corner_subdiv > 0 applies that many dyadic
    quadrature splits on elements touching one of `corners` (for rough data).
    """
    _, areas = _element_geometry(mesh)
    b = np.zeros(mesh.num_nodes)

    special = np.zeros(mesh.num_triangles, dtype=bool)
    if corner_subdiv > 0 and len(corners):
        p = mesh.nodes[mesh.triangles]
        for corner in corners:
            c = np.asarray(corner, dtype=float)
            special |= np.any(np.linalg.norm(p - c, axis=2) < 1e-12, axis=1)

    for mask, rule in ((~special, vol_rule),
                       (special, _subdivided_rule(vol_rule, corner_subdiv))):
        if not np.any(mask):
            continue
        tri = mesh.triangles[mask]
        pts = np.einsum("qi,mid->mqd", rule.points, mesh.nodes[tri])
        fvals = np.asarray(f(pts.reshape(-1, 2)), dtype=float).reshape(pts.shape[:2])
        _check_finite(fvals, pts, "volume data f")
        contrib = 2.0 * areas[mask][:, None] * np.einsum(
            "q,mq,qi->mi", rule.weights, fvals, rule.points)
        np.add.at(b, tri, contrib)

    if len(mesh.boundary_edges):
        a_pts = mesh.nodes[mesh.boundary_edges[:, 0]]
        b_pts = mesh.nodes[mesh.boundary_edges[:, 1]]
        lengths = np.linalg.norm(b_pts - a_pts, axis=1)
        t = edge_rule.points  # (nq,)
        pts = a_pts[:, None, :] + t[None, :, None] * (b_pts - a_pts)[:, None, :]
        normals = np.broadcast_to(mesh.boundary_normals[:, None, :], pts.shape)
        gvals = np.asarray(
            g(pts.reshape(-1, 2), normals.reshape(-1, 2)), dtype=float
        ).reshape(pts.shape[:2])
        _check_finite(gvals, pts, "boundary data g")
        shape_fun = np.stack([1.0 - t, t])  # (2, nq)
        contrib = lengths[:, None] * np.einsum(
            "q,kq,iq->ki", edge_rule.weights, gvals, shape_fun)
        np.add.at(b, mesh.boundary_edges, contrib)
    return b


def assemble(mesh: TriangleMesh, f, g, vol_rule: QuadratureRule,
             edge_rule: QuadratureRule, **load_kwargs) -> AssembledSystem:
    """Matrix and load in one bundle."""
    return AssembledSystem(
        matrix=assemble_system(mesh),
        load=assemble_load(mesh, f, g, vol_rule, edge_rule, **load_kwargs),
        dof_map=np.arange(mesh.num_nodes),
    )
