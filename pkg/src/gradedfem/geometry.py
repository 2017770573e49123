"""Sector domains, coarse triangulations, uniform refinement and corner grading.

The computational domains are the intersection of the square (-1,1)^2 with an
angular sector 0 < phi < omega around the origin.  Meshes are plain index
arrays; every operation returns a new mesh and never mutates its input, so
meshes can be shared freely between concurrent solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DomainParameterError,
    GradingError,
    MeshFormatError,
    TriangulationError,
)

# Audit constants tolerant of the coarse-mesh geometry: the grading transform
# produces ring-1 elements with size ratio up to ~9.8 at mu = 0.3.
DEFAULT_AUDIT_C1 = 1.0 / 16.0
DEFAULT_AUDIT_C2 = 16.0

_SQUARE_CORNERS = np.array([(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)])
_CORNER_ANGLES = np.array([0.25, 0.75, 1.25, 1.75]) * np.pi
_AXIS_POINTS = np.array([(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)])


@dataclass(frozen=True)
class SectorDomain:
    """Polygonal sector: the square (-1,1)^2 cut to opening angle omega."""

    omega: float
    polygon: np.ndarray  # (k, 2), counter-clockwise, polygon[corner_index] = origin
    corner_index: int = 0

    @property
    def num_vertices(self) -> int:
        return len(self.polygon)

    def sides(self) -> np.ndarray:
        """Side s runs from polygon[s] to polygon[s+1] (cyclically)."""
        return np.stack([self.polygon, np.roll(self.polygon, -1, axis=0)], axis=1)

    def area(self) -> float:
        x, y = self.polygon[:, 0], self.polygon[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True)
class TriangleMesh:
    """Conforming triangulation with oriented, tagged boundary edges.

    boundary_edges are directed so the domain lies on the left; the outward
    unit normal of edge (a, b) is then the right-rotated edge direction.
    h_global is the mesh parameter of the ungraded (far-field) region and is
    deliberately left untouched by apply_grading.
    """

    nodes: np.ndarray            # (n, 2) float
    triangles: np.ndarray        # (m, 3) int, counter-clockwise
    boundary_edges: np.ndarray   # (k, 2) int, domain on the left
    boundary_normals: np.ndarray  # (k, 2) float, outward unit normals
    boundary_tags: np.ndarray    # (k,) int, polygon side index
    level: int = 0
    h_global: float = 0.0

    def __post_init__(self):
        for arr in (self.nodes, self.triangles, self.boundary_edges,
                    self.boundary_normals, self.boundary_tags):
            arr.setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)


@dataclass(frozen=True)
class GradingSpec:
    """Corner grading: nodes with |x - corner| < radius are pulled toward it."""

    corner: np.ndarray
    radius: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "corner", np.asarray(self.corner, dtype=float))
        if not 0.0 < self.mu <= 1.0:
            raise DomainParameterError(f"grading parameter mu must be in (0, 1], got {self.mu}")
        if self.radius <= 0.0:
            raise DomainParameterError(f"grading radius must be positive, got {self.radius}")


@dataclass
class GradingAuditReport:
    """Result of checking the graded-mesh size condition element by element."""

    satisfied: bool
    worst_lower_ratio: float
    worst_upper_ratio: float
    corner_lower_ratio: float
    corner_upper_ratio: float
    offending_elements: list = field(default_factory=list)

    def summary(self) -> str:
        lines = [
            f"satisfied: {self.satisfied}",
            f"worst_lower_ratio: {self.worst_lower_ratio:.6g}",
            f"worst_upper_ratio: {self.worst_upper_ratio:.6g}",
            f"corner_lower_ratio: {self.corner_lower_ratio:.6g}",
            f"corner_upper_ratio: {self.corner_upper_ratio:.6g}",
            f"offending_elements: {len(self.offending_elements)}",
        ]
        if self.offending_elements:
            head = ", ".join(str(i) for i in self.offending_elements[:10])
            more = "" if len(self.offending_elements) <= 10 else ", ..."
            lines.append(f"offenders: {head}{more}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# elementary mesh quantities

def signed_areas(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = nodes[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def triangle_diameters(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = nodes[triangles]
    e0 = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    e1 = np.linalg.norm(p[:, 2] - p[:, 1], axis=1)
    e2 = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
    return np.maximum(e0, np.maximum(e1, e2))


def min_angle_deg(mesh: TriangleMesh) -> float:
    p = mesh.nodes[mesh.triangles]
    angles = []
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        v = p[:, (i + 2) % 3] - p[:, i]
        cosang = np.einsum("ij,ij->i", u, v) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
    return float(np.min(angles))


def point_triangle_distances(point: np.ndarray, nodes: np.ndarray,
                             triangles: np.ndarray) -> np.ndarray:
    """Exact distance from a point to each (closed) triangle."""
    p = nodes[triangles]  # (m, 3, 2)
    inside = np.ones(len(triangles), dtype=bool)
    dmin = np.full(len(triangles), np.inf)
    for i in range(3):
        a = p[:, i]
        b = p[:, (i + 1) % 3]
        e = b - a
        w = point[None, :] - a
        # CCW triangles: the interior is on the left of every directed edge.
        cross = e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0]
        inside &= cross >= 0.0
        ee = np.einsum("ij,ij->i", e, e)
        t = np.clip(np.einsum("ij,ij->i", w, e) / np.where(ee > 0, ee, 1.0), 0.0, 1.0)
        proj = a + t[:, None] * e
        dmin = np.minimum(dmin, np.linalg.norm(point[None, :] - proj, axis=1))
    return np.where(inside, 0.0, dmin)


# ---------------------------------------------------------------------------
# domain construction

def _ray_square_intersection(angle: float) -> np.ndarray:
    """First intersection of the ray at `angle` from the origin with the square."""
    d = np.array([math.cos(angle), math.sin(angle)])
    t = 1.0 / max(abs(d[0]), abs(d[1]))
    p = t * d
    # Snap coordinates polluted by roundoff in cos/sin at multiples of pi/2.
    p[np.abs(p) < 1e-14] = 0.0
    p[np.abs(p - 1.0) < 1e-12] = 1.0
    p[np.abs(p + 1.0) < 1e-12] = -1.0
    return p


def build_sector_domain(omega: float) -> SectorDomain:
    """Polygon of the sector domain, walked counter-clockwise from the origin."""
    if not 0.0 < omega < 2.0 * np.pi:
        raise DomainParameterError(
            f"opening angle omega must lie in (0, 2*pi), got {omega}")
    verts = [np.array([0.0, 0.0]), np.array([1.0, 0.0])]
    for ang, corner in zip(_CORNER_ANGLES, _SQUARE_CORNERS):
        if omega > ang + 1e-12:
            verts.append(corner)
    ray_pt = _ray_square_intersection(omega)
    if np.linalg.norm(ray_pt - verts[-1]) > 1e-12:
        verts.append(ray_pt)
    polygon = np.array(verts)
    polygon.setflags(write=False)
    domain = SectorDomain(omega=omega, polygon=polygon, corner_index=0)
    _validate_domain(domain)
    return domain


def _validate_domain(domain: SectorDomain) -> None:
    poly = domain.polygon
    if domain.area() <= 0.0:
        raise DomainParameterError("sector polygon is not counter-clockwise")
    origin = poly[domain.corner_index]
    if np.linalg.norm(origin) > 1e-14:
        raise DomainParameterError("the singular corner must be the origin")
    # Interior angle at the origin equals omega.
    prev_vec = poly[domain.corner_index - 1] - origin
    next_vec = poly[(domain.corner_index + 1) % len(poly)] - origin
    ang = (math.atan2(prev_vec[1], prev_vec[0])
           - math.atan2(next_vec[1], next_vec[0])) % (2.0 * np.pi)
    if abs(ang - domain.omega) > 1e-12:
        raise DomainParameterError(
            f"interior angle at the origin is {ang}, expected {domain.omega}")
    others = np.delete(poly, domain.corner_index, axis=0)
    on_square = np.abs(np.max(np.abs(others), axis=1) - 1.0) < 1e-12
    if not np.all(on_square):
        raise DomainParameterError("a non-origin vertex is not on the square boundary")


# ---------------------------------------------------------------------------
# coarse triangulation and refinement

def _full_quadrants(omega: float) -> int:
    k = int(math.floor(omega / (0.5 * np.pi) + 1e-9))
    return min(k, 3)


def coarse_triangulation(domain: SectorDomain) -> TriangleMesh:
    """Initial mesh: full quadrant squares split by their origin diagonals,
    plus a fan over the remaining angular wedge."""
    omega = domain.omega
    nquad = _full_quadrants(omega)
    node_index: dict[tuple, int] = {}
    nodes: list[np.ndarray] = []

    def add_node(p) -> int:
        key = (float(p[0]), float(p[1]))
        if key not in node_index:
            node_index[key] = len(nodes)
            nodes.append(np.asarray(p, dtype=float))
        return node_index[key]

    origin = add_node((0.0, 0.0))
    tris: list[list[int]] = []
    for q in range(nquad):
        a = add_node(_AXIS_POINTS[q])
        c = add_node(_SQUARE_CORNERS[q])
        b = add_node(_AXIS_POINTS[(q + 1) % 4])
        tris.append([origin, a, c])
        tris.append([origin, c, b])

    if omega > nquad * 0.5 * np.pi + 1e-9:
        chain = [np.asarray(_AXIS_POINTS[nquad])]
        corner_ang = _CORNER_ANGLES[nquad]
        if omega > corner_ang + 1e-12:
            chain.append(np.asarray(_SQUARE_CORNERS[nquad]))
        ray_pt = domain.polygon[-1]
        if np.linalg.norm(ray_pt - chain[-1]) > 1e-12:
            chain.append(np.asarray(ray_pt))
        idx = [add_node(p) for p in chain]
        for a, b in zip(idx[:-1], idx[1:]):
            tris.append([origin, a, b])

    node_arr = np.array(nodes)
    tri_arr = np.array(tris, dtype=np.int64)
    if np.any(signed_areas(node_arr, tri_arr) <= 0.0):
        raise TriangulationError("degenerate sector polygon: zero-area coarse element")
    bedges = _extract_boundary_edges(tri_arr)
    tags = _tag_boundary_edges(node_arr, bedges, domain)
    mesh = TriangleMesh(
        nodes=node_arr,
        triangles=tri_arr,
        boundary_edges=bedges,
        boundary_normals=_edge_normals(node_arr, bedges),
        boundary_tags=tags,
        level=0,
        h_global=float(np.max(triangle_diameters(node_arr, tri_arr))),
    )
    validate_mesh(mesh)
    return mesh


def _extract_boundary_edges(triangles: np.ndarray) -> np.ndarray:
    """Directed edges used exactly once, in triangle orientation (domain left)."""
    directed = np.concatenate([triangles[:, [0, 1]],
                               triangles[:, [1, 2]],
                               triangles[:, [2, 0]]])
    undirected = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(undirected, axis=0,
                                   return_inverse=True, return_counts=True)
    return directed[counts[inverse] == 1]


def _edge_normals(nodes: np.ndarray, edges: np.ndarray) -> np.ndarray:
    t = nodes[edges[:, 1]] - nodes[edges[:, 0]]
    lengths = np.linalg.norm(t, axis=1)
    if np.any(lengths == 0.0):
        raise TriangulationError("zero-length boundary edge")
    return np.column_stack([t[:, 1], -t[:, 0]]) / lengths[:, None]


def _tag_boundary_edges(nodes: np.ndarray, edges: np.ndarray,
                        domain: SectorDomain) -> np.ndarray:
    mids = 0.5 * (nodes[edges[:, 0]] + nodes[edges[:, 1]])
    tags = np.full(len(edges), -1, dtype=np.int64)
    for s, (a, b) in enumerate(domain.sides()):
        e = b - a
        ee = float(e @ e)
        w = mids - a
        t = np.clip((w @ e) / ee, 0.0, 1.0)
        dist = np.linalg.norm(w - t[:, None] * e, axis=1)
        hit = (dist < 1e-9) & (tags < 0)
        tags[hit] = s
    if np.any(tags < 0):
        raise TriangulationError("boundary edge does not lie on any polygon side")
    return tags


def uniform_refine(mesh: TriangleMesh) -> TriangleMesh:
    """Red refinement: each triangle splits into 4 congruent children."""
    nodes = list(mesh.nodes)
    midpoint: dict[tuple[int, int], int] = {}

    def mid(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        if key not in midpoint:
            midpoint[key] = len(nodes)
            nodes.append(0.5 * (mesh.nodes[a] + mesh.nodes[b]))
        return midpoint[key]

    tris = np.empty((4 * mesh.num_triangles, 3), dtype=np.int64)
    for k, (a, b, c) in enumerate(mesh.triangles):
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        tris[4 * k:4 * k + 4] = [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]

    bedges = np.empty((2 * len(mesh.boundary_edges), 2), dtype=np.int64)
    btags = np.empty(2 * len(mesh.boundary_edges), dtype=np.int64)
    for k, (a, b) in enumerate(mesh.boundary_edges):
        m = mid(int(a), int(b))
        bedges[2 * k] = (a, m)
        bedges[2 * k + 1] = (m, b)
        btags[2 * k] = btags[2 * k + 1] = mesh.boundary_tags[k]

    node_arr = np.array(nodes)
    refined = TriangleMesh(
        nodes=node_arr,
        triangles=tris,
        boundary_edges=bedges,
        boundary_normals=_edge_normals(node_arr, bedges),
        boundary_tags=btags,
        level=mesh.level + 1,
        h_global=float(np.max(triangle_diameters(node_arr, tris))),
    )
    validate_mesh(refined)
    return refined


# ---------------------------------------------------------------------------
# grading

def apply_grading(mesh: TriangleMesh, spec: GradingSpec) -> TriangleMesh:
    """Pull nodes inside the grading ball radially toward the corner.

    A node at distance r < R moves to distance R*(r/R)^(1/mu); connectivity,
    level and h_global are unchanged.  Nodes at r >= R (and the corner) stay.
    """
    corner = spec.corner
    dist_to_node = np.linalg.norm(mesh.nodes - corner, axis=1)
    if dist_to_node.min() > 1e-12:
        raise GradingError("grading corner is not a mesh node")
    rel = mesh.nodes - corner
    r = dist_to_node
    exponent = 1.0 / spec.mu - 1.0
    factor = np.where(r < spec.radius, (r / spec.radius) ** exponent, 1.0)
    new_nodes = corner + rel * factor[:, None]

    areas = signed_areas(new_nodes, mesh.triangles)
    bad = np.nonzero(areas <= 0.0)[0]
    if bad.size:
        raise GradingError(
            f"grading inverted {bad.size} element(s), first index {bad[0]}; "
            "coarse mesh and grading spec are incompatible")
    graded = TriangleMesh(
        nodes=new_nodes,
        triangles=mesh.triangles.copy(),
        boundary_edges=mesh.boundary_edges.copy(),
        boundary_normals=_edge_normals(new_nodes, mesh.boundary_edges),
        boundary_tags=mesh.boundary_tags.copy(),
        level=mesh.level,
        h_global=mesh.h_global,
    )
    validate_mesh(graded)
    return graded


def audit_grading(mesh: TriangleMesh, spec: GradingSpec,
                  c1: float = DEFAULT_AUDIT_C1,
                  c2: float = DEFAULT_AUDIT_C2) -> GradingAuditReport:
    """Check the element-size condition of graded meshes.

    Elements touching the corner must satisfy c1*h^(1/mu) <= h_T <= c2*h^(1/mu),
    elements inside the grading ball c1*h*r_T^(1-mu) <= h_T <= c2*h*r_T^(1-mu),
    far-field elements c1*h <= h_T <= c2*h, with h = mesh.h_global.
    """
    if not (0.0 < c1 <= c2):
        raise ValueError(f"audit constants must satisfy 0 < c1 <= c2, got {c1}, {c2}")
    h = mesh.h_global
    diam = triangle_diameters(mesh.nodes, mesh.triangles)
    r_t = point_triangle_distances(spec.corner, mesh.nodes, mesh.triangles)
    at_corner = r_t <= 1e-13
    in_ball = ~at_corner & (r_t < spec.radius)
    denom = np.where(at_corner, h ** (1.0 / spec.mu),
                     np.where(in_ball, h * r_t ** (1.0 - spec.mu), h))
    ratios = diam / denom
    violating = (ratios < c1) | (ratios > c2)
    corner_ratios = ratios[at_corner]
    return GradingAuditReport(
        satisfied=not bool(np.any(violating)),
        worst_lower_ratio=float(ratios.min()),
        worst_upper_ratio=float(ratios.max()),
        corner_lower_ratio=float(corner_ratios.min()) if corner_ratios.size else float("nan"),
        corner_upper_ratio=float(corner_ratios.max()) if corner_ratios.size else float("nan"),
        offending_elements=np.nonzero(violating)[0].tolist(),
    )


def compute_h_global(mesh: TriangleMesh, specs: list[GradingSpec]) -> float:
    """Max element diameter outside every grading ball (whole mesh if empty)."""
    diam = triangle_diameters(mesh.nodes, mesh.triangles)
    far = np.ones(mesh.num_triangles, dtype=bool)
    for spec in specs:
        r_t = point_triangle_distances(spec.corner, mesh.nodes, mesh.triangles)
        far &= r_t > spec.radius
    if not np.any(far):
        return float(diam.max())
    return float(diam[far].max())


def validate_grading_specs(specs: list[GradingSpec]) -> None:
    """Grading balls of distinct corners must not overlap."""
    for i in range(len(specs)):
        for j in range(i + 1, len(specs)):
            gap = np.linalg.norm(specs[i].corner - specs[j].corner)
            if gap < specs[i].radius + specs[j].radius:
                raise DomainParameterError(
                    f"grading balls {i} and {j} overlap (corner distance {gap})")


# ---------------------------------------------------------------------------
# validation

def validate_mesh(mesh: TriangleMesh) -> None:
    """Conformity, orientation and boundary coverage; raises on violation."""
    if np.any(signed_areas(mesh.nodes, mesh.triangles) <= 0.0):
        raise TriangulationError("triangle with non-positive signed area")
    # duplicate nodes
    order = np.lexsort((mesh.nodes[:, 1], mesh.nodes[:, 0]))
    sorted_nodes = mesh.nodes[order]
    dup = np.all(np.diff(sorted_nodes, axis=0) == 0.0, axis=1)
    if np.any(dup):
        raise TriangulationError("duplicate mesh nodes")
    # every undirected edge in at most two triangles, and in consistent orientation
    directed = np.concatenate([mesh.triangles[:, [0, 1]],
                               mesh.triangles[:, [1, 2]],
                               mesh.triangles[:, [2, 0]]])
    uniq_dir = np.unique(directed, axis=0)
    if len(uniq_dir) != len(directed):
        raise TriangulationError("directed edge repeated: inconsistent orientation")
    undirected = np.sort(directed, axis=1)
    uniq, inverse, counts = np.unique(undirected, axis=0,
                                      return_inverse=True, return_counts=True)
    if np.any(counts > 2):
        raise TriangulationError("edge shared by more than two triangles")
    # count-1 edges must coincide with the stored boundary
    boundary_from_tris = {tuple(e) for e in uniq[counts == 1]}
    boundary_stored = {tuple(e) for e in np.sort(mesh.boundary_edges, axis=1)}
    if boundary_from_tris != boundary_stored:
        raise TriangulationError("stored boundary edges do not match the triangulation")
    # the boundary is a disjoint union of closed loops
    bnodes, bcounts = np.unique(mesh.boundary_edges, return_counts=True)
    if np.any(bcounts != 2):
        raise TriangulationError("boundary is not a union of closed loops")
    if np.any(mesh.boundary_tags < 0):
        raise TriangulationError("untagged boundary edge")
    # hanging nodes: every node on a count-1 edge chain is a boundary-edge endpoint
    used = np.unique(mesh.triangles)
    if used.size != mesh.num_nodes:
        raise TriangulationError("mesh contains nodes not referenced by any triangle")


# ---------------------------------------------------------------------------
# ASCII mesh I/O

def write_mesh(mesh: TriangleMesh, stream) -> None:
    """Three-section ASCII format: NODES / TRIANGLES / BOUNDARY."""
    stream.write(f"NODES {mesh.num_nodes}\n")
    for i, (x, y) in enumerate(mesh.nodes):
        stream.write(f"{i} {x:.17g} {y:.17g}\n")
    stream.write(f"TRIANGLES {mesh.num_triangles}\n")
    for a, b, c in mesh.triangles:
        stream.write(f"{a} {b} {c}\n")
    stream.write(f"BOUNDARY {len(mesh.boundary_edges)}\n")
    for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        stream.write(f"{a} {b} {tag}\n")


def read_mesh(stream) -> TriangleMesh:
    """Parse the ASCII format written by write_mesh; '#' lines are comments."""
    lines = [(k + 1, ln.strip()) for k, ln in enumerate(stream)
             if ln.strip() and not ln.strip().startswith("#")]
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(lines):
            raise MeshFormatError("unexpected end of file",
                                  line=lines[-1][0] if lines else 0)
        item = lines[pos]
        pos += 1
        return item

    def section(name: str) -> int:
        lineno, text = take()
        parts = text.split()
        if len(parts) != 2 or parts[0] != name:
            raise MeshFormatError(f"expected section header '{name} <count>'", line=lineno)
        try:
            return int(parts[1])
        except ValueError:
            raise MeshFormatError(f"bad count in section '{name}'", line=lineno) from None

    n = section("NODES")
    nodes = np.empty((n, 2))
    for _ in range(n):
        lineno, text = take()
        parts = text.split()
        try:
            idx = int(parts[0])
            nodes[idx] = (float(parts[1]), float(parts[2]))
        except (IndexError, ValueError):
            raise MeshFormatError("bad node line (want 'index x y')", line=lineno) from None

    m = section("TRIANGLES")
    tris = np.empty((m, 3), dtype=np.int64)
    for k in range(m):
        lineno, text = take()
        parts = text.split()
        try:
            tris[k] = [int(p) for p in parts[:3]]
        except (IndexError, ValueError):
            raise MeshFormatError("bad triangle line (want three node indices)",
                                  line=lineno) from None
        if len(parts) != 3:
            raise MeshFormatError("bad triangle line (want three node indices)",
                                  line=lineno)

    kb = section("BOUNDARY")
    bedges = np.empty((kb, 2), dtype=np.int64)
    btags = np.empty(kb, dtype=np.int64)
    for k in range(kb):
        lineno, text = take()
        parts = text.split()
        try:
            bedges[k] = (int(parts[0]), int(parts[1]))
            btags[k] = int(parts[2])
        except (IndexError, ValueError):
            raise MeshFormatError("bad boundary line (want 'a b tag')",
                                  line=lineno) from None

    if np.any(tris < 0) or np.any(tris >= n) or np.any(bedges < 0) or np.any(bedges >= n):
        raise MeshFormatError("node index out of range")
    mesh = TriangleMesh(
        nodes=nodes,
        triangles=tris,
        boundary_edges=bedges,
        boundary_normals=_edge_normals(nodes, bedges),
        boundary_tags=btags,
        level=0,
        h_global=float(np.max(triangle_diameters(nodes, tris))),
    )
    validate_mesh(mesh)
    return mesh


def save_mesh(mesh: TriangleMesh, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        write_mesh(mesh, f)


def load_mesh(path) -> TriangleMesh:
    with open(path, "r", encoding="ascii") as f:
        return read_mesh(f)
