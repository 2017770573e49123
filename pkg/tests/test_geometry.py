import io
import math

import numpy as np
import pytest

from gradedfem import (
    GradingSpec,
    apply_grading,
    audit_grading,
    build_sector_domain,
    coarse_triangulation,
    compute_h_global,
    read_mesh,
    uniform_refine,
    validate_grading_specs,
    validate_mesh,
    write_mesh,
)
from gradedfem.exceptions import (
    DomainParameterError,
    GradingError,
    MeshFormatError,
    TriangulationError,
)
from gradedfem.geometry import (
    point_triangle_distances,
    signed_areas,
    triangle_diameters,
)


def ray_square_hit(angle):
    # independent oracle: scale the unit direction onto the square boundary
    d = np.array([math.cos(angle), math.sin(angle)])
    return d / max(abs(d[0]), abs(d[1]))


def lshape_mesh(levels=0, mu=None, radius=1.0):
    mesh = coarse_triangulation(build_sector_domain(1.5 * np.pi))
    for _ in range(levels):
        mesh = uniform_refine(mesh)
    if mu is not None:
        mesh = apply_grading(mesh, GradingSpec(np.zeros(2), radius, mu))
    return mesh


class TestSectorDomain:
    def test_quarter_circle_is_unit_square(self):
        d = build_sector_domain(np.pi / 2)
        assert d.polygon.tolist() == [[0, 0], [1, 0], [1, 1], [0, 1]]

    def test_three_half_pi_is_lshape_hexagon(self):
        d = build_sector_domain(1.5 * np.pi)
        assert d.polygon.tolist() == [[0, 0], [1, 0], [1, 1], [-1, 1],
                                      [-1, -1], [0, -1]]

    def test_three_quarter_pi_polygon(self):
        # the ray at 3*pi/4 exits the square exactly at the corner (-1, 1)
        hit = ray_square_hit(0.75 * np.pi)
        assert np.allclose(hit, [-1.0, 1.0], atol=1e-12)
        d = build_sector_domain(0.75 * np.pi)
        assert d.polygon.tolist() == [[0, 0], [1, 0], [1, 1], [-1, 1]]

    def test_generic_angle_matches_ray_oracle(self):
        omega = 1.9 * np.pi
        d = build_sector_domain(omega)
        assert np.allclose(d.polygon[-1], ray_square_hit(omega), atol=1e-12)
        assert d.area() > 0

    @pytest.mark.parametrize("omega", [0.0, -1.0, 2 * np.pi, 7.0])
    def test_invalid_angle_rejected(self, omega):
        with pytest.raises(DomainParameterError):
            build_sector_domain(omega)

    def test_interior_angle_at_origin(self):
        for omega in (0.3, np.pi / 2, 0.75 * np.pi, 1.5 * np.pi, 1.9 * np.pi):
            d = build_sector_domain(omega)
            first = d.polygon[1]
            last = d.polygon[-1]
            ang = (math.atan2(last[1], last[0])
                   - math.atan2(first[1], first[0])) % (2 * np.pi)
            assert abs(ang - omega) < 1e-12


class TestCoarseTriangulation:
    def test_unit_square_two_triangles(self):
        mesh = coarse_triangulation(build_sector_domain(np.pi / 2))
        assert mesh.num_triangles == 2
        assert mesh.num_nodes == 4

    def test_lshape_six_triangles(self):
        mesh = lshape_mesh()
        assert mesh.num_triangles == 6
        assert mesh.num_nodes == 8
        validate_mesh(mesh)

    def test_three_quarter_pi_three_triangles(self):
        mesh = coarse_triangulation(build_sector_domain(0.75 * np.pi))
        # Euler-count oracle: no interior nodes, so m = n_boundary - 2
        boundary_nodes = np.unique(mesh.boundary_edges)
        assert len(boundary_nodes) == mesh.num_nodes
        assert mesh.num_triangles == mesh.num_nodes - 2 == 3

    @pytest.mark.parametrize("omega", [0.2, np.pi / 4, 1.1, np.pi,
                                       1.25 * np.pi, 1.75 * np.pi, 1.95 * np.pi])
    def test_arbitrary_angles_conforming(self, omega):
        mesh = coarse_triangulation(build_sector_domain(omega))
        validate_mesh(mesh)
        # total mesh area equals the polygon area
        assert np.isclose(signed_areas(mesh.nodes, mesh.triangles).sum(),
                          build_sector_domain(omega).area(), atol=1e-12)

    def test_origin_is_a_node(self):
        for omega in (0.5, 0.75 * np.pi, 1.5 * np.pi):
            mesh = coarse_triangulation(build_sector_domain(omega))
            assert np.min(np.linalg.norm(mesh.nodes, axis=1)) == 0.0


class TestUniformRefine:
    def test_square_refinement_counts(self):
        mesh = uniform_refine(coarse_triangulation(build_sector_domain(np.pi / 2)))
        assert mesh.num_triangles == 8
        assert mesh.num_nodes == 9

    def test_diameter_halves_exactly(self):
        mesh = lshape_mesh()
        refined = uniform_refine(mesh)
        d0 = triangle_diameters(mesh.nodes, mesh.triangles)
        d1 = triangle_diameters(refined.nodes, refined.triangles)
        assert refined.h_global == mesh.h_global / 2
        assert np.max(d1) == np.max(d0) / 2

    def test_lshape_two_refinements_96_triangles(self):
        mesh = lshape_mesh(levels=2)
        assert mesh.num_triangles == 96
        validate_mesh(mesh)

    def test_area_preserved_and_boundary_on_polygon(self):
        domain = build_sector_domain(1.5 * np.pi)
        mesh = lshape_mesh(levels=3)
        total = signed_areas(mesh.nodes, mesh.triangles).sum()
        assert abs(total - domain.area()) < 1e-12
        bnodes = mesh.nodes[np.unique(mesh.boundary_edges)]
        # every boundary node on some polygon side
        ok = np.zeros(len(bnodes), dtype=bool)
        for a, b in domain.sides():
            e = b - a
            t = np.clip((bnodes - a) @ e / (e @ e), 0.0, 1.0)
            ok |= np.linalg.norm(bnodes - (a + t[:, None] * e), axis=1) < 1e-12
        assert ok.all()

    def test_level_counter(self):
        mesh = lshape_mesh(levels=3)
        assert mesh.level == 3


class TestGrading:
    def test_mu_one_is_identity(self):
        mesh = lshape_mesh(levels=2)
        graded = apply_grading(mesh, GradingSpec(np.zeros(2), 1.0, 1.0))
        assert np.array_equal(graded.nodes, mesh.nodes)

    def test_node_at_radius_unmoved(self):
        mesh = lshape_mesh(levels=2)
        graded = apply_grading(mesh, GradingSpec(np.zeros(2), 1.0, 0.5))
        r = np.linalg.norm(mesh.nodes, axis=1)
        at_radius = np.isclose(r, 1.0)
        assert at_radius.any()
        assert np.array_equal(graded.nodes[at_radius], mesh.nodes[at_radius])

    def test_half_radius_node_mapping(self):
        # mu = 0.5 sends r = R/2 to R/4 with the angle preserved
        mesh = lshape_mesh(levels=2)
        graded = apply_grading(mesh, GradingSpec(np.zeros(2), 1.0, 0.5))
        r = np.linalg.norm(mesh.nodes, axis=1)
        half = np.isclose(r, 0.5)
        assert half.any()
        r_new = np.linalg.norm(graded.nodes[half], axis=1)
        assert np.allclose(r_new, 0.25, atol=1e-14)

    def test_angles_preserved(self):
        mesh = lshape_mesh(levels=3)
        graded = apply_grading(mesh, GradingSpec(np.zeros(2), 1.0, 0.3))
        r = np.linalg.norm(mesh.nodes, axis=1)
        moved = (r > 0) & (r < 1.0)
        phi_old = np.arctan2(mesh.nodes[moved, 1], mesh.nodes[moved, 0])
        phi_new = np.arctan2(graded.nodes[moved, 1], graded.nodes[moved, 0])
        assert np.max(np.abs(phi_new - phi_old)) < 1e-12

    def test_radial_monotonicity(self):
        # r1 < r2 implies mapped radii keep that order
        rng = np.random.default_rng(7)
        radii = np.sort(rng.uniform(1e-6, 0.999, size=50))
        for mu in (0.3, 0.6, 0.9):
            mapped = 1.0 * (radii / 1.0) ** (1.0 / mu)
            assert np.all(np.diff(mapped) > 0)

    def test_h_global_unchanged(self):
        mesh = lshape_mesh(levels=4)
        graded = apply_grading(mesh, GradingSpec(np.zeros(2), 1.0, 0.3))
        assert graded.h_global == mesh.h_global

    def test_missing_corner_node_rejected(self):
        mesh = lshape_mesh(levels=1)
        with pytest.raises(GradingError):
            apply_grading(mesh, GradingSpec(np.array([0.123, 0.456]), 0.2, 0.5))

    def test_validator_after_grading(self):
        for mu in (0.3, 0.6, 1.0):
            validate_mesh(lshape_mesh(levels=3, mu=mu))


class TestAuditGrading:
    def test_quasi_uniform_passes_tight_constants(self):
        for omega in (np.pi / 2, 0.75 * np.pi, 1.5 * np.pi):
            mesh = coarse_triangulation(build_sector_domain(omega))
            for _ in range(3):
                mesh = uniform_refine(mesh)
            rep = audit_grading(mesh, GradingSpec(np.zeros(2), 1.0, 1.0), 0.25, 4.0)
            assert rep.satisfied, rep.summary()

    def test_graded_lshape_extremal_ratios(self):
        # achieved extrema recorded from the auditor itself (deterministic);
        # ring-1 elements reach ~9.71 at mu = 0.3, which is why the default
        # constants are (1/16, 16) rather than (1/8, 8)
        mesh = lshape_mesh(levels=4, mu=0.3)
        spec = GradingSpec(np.zeros(2), 1.0, 0.3)
        rep = audit_grading(mesh, spec)
        assert rep.satisfied, rep.summary()
        assert rep.worst_lower_ratio == pytest.approx(1.0, rel=1e-9)
        assert rep.worst_upper_ratio == pytest.approx(9.710658670099326, rel=1e-9)
        assert rep.corner_lower_ratio == pytest.approx(1.0, rel=1e-9)
        assert rep.corner_upper_ratio == pytest.approx(1.0, rel=1e-9)
        tight = audit_grading(mesh, spec, 1 / 8, 8.0)
        assert not tight.satisfied

    def test_benchmark_configurations_pass_defaults(self):
        for omega in (0.75 * np.pi, 1.5 * np.pi):
            for mu in (0.3, 0.6, 1.0):
                mesh = coarse_triangulation(build_sector_domain(omega))
                for _ in range(4):
                    mesh = uniform_refine(mesh)
                spec = GradingSpec(np.zeros(2), 1.0, mu)
                mesh = apply_grading(mesh, spec)
                rep = audit_grading(mesh, spec)
                assert rep.satisfied, (omega, mu, rep.summary())

    def test_manually_scaled_corner_element_flagged(self):
        mesh = lshape_mesh(levels=3, mu=0.3)
        # blow up one corner-adjacent node radially by 100
        nodes = mesh.nodes.copy()
        nodes.setflags(write=True)
        r = np.linalg.norm(nodes, axis=1)
        positive = r > 0
        target = int(np.arange(len(nodes))[positive][np.argmin(r[positive])])
        nodes[target] *= 100.0
        broken = type(mesh)(
            nodes=nodes, triangles=mesh.triangles.copy(),
            boundary_edges=mesh.boundary_edges.copy(),
            boundary_normals=mesh.boundary_normals.copy(),
            boundary_tags=mesh.boundary_tags.copy(),
            level=mesh.level, h_global=mesh.h_global)
        rep = audit_grading(broken, GradingSpec(np.zeros(2), 1.0, 0.3))
        assert not rep.satisfied
        assert len(rep.offending_elements) >= 1

    def test_constant_order_validated(self):
        mesh = lshape_mesh(levels=1)
        with pytest.raises(ValueError):
            audit_grading(mesh, GradingSpec(np.zeros(2), 1.0, 0.5), 8.0, 0.125)

    def test_overlapping_grading_balls_rejected(self):
        specs = [GradingSpec(np.zeros(2), 1.0, 0.5),
                 GradingSpec(np.array([1.5, 0.0]), 1.0, 0.5)]
        with pytest.raises(DomainParameterError):
            validate_grading_specs(specs)
        validate_grading_specs([GradingSpec(np.zeros(2), 0.5, 0.5),
                                GradingSpec(np.array([1.5, 0.0]), 0.5, 0.5)])

    def test_spec_parameter_validation(self):
        with pytest.raises(DomainParameterError):
            GradingSpec(np.zeros(2), 1.0, 0.0)
        with pytest.raises(DomainParameterError):
            GradingSpec(np.zeros(2), -1.0, 0.5)


class TestHGlobal:
    def test_ungraded_is_max_diameter(self):
        mesh = lshape_mesh(levels=2)
        d = triangle_diameters(mesh.nodes, mesh.triangles)
        assert compute_h_global(mesh, []) == np.max(d)

    def test_grading_leaves_far_field(self):
        mesh = lshape_mesh(levels=3)
        spec = GradingSpec(np.zeros(2), 1.0, 0.3)
        graded = apply_grading(mesh, spec)
        assert compute_h_global(graded, [spec]) == compute_h_global(mesh, [spec])

    def test_unit_square_six_refinements(self):
        mesh = coarse_triangulation(build_sector_domain(np.pi / 2))
        for _ in range(6):
            mesh = uniform_refine(mesh)
        # sqrt(2)/64 = 0.022097...: the tabulated mesh-size magnitude
        assert mesh.h_global == pytest.approx(math.sqrt(2) / 64, rel=1e-15)
        assert f"{mesh.h_global:.6f}" == "0.022097"

    def test_everything_inside_ball_falls_back(self):
        mesh = lshape_mesh(levels=1)
        h = compute_h_global(mesh, [GradingSpec(np.zeros(2), 10.0, 0.5)])
        assert h == np.max(triangle_diameters(mesh.nodes, mesh.triangles))


class TestPointTriangleDistance:
    def test_inside_and_vertex_cases(self):
        nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 2.0],
                          [3.0, 2.0], [2.0, 3.0]])
        tris = np.array([[0, 1, 2], [3, 4, 5]])
        d = point_triangle_distances(np.array([0.25, 0.25]), nodes, tris)
        assert d[0] == 0.0
        assert d[1] == pytest.approx(np.linalg.norm([1.75, 1.75]))

    def test_edge_projection(self):
        nodes = np.array([[1.0, -1.0], [1.0, 1.0], [2.0, 0.0]])
        tris = np.array([[0, 1, 2]])
        d = point_triangle_distances(np.zeros(2), nodes, tris)
        assert d[0] == pytest.approx(1.0)


class TestMeshIO:
    def test_roundtrip_bit_exact(self):
        mesh = lshape_mesh(levels=3, mu=0.3)
        buf = io.StringIO()
        write_mesh(mesh, buf)
        buf.seek(0)
        back = read_mesh(buf)
        assert np.array_equal(back.nodes, mesh.nodes)
        assert np.array_equal(back.triangles, mesh.triangles)
        assert np.array_equal(back.boundary_edges, mesh.boundary_edges)
        assert np.array_equal(back.boundary_tags, mesh.boundary_tags)
        assert np.array_equal(back.boundary_normals, mesh.boundary_normals)

    def test_comments_and_blank_lines_ignored(self):
        mesh = lshape_mesh()
        buf = io.StringIO()
        write_mesh(mesh, buf)
        text = "# header comment\n\n" + buf.getvalue() + "# trailing stats\n"
        back = read_mesh(io.StringIO(text))
        assert back.num_nodes == mesh.num_nodes

    def test_truncated_file_reports_line(self):
        mesh = lshape_mesh()
        buf = io.StringIO()
        write_mesh(mesh, buf)
        lines = buf.getvalue().splitlines()[:5]
        with pytest.raises(MeshFormatError):
            read_mesh(io.StringIO("\n".join(lines)))

    def test_bad_header(self):
        with pytest.raises(MeshFormatError) as err:
            read_mesh(io.StringIO("VERTICES 3\n"))
        assert err.value.line == 1


class TestValidator:
    def test_rejects_flipped_triangle(self):
        mesh = lshape_mesh()
        tris = mesh.triangles.copy()
        tris.setflags(write=True)
        tris[0] = tris[0][::-1]
        broken = type(mesh)(
            nodes=mesh.nodes, triangles=tris,
            boundary_edges=mesh.boundary_edges,
            boundary_normals=mesh.boundary_normals,
            boundary_tags=mesh.boundary_tags,
            level=mesh.level, h_global=mesh.h_global)
        with pytest.raises(TriangulationError):
            validate_mesh(broken)

    def test_rejects_wrong_boundary(self):
        mesh = lshape_mesh()
        bedges = mesh.boundary_edges.copy()
        bedges.setflags(write=True)
        bedges = bedges[:-1]
        broken = type(mesh)(
            nodes=mesh.nodes, triangles=mesh.triangles,
            boundary_edges=bedges,
            boundary_normals=mesh.boundary_normals[:-1],
            boundary_tags=mesh.boundary_tags[:-1],
            level=mesh.level, h_global=mesh.h_global)
        with pytest.raises(TriangulationError):
            validate_mesh(broken)
