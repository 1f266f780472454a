import math

import numpy as np
import pytest

from recad.errors import GeometryError
from recad.model import Arc, Face, Line, Loop, Point2
from recad.planar import (
    MIN_ARC_SEGMENTS,
    point_in_face,
    signed_area,
    solve_arc,
    tessellate_loop,
    triangulate_face,
)

from conftest import circle_loop, semicircle_arc_loop, square_loop


def tri_area_sum(tris):
    return float(
        np.abs(
            0.5
            * (
                (tris[:, 1, 0] - tris[:, 0, 0]) * (tris[:, 2, 1] - tris[:, 0, 1])
                - (tris[:, 1, 1] - tris[:, 0, 1]) * (tris[:, 2, 0] - tris[:, 0, 0])
            )
        ).sum()
    )


class TestSolveArc:
    def test_semicircle(self):
        center, radius = solve_arc(Point2(1, 0), Point2(-1, 0), 180.0, False)
        assert radius == pytest.approx(1.0, abs=1e-12)
        assert (center.x, center.y) == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_quarter_circle_ccw(self):
        center, radius = solve_arc(Point2(1, 0), Point2(0, 1), 90.0, False)
        assert radius == pytest.approx(1.0, abs=1e-9)
        assert (center.x, center.y) == pytest.approx((0.0, 0.0), abs=1e-9)

    def test_quarter_circle_cw_mirrors(self):
        center, radius = solve_arc(Point2(1, 0), Point2(0, 1), 90.0, True)
        assert (center.x, center.y) == pytest.approx((1.0, 1.0), abs=1e-9)

    def test_traversal_reaches_end(self):
        # Endpoint reconstruction from (center, radius, sweep) closes the arc.
        rng = np.random.default_rng(7)
        for _ in range(200):
            start = Point2(*rng.uniform(-1, 1, 2))
            end = Point2(*rng.uniform(-1, 1, 2))
            if math.hypot(end.x - start.x, end.y - start.y) < 1e-3:
                continue
            sweep = float(rng.uniform(1.0, 359.0))
            cw = bool(rng.integers(0, 2))
            center, radius = solve_arc(start, end, sweep, cw)
            a0 = math.atan2(start.y - center.y, start.x - center.x)
            phi = math.radians(sweep) * (-1.0 if cw else 1.0)
            reached = (
                center.x + radius * math.cos(a0 + phi),
                center.y + radius * math.sin(a0 + phi),
            )
            assert reached == pytest.approx((end.x, end.y), abs=1e-9)

    def test_degenerate_sweeps(self):
        with pytest.raises(GeometryError):
            solve_arc(Point2(0, 0), Point2(1, 0), 0.0, False)
        with pytest.raises(GeometryError):
            solve_arc(Point2(0, 0), Point2(1, 0), 360.0, False)
        with pytest.raises(GeometryError):
            solve_arc(Point2(0, 0), Point2(0, 0), 90.0, False)


class TestTessellate:
    def test_square_four_vertices(self):
        poly = tessellate_loop(square_loop(), 1e-3)
        assert len(poly.vertices) == 4
        assert poly.closed

    def test_circle_sagitta_bound(self):
        poly = tessellate_loop(circle_loop(0, 0, 1.0), 1e-3)
        n_min = math.ceil(math.pi / math.acos(1 - 1e-3))
        assert len(poly.vertices) >= n_min
        radii = np.linalg.norm(poly.vertices, axis=1)
        assert np.allclose(radii, 1.0, atol=1e-9)
        # Max chord deviation (sagitta) within tolerance.
        step = 2 * math.pi / len(poly.vertices)
        assert 1.0 - math.cos(step / 2) <= 1e-3 + 1e-12

    def test_minimum_segment_floor(self):
        # Semicircular arc at chord_tol = radius still gets the floor.
        poly = tessellate_loop(semicircle_arc_loop(), 0.5)
        # 1 line vertex + at least MIN_ARC_SEGMENTS arc vertices.
        assert len(poly.vertices) >= MIN_ARC_SEGMENTS

    def test_relative_lines_resolve(self):
        loop = Loop(
            Point2(0, 0),
            (
                Line(Point2(1, 0), relative=True),
                Line(Point2(0, 1), relative=True),
                Line(Point2(-1, 0), relative=True),
                Line(Point2(0, -1), relative=True),
            ),
            True,
        )
        poly = tessellate_loop(loop, 1e-3)
        assert abs(signed_area(poly.vertices)) == pytest.approx(1.0)


class TestTriangulate:
    def test_square_two_triangles(self):
        tris = triangulate_face(Face(square_loop()), 1e-3)
        assert len(tris) == 2
        assert tri_area_sum(tris) == pytest.approx(1.0, rel=1e-9)

    def test_square_with_square_hole_area(self):
        face = Face(square_loop(0, 0, 1.0), (square_loop(0, 0, 0.5),))
        tris = triangulate_face(face, 1e-3)
        assert tri_area_sum(tris) == pytest.approx(0.75, rel=1e-9)

    def test_square_with_circle_hole_area(self):
        face = Face(square_loop(0, 0, 1.0), (circle_loop(0, 0, 0.25),))
        tris = triangulate_face(face, 1e-4)
        # Tessellated-polygon area, slightly under pi r^2.
        assert tri_area_sum(tris) == pytest.approx(1.0 - math.pi * 0.0625, rel=1e-3)

    def test_zero_area_face_raises(self):
        loop = Loop(
            Point2(0, 0), (Line(Point2(1, 0)), Line(Point2(0, 0))), True
        )
        with pytest.raises(GeometryError):
            triangulate_face(Face(loop), 1e-3)

    def test_two_holes(self):
        face = Face(
            square_loop(0, 0, 1.0),
            (circle_loop(-0.2, 0, 0.1), circle_loop(0.25, 0, 0.12)),
        )
        tris = triangulate_face(face, 1e-4)
        expected = 1.0 - math.pi * (0.01 + 0.0144)
        assert tri_area_sum(tris) == pytest.approx(expected, rel=1e-3)

    def test_random_star_faces(self):
        import sys

        sys.path.insert(0, "tests")
        from modelgen import random_face

        rng = np.random.default_rng(3)
        for _ in range(40):
            face = random_face(rng, 0.0, 0.0, 0.5)
            tris = triangulate_face(face, 1e-3)
            assert len(tris) >= 1


class TestPointInFace:
    def test_center_inside(self):
        assert point_in_face(Face(square_loop()), Point2(0.0, 0.0), 1e-3)

    def test_hole_center_outside(self):
        face = Face(square_loop(0, 0, 1.0), (square_loop(0, 0, 0.5),))
        assert not point_in_face(face, Point2(0, 0), 1e-3)

    def test_boundary_counts_inside(self):
        assert point_in_face(Face(square_loop()), Point2(0.5, 0.0), 1e-3)

    def test_far_outside(self):
        assert not point_in_face(Face(square_loop()), Point2(2.0, 0.0), 1e-3)
