import math

import pytest

from recad.curriculum import (
    LEVEL_NAMES,
    build_curriculum,
    dedup_primitives,
    rewrite_filter,
)
from recad.lang import emit_hardcoded
from recad.model import (
    BooleanOp,
    CADModel,
    Circle,
    Extrude,
    Face,
    Line,
    Loop,
    Point2,
    Primitive,
    PrimitiveLevel,
    SEPair,
)

from conftest import box_model, circle_loop, square_loop, z_sketch
from modelgen import random_model


def rotated_square(side, deg):
    h = side / 2.0
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))

    def rp(x, y):
        return Point2(c * x - s * y, s * x + c * y)

    pts = [rp(-h, -h), rp(h, -h), rp(h, h), rp(-h, h)]
    return Loop(pts[0], tuple(Line(p) for p in pts[1:]) + (Line(pts[0]),), True)


class TestBuildCurriculum:
    def test_square_model_manifest(self):
        man = build_curriculum([box_model(0.8, 0.5)])
        assert [(e.level, e.curve_count) for e in man.entries] == [
            ("L", 4),
            ("F", 4),
            ("S", 4),
            ("SE", 4),
        ]

    def test_curve_count_ascending_within_level(self):
        models = [
            CADModel((SEPair(z_sketch(Face(circle_loop(0, 0, 0.3))), Extrude(0.4)),)),
            box_model(0.7, 0.4),
        ]
        man = build_curriculum(models)
        loops = [e.curve_count for e in man.entries if e.level == "L"]
        assert loops == sorted(loops)
        assert loops[0] == 1

    def test_duplicates_across_models_merged(self):
        m = box_model(0.8, 0.5)
        man = build_curriculum([m, m], model_ids=["a", "b"])
        assert [(e.level, e.source) for e in man.entries] == [
            ("L", "a"),
            ("F", "a"),
            ("S", "a"),
            ("SE", "a"),
        ]

    def test_level_order_and_monotonicity_random(self):
        models = [random_model(seed) for seed in range(6)]
        man = build_curriculum(models)
        order = [LEVEL_NAMES.index(e.level) for e in man.entries]
        assert order == sorted(order)
        for a, b in zip(man.entries, man.entries[1:]):
            if a.level == b.level:
                assert a.curve_count <= b.curve_count

    def test_counts(self):
        man = build_curriculum([random_model(2)])
        counts = man.level_counts()
        assert sum(counts.values()) == len(man.entries)


class TestDedup:
    def test_identical_loops_collapse(self):
        prims = [
            Primitive(PrimitiveLevel.L, square_loop(0, 0, 0.8)),
            Primitive(PrimitiveLevel.L, square_loop(0, 0, 0.8)),
        ]
        assert len(dedup_primitives(prims)) == 1

    def test_rotated_copy_dropped(self):
        prims = [
            Primitive(PrimitiveLevel.L, rotated_square(0.8, 0.0)),
            Primitive(PrimitiveLevel.L, rotated_square(0.8, 90.0)),
        ]
        assert len(dedup_primitives(prims)) == 1

    def test_distinct_shapes_kept(self):
        thin = Loop(
            Point2(-0.4, -0.04),
            (
                Line(Point2(0.4, -0.04)),
                Line(Point2(0.4, 0.04)),
                Line(Point2(-0.4, 0.04)),
                Line(Point2(-0.4, -0.04)),
            ),
            True,
        )
        prims = [
            Primitive(PrimitiveLevel.L, square_loop(0, 0, 0.8)),
            Primitive(PrimitiveLevel.L, thin),
        ]
        assert len(dedup_primitives(prims)) == 2

    def test_levels_do_not_cross_dedup(self):
        loop = square_loop(0, 0, 0.8)
        prims = [
            Primitive(PrimitiveLevel.L, loop),
            Primitive(PrimitiveLevel.F, Face(loop)),
        ]
        assert len(dedup_primitives(prims)) == 2

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            dedup_primitives([], threshold=0.0)


class TestRewriteFilter:
    def _reference(self):
        return Primitive(PrimitiveLevel.SE, box_model(0.8, 0.5).pairs[0], (0, -1, -1))

    def test_own_script_retained(self):
        ref = self._reference()
        good = emit_hardcoded(ref)
        assert rewrite_filter(ref, [good]) == [good]

    def test_all_failures_fall_back(self):
        ref = self._reference()
        kept = rewrite_filter(ref, ["broken (", "also broken ("])
        assert len(kept) == 1
        assert "cad_model" in kept[0]

    def test_offset_copy_filtered(self):
        ref = self._reference()
        # A parameterized near-copy passes; a very different shape fails.
        good = emit_hardcoded(ref)
        from conftest import cylinder_model
        from recad.lang import emit_model

        different = emit_model(cylinder_model(0.2, 0.9))
        kept = rewrite_filter(ref, [different, good])
        assert kept == [good]

    def test_tau_validation(self):
        with pytest.raises(ValueError):
            rewrite_filter(self._reference(), [], tau_s=1.0)
