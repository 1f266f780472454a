import math

import numpy as np
import pytest

from recad.errors import EmptySolidError
from recad.metrics import (
    OccupancyEncoder,
    chamfer,
    eval_pair,
    geometric_similarity,
    invalidity_ratio,
    iou,
    iou_best,
    primitive_f1,
)
from recad.model import BooleanOp, CADModel, Extrude, Face, SEPair, Vec3
from recad.solid import ROTATIONS_24, VoxelGrid, rotate_model, voxelize

from conftest import (
    box_model,
    circle_loop,
    cube_minus_cylinder,
    cylinder_model,
    square_loop,
    z_sketch,
)
from modelgen import random_model


def brute_force_chamfer(a, b):
    d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=2)
    return 0.5 * (float(np.mean(d2.min(axis=1))) + float(np.mean(d2.min(axis=0))))


class TestChamfer:
    def test_identical_sets_zero(self):
        pts = np.random.default_rng(0).random((100, 3))
        assert chamfer(pts, pts.copy()) == 0.0

    def test_single_points(self):
        assert chamfer([[0, 0, 0]], [[0, 0, 2.0]]) == 4.0

    def test_matches_brute_force_exactly(self):
        rng = np.random.default_rng(42)
        for n, m in ((500, 500), (257, 123), (3, 499)):
            a = rng.random((n, 3))
            b = rng.random((m, 3)) * 1.2 - 0.1
            assert chamfer(a, b) == brute_force_chamfer(a, b)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        a, b = rng.random((80, 3)), rng.random((60, 3))
        assert chamfer(a, b) == chamfer(b, a)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            chamfer([], [[0, 0, 0]])


class TestIou:
    def _grid(self, occ):
        return VoxelGrid(Vec3(0, 0, 0), 1.0, occ.shape, occ)

    def test_identical(self):
        occ = np.random.default_rng(0).random((8, 8, 8)) > 0.5
        assert iou(self._grid(occ), self._grid(occ.copy())) == 1.0

    def test_disjoint(self):
        a = np.zeros((8, 8, 8), bool)
        b = np.zeros((8, 8, 8), bool)
        a[:2] = True
        b[4:] = True
        assert iou(self._grid(a), self._grid(b)) == 0.0

    def test_half_overlap_equal_boxes(self):
        # |A| = |B| = 2V, overlap V: IoU = V / 3V = 1/3.
        a = np.zeros((8, 8, 8), bool)
        b = np.zeros((8, 8, 8), bool)
        a[0:4] = True
        b[2:6] = True
        assert iou(self._grid(a), self._grid(b)) == pytest.approx(1 / 3)

    def test_frame_mismatch(self):
        a = np.zeros((8, 8, 8), bool)
        g1 = VoxelGrid(Vec3(0, 0, 0), 1.0, (8, 8, 8), a)
        g2 = VoxelGrid(Vec3(0, 0, 0), 2.0, (8, 8, 8), a)
        with pytest.raises(ValueError):
            iou(g1, g2)

    def test_both_empty(self):
        a = np.zeros((8, 8, 8), bool)
        assert iou(self._grid(a), self._grid(a.copy())) == 0.0


class TestIouBest:
    def test_self_is_one(self, gt_model):
        res = iou_best(gt_model, gt_model, 64)
        assert res.score == 1.0
        assert res.alignment.index == 0

    def test_rotated_copies_equal_for_all_24(self):
        m = random_model(11, max_pairs=2)
        base = iou_best(m, m, 32).score
        for rot in ROTATIONS_24:
            assert iou_best(m, rotate_model(m, rot), 32).score == base

    def test_search_recovers_rotation_index(self):
        m = box_model(0.8, 0.3)  # anisotropic box
        rot = ROTATIONS_24[7]
        res = iou_best(rotate_model(m, rot), m, 32)
        assert res.score > 0.95

    def test_matches_brute_force_model_rotation(self):
        # Oracle: voxelize each rotated model directly on the same frame.
        from recad.metrics import _centered, _common_grids, _half_extent
        from recad.solid import symmetric_bounds

        a = box_model(0.9, 0.4)
        b = cylinder_model(0.45, 0.7)
        res = iou_best(a, b, 32, normalize=True)
        a2 = _centered(a, 32, True)
        b2 = _centered(b, 32, True)
        h = max(_half_extent(a2), _half_extent(b2))
        bounds = symmetric_bounds(h)
        gb = voxelize(b2, 32, bounds=bounds)
        best = -1.0
        for rot in ROTATIONS_24:
            ga = voxelize(rotate_model(a2, rot), 32, bounds=bounds)
            inter = np.count_nonzero(ga.occupancy & gb.occupancy)
            union = np.count_nonzero(ga.occupancy | gb.occupancy)
            best = max(best, inter / union if union else 0.0)
        assert res.score == best

    def test_empty_solid_raises(self):
        m = CADModel(
            (
                SEPair(z_sketch(Face(square_loop(0, 0, 0.5))), Extrude(0.5), BooleanOp.NEW_BODY),
                SEPair(z_sketch(Face(square_loop(0, 0, 2.0))), Extrude(1.0), BooleanOp.CUT),
            )
        )
        with pytest.raises(EmptySolidError):
            iou_best(m, box_model(), 32)


class TestPrimitiveF1:
    def test_identical(self, gt_model):
        assert primitive_f1(gt_model, gt_model) == 1.0

    def test_hand_case_five_sixths(self):
        pred = CADModel(
            (
                SEPair(
                    z_sketch(Face(square_loop(0, 0, 1.0), (circle_loop(0, 0, 0.2),))),
                    Extrude(1.0),
                ),
            )
        )
        gt = CADModel(
            (
                SEPair(
                    z_sketch(
                        Face(
                            square_loop(0, 0, 1.0),
                            (circle_loop(-0.2, 0, 0.1), circle_loop(0.2, 0, 0.1)),
                        )
                    ),
                    Extrude(1.0),
                ),
            )
        )
        expected = (1.0 + (2 * 1.0 * 0.5) / 1.5) / 2.0
        assert primitive_f1(pred, gt) == expected
        assert abs(primitive_f1(pred, gt) - 5 / 6) < 1e-12

    def test_no_type_overlap_zero(self):
        pred = box_model()  # lines only
        gt = cylinder_model()  # circle only
        assert primitive_f1(pred, gt) == 0.0

    def test_symmetric_and_order_invariant(self):
        a = random_model(3)
        b = random_model(5)
        assert primitive_f1(a, b) == primitive_f1(b, a)
        flipped = CADModel(tuple(reversed(a.pairs)))
        assert primitive_f1(flipped, b) == primitive_f1(a, b)


class TestInvalidityRatio:
    def test_all_valid(self):
        assert invalidity_ratio([True] * 5) == 0.0

    def test_one_of_eight(self):
        assert invalidity_ratio([True] * 7 + [False]) == 0.125

    def test_all_failed(self):
        assert invalidity_ratio([False] * 3) == 1.0

    def test_accepts_reports(self, gt_model):
        report = eval_pair(gt_model, gt_model, resolution=16, samples=50)
        assert invalidity_ratio([report, False]) == 0.5


class TestSimilarity:
    def test_identical_is_exactly_one(self, gt_model):
        assert geometric_similarity(gt_model, gt_model) == 1.0

    def test_symmetric(self):
        a = box_model(0.9, 0.4)
        b = cube_minus_cylinder()
        assert geometric_similarity(a, b) == geometric_similarity(b, a)

    def test_disjoint_supports_zero(self):
        enc = OccupancyEncoder(8)
        a = np.zeros((8, 8, 8), bool)
        b = np.zeros((8, 8, 8), bool)
        a[:3] = True
        b[5:] = True
        ga = VoxelGrid(Vec3(0, 0, 0), 1.0, a.shape, a)
        gb = VoxelGrid(Vec3(0, 0, 0), 1.0, b.shape, b)
        assert enc.similarity(ga, gb) < 0.0  # raw cosine negative
        # Clamped at the geometric_similarity level; check the packed
        # formula agrees with the float embedding cosine.
        pa, na, size = OccupancyEncoder.pack(a)
        pb, nb, _ = OccupancyEncoder.pack(b)
        packed = OccupancyEncoder.packed_similarity(pa, na, pb, nb, size)
        assert packed == pytest.approx(enc.similarity(ga, gb), abs=1e-12)

    def test_rotated_scores_higher_than_different(self):
        plate = box_model(0.9, 0.1)
        rot_plate = rotate_model(plate, ROTATIONS_24[7])
        tall = box_model(0.2, 0.9)
        sim_rot = geometric_similarity(plate, rot_plate)
        sim_diff = geometric_similarity(plate, cylinder_model(0.2, 0.9))
        assert sim_rot == 1.0
        assert sim_diff < sim_rot


class TestEvalPair:
    def test_self_pair(self, gt_model):
        report = eval_pair(gt_model, gt_model, resolution=32, samples=200)
        assert report.valid
        assert report.chamfer_x1e3 == 0.0
        assert report.iou_best == 1.0
        assert report.p_f1 == 1.0

    def test_invalid_pred_reported(self, gt_model):
        empty = CADModel(
            (
                SEPair(z_sketch(Face(square_loop(0, 0, 0.5))), Extrude(0.5), BooleanOp.NEW_BODY),
                SEPair(z_sketch(Face(square_loop(0, 0, 2.0))), Extrude(1.0), BooleanOp.CUT),
            )
        )
        report = eval_pair(empty, gt_model, resolution=16, samples=50)
        assert not report.valid
        assert report.failure_category == "empty-solid"
        assert report.chamfer_x1e3 is None
