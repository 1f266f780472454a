import json
import math

import pytest

from recad.errors import JsonFormatError, UnsupportedFeatureError
from recad.jsonio import (
    from_external_json,
    model_from_json,
    model_to_json,
    model_to_json_str,
)
from recad.model import BooleanOp, validate_model

from conftest import box_model, cube_minus_cylinder
from modelgen import random_model


def external_doc(extent_type="OneSideFeatureExtentType", value=0.6, value2=0.25, curves=None):
    if curves is None:
        curves = [
            {"type": "Line3D", "start_point": {"x": 0, "y": 0, "z": 0}, "end_point": {"x": 1, "y": 0, "z": 0}},
            {"type": "Line3D", "start_point": {"x": 1, "y": 0, "z": 0}, "end_point": {"x": 1, "y": 1, "z": 0}},
            {"type": "Line3D", "start_point": {"x": 1, "y": 1, "z": 0}, "end_point": {"x": 0, "y": 1, "z": 0}},
            {"type": "Line3D", "start_point": {"x": 0, "y": 1, "z": 0}, "end_point": {"x": 0, "y": 0, "z": 0}},
        ]
    ext = {
        "type": "ExtrudeFeature",
        "operation": "NewBodyFeatureOperation",
        "profiles": [{"profile": "p1", "sketch": "sk1"}],
        "extent_type": extent_type,
        "extent_one": {"distance": {"value": value, "role": "AlongDistance"}},
        "start_extent": {"type": "ProfilePlaneStartDefinition"},
    }
    if extent_type == "TwoSidesFeatureExtentType":
        ext["extent_two"] = {"distance": {"value": value2, "role": "AlongDistance"}}
    return {
        "entities": {
            "sk1": {
                "type": "Sketch",
                "transform": {
                    "origin": {"x": 0, "y": 0, "z": 0},
                    "x_axis": {"x": 1, "y": 0, "z": 0},
                    "y_axis": {"x": 0, "y": 1, "z": 0},
                    "z_axis": {"x": 0, "y": 0, "z": 1},
                },
                "profiles": {"p1": {"loops": [{"is_outer": True, "profile_curves": curves}]}},
            },
            "ex1": ext,
        },
        "sequence": [{"type": "ExtrudeFeature", "entity": "ex1"}],
    }


class TestNativeSchema:
    def test_roundtrip_random_models(self):
        for seed in range(8):
            m = random_model(seed)
            assert model_from_json(model_to_json(m)) == m

    def test_roundtrip_via_text(self, gt_model):
        assert model_from_json(model_to_json_str(gt_model)) == gt_model

    def test_missing_schema_rejected(self):
        with pytest.raises(JsonFormatError) as exc:
            model_from_json({"pairs": []})
        assert "schema" in str(exc.value)

    def test_malformed_json(self):
        with pytest.raises(JsonFormatError):
            model_from_json(b"{not json")

    def test_unknown_curve_type(self, unit_cube):
        doc = model_to_json(unit_cube)
        doc["pairs"][0]["sketch"]["faces"][0]["outer"]["curves"][0] = {
            "type": "spline",
            "points": [],
        }
        with pytest.raises(UnsupportedFeatureError) as exc:
            model_from_json(doc)
        assert "curves[0]" in str(exc.value)

    def test_error_paths(self, unit_cube):
        doc = model_to_json(unit_cube)
        doc["pairs"][0]["extrude"]["dist_pos"] = "x"
        with pytest.raises(JsonFormatError) as exc:
            model_from_json(doc)
        assert "pairs[0].extrude.dist_pos" in str(exc.value)


class TestExternalReader:
    def test_one_sided(self):
        m = from_external_json(external_doc(value=0.6))
        pair = m.pairs[0]
        assert pair.extrude.dist_pos == 0.6
        assert pair.extrude.dist_neg == 0.0
        assert pair.op == BooleanOp.NEW_BODY
        assert validate_model(m).ok

    def test_one_sided_negative(self):
        m = from_external_json(external_doc(value=-0.6))
        assert m.pairs[0].extrude.dist_pos == 0.0
        assert m.pairs[0].extrude.dist_neg == 0.6

    def test_symmetric_splits_total(self):
        m = from_external_json(external_doc("SymmetricFeatureExtentType", value=0.8))
        assert m.pairs[0].extrude.dist_pos == pytest.approx(0.4)
        assert m.pairs[0].extrude.dist_neg == pytest.approx(0.4)

    def test_two_sided_maps_directly(self):
        m = from_external_json(
            external_doc("TwoSidesFeatureExtentType", value=0.5, value2=0.2)
        )
        assert m.pairs[0].extrude.dist_pos == pytest.approx(0.5)
        assert m.pairs[0].extrude.dist_neg == pytest.approx(0.2)

    def test_spline_unsupported(self):
        doc = external_doc(
            curves=[{"type": "Spline3D", "points": []}]
        )
        with pytest.raises(UnsupportedFeatureError):
            from_external_json(doc)

    def test_unknown_operation(self):
        doc = external_doc()
        doc["entities"]["ex1"]["operation"] = "MirrorFeatureOperation"
        with pytest.raises(UnsupportedFeatureError):
            from_external_json(doc)

    def test_shuffled_curve_chain(self):
        # Curves listed with flipped endpoints still chain into a loop.
        doc = external_doc(
            curves=[
                {"type": "Line3D", "start_point": {"x": 1, "y": 0, "z": 0}, "end_point": {"x": 0, "y": 0, "z": 0}},
                {"type": "Line3D", "start_point": {"x": 1, "y": 1, "z": 0}, "end_point": {"x": 1, "y": 0, "z": 0}},
                {"type": "Line3D", "start_point": {"x": 1, "y": 1, "z": 0}, "end_point": {"x": 0, "y": 1, "z": 0}},
                {"type": "Line3D", "start_point": {"x": 0, "y": 1, "z": 0}, "end_point": {"x": 0, "y": 0, "z": 0}},
            ]
        )
        m = from_external_json(doc)
        assert validate_model(m).ok
        assert len(m.pairs[0].sketch.faces[0].outer.curves) == 4

    def test_circle_profile(self):
        doc = external_doc(
            curves=[
                {
                    "type": "Circle3D",
                    "center_point": {"x": 0.2, "y": 0.1, "z": 0},
                    "radius": 0.4,
                }
            ]
        )
        m = from_external_json(doc)
        loop = m.pairs[0].sketch.faces[0].outer
        assert loop.is_circle()
        assert loop.curves[0].radius == 0.4

    def test_arc_direction_from_midpoint(self):
        # Quarter arc (1,0) -> (0,1) through (sqrt1/2, sqrt1/2): ccw.
        s2 = math.sqrt(0.5)
        curves = [
            {
                "type": "Arc3D",
                "start_point": {"x": 1, "y": 0, "z": 0},
                "end_point": {"x": 0, "y": 1, "z": 0},
                "center_point": {"x": 0, "y": 0, "z": 0},
                "mid_point": {"x": s2, "y": s2, "z": 0},
            },
            {"type": "Line3D", "start_point": {"x": 0, "y": 1, "z": 0}, "end_point": {"x": 0, "y": 0, "z": 0}},
            {"type": "Line3D", "start_point": {"x": 0, "y": 0, "z": 0}, "end_point": {"x": 1, "y": 0, "z": 0}},
        ]
        m = from_external_json(external_doc(curves=curves))
        arc = m.pairs[0].sketch.faces[0].outer.curves[0]
        assert arc.sweep == pytest.approx(90.0, abs=1e-9)
        assert not arc.clockwise

    def test_arc_clockwise_detected(self):
        # Same endpoints but midpoint on the far side: cw sweep 270.
        s2 = math.sqrt(0.5)
        curves = [
            {
                "type": "Arc3D",
                "start_point": {"x": 1, "y": 0, "z": 0},
                "end_point": {"x": 0, "y": 1, "z": 0},
                "center_point": {"x": 0, "y": 0, "z": 0},
                "mid_point": {"x": -s2, "y": -s2, "z": 0},
            },
            {"type": "Line3D", "start_point": {"x": 0, "y": 1, "z": 0}, "end_point": {"x": 0, "y": 0, "z": 0}},
            {"type": "Line3D", "start_point": {"x": 0, "y": 0, "z": 0}, "end_point": {"x": 1, "y": 0, "z": 0}},
        ]
        m = from_external_json(external_doc(curves=curves))
        arc = m.pairs[0].sketch.faces[0].outer.curves[0]
        assert arc.sweep == pytest.approx(270.0, abs=1e-9)
        assert arc.clockwise

    def test_validate_accepts_converted(self):
        for doc in (
            external_doc(),
            external_doc("SymmetricFeatureExtentType", value=0.5),
            external_doc("TwoSidesFeatureExtentType", value=0.4, value2=0.3),
        ):
            assert validate_model(from_external_json(doc)).ok

    def test_no_extrude_features(self):
        with pytest.raises(JsonFormatError):
            from_external_json({"entities": {}, "sequence": []})
