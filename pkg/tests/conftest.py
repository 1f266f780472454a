import math

import pytest

from recad.model import (
    Arc,
    BooleanOp,
    CADModel,
    Circle,
    Extrude,
    Face,
    Line,
    Loop,
    Point2,
    SEPair,
    Sketch,
    Vec3,
)

Z_FRAME = (Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), Vec3(0.0, 0.0, 1.0))


def square_loop(cx=0.0, cy=0.0, side=1.0):
    h = side / 2.0
    return Loop(
        Point2(cx - h, cy - h),
        (
            Line(Point2(cx + h, cy - h)),
            Line(Point2(cx + h, cy + h)),
            Line(Point2(cx - h, cy + h)),
            Line(Point2(cx - h, cy - h)),
        ),
        True,
    )


def circle_loop(cx=0.0, cy=0.0, radius=0.5):
    return Loop(Point2(cx, cy), (Circle(radius),), True)


def z_sketch(*faces, origin=Vec3(0.0, 0.0, 0.0)):
    return Sketch(origin, Vec3(1.0, 0.0, 0.0), Vec3(0.0, 0.0, 1.0), tuple(faces))


def box_model(side=1.0, height=1.0, cx=0.0, cy=0.0):
    sk = z_sketch(Face(square_loop(cx, cy, side)))
    return CADModel((SEPair(sk, Extrude(height, 0.0), BooleanOp.NEW_BODY),))


def cylinder_model(radius=0.3, height=1.0, cx=0.0, cy=0.0):
    sk = z_sketch(Face(circle_loop(cx, cy, radius)))
    return CADModel((SEPair(sk, Extrude(height, 0.0), BooleanOp.NEW_BODY),))


def cube_minus_cylinder(side=1.0, radius=0.3, height=1.0):
    return CADModel(
        (
            SEPair(z_sketch(Face(square_loop(0, 0, side))), Extrude(height, 0.0), BooleanOp.NEW_BODY),
            SEPair(z_sketch(Face(circle_loop(0, 0, radius))), Extrude(height, 0.0), BooleanOp.CUT),
        )
    )


def semicircle_arc_loop():
    # Half disc: diameter line plus 180-degree arc back.
    return Loop(
        Point2(-0.5, 0.0),
        (Line(Point2(0.5, 0.0)), Arc(Point2(-0.5, 0.0), 180.0, False)),
        True,
    )


@pytest.fixture
def unit_cube():
    return box_model(1.0, 1.0)


@pytest.fixture
def gt_model():
    sk = z_sketch(Face(square_loop(0.1, 0.2, 0.8)))
    return CADModel((SEPair(sk, Extrude(0.5, 0.0), BooleanOp.NEW_BODY),))
