"""Sandboxed tree-walking interpreter for CAD scripts.

Evaluation is a pure function of (AST, limits): there is no access to the
host file system, clock, or randomness, every AST node evaluation charges
one step against ``max_steps``, each loop run is capped by
``max_loop_iters``, and model construction is capped by ``max_curves``.
The script must leave a model bound to the name ``cad_model``; the built
model is validated before being returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import (
    ContractError,
    EvaluationError,
    ResourceLimitError,
    ValidationError,
)
from ..model import (
    EPS_CLOSE,
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
    validate_model,
)
from . import parser as ast
from .parser import ScriptAst

_MAX_INT_BITS = 64


@dataclass(frozen=True)
class ExecLimits:
    max_steps: int = 200_000
    max_loop_iters: int = 10_000
    max_curves: int = 5_000

    def __post_init__(self):
        if min(self.max_steps, self.max_loop_iters, self.max_curves) <= 0:
            raise ValueError("execution limits must be positive")


class LoopBuilder:
    def __init__(self, interp):
        self._interp = interp
        self.start = Point2(0.0, 0.0)
        self.pen = Point2(0.0, 0.0)
        self.curves = []
        self.closed = False

    def moveTo(self, x, y):
        if self.curves:
            raise EvaluationError("moveTo after curves were added")
        self.start = Point2(x, y)
        self.pen = self.start
        return self

    def lineTo(self, x, y, relative=False):
        self._interp.charge_curve()
        self.curves.append(Line(Point2(x, y), bool(relative)))
        self.pen = Point2(x, y) if not relative else Point2(self.pen.x + x, self.pen.y + y)
        return self

    def arcTo(self, x, y, degrees, clockwise, relative=False):
        self._interp.charge_curve()
        self.curves.append(Arc(Point2(x, y), degrees, bool(clockwise), bool(relative)))
        self.pen = Point2(x, y) if not relative else Point2(self.pen.x + x, self.pen.y + y)
        return self

    def circle(self, radius):
        self._interp.charge_curve()
        self.curves.append(Circle(radius))
        self.closed = True
        return self

    def close(self):
        if self.curves and not any(isinstance(c, Circle) for c in self.curves):
            gap = math.hypot(self.pen.x - self.start.x, self.pen.y - self.start.y)
            if gap > EPS_CLOSE:
                self._interp.charge_curve()
                self.curves.append(Line(self.start))
                self.pen = self.start
        self.closed = True
        return self

    def build(self) -> Loop:
        return Loop(self.start, tuple(self.curves), self.closed)


class FaceBuilder:
    def __init__(self):
        self.loops = []

    def addLoop(self, *loops):
        for lp in loops:
            if not isinstance(lp, LoopBuilder):
                raise EvaluationError("addLoop expects Loop values")
            self.loops.append(lp)
        return None

    def build(self) -> Face:
        if not self.loops:
            return Face(Loop(Point2(0.0, 0.0), ()), ())
        return Face(self.loops[0].build(), tuple(lp.build() for lp in self.loops[1:]))


class SketchBuilder:
    def __init__(self, origin, x_axis, normal):
        self.origin = _vec3(origin, "origin")
        self.x_axis = _vec3(x_axis, "x_axis")
        self.normal = _vec3(normal, "normal")
        self.faces = []

    def addFace(self, *faces):
        for f in faces:
            if not isinstance(f, FaceBuilder):
                raise EvaluationError("addFace expects Face values")
            self.faces.append(f)
        return None

    def build(self) -> Sketch:
        return Sketch(
            self.origin, self.x_axis, self.normal, tuple(f.build() for f in self.faces)
        )


class ExtrudeValue:
    def __init__(self, distance):
        if isinstance(distance, (int, float)) and not isinstance(distance, bool):
            d = float(distance)
            self.dist_pos, self.dist_neg = (d, 0.0) if d >= 0 else (0.0, -d)
        elif isinstance(distance, (tuple, list)) and len(distance) == 2:
            a, b = distance
            _require_number(a, "Extrude distance")
            _require_number(b, "Extrude distance")
            self.dist_pos, self.dist_neg = float(a), float(b)
        else:
            raise EvaluationError("Extrude takes a number or a pair of numbers")

    def build(self) -> Extrude:
        return Extrude(self.dist_pos, self.dist_neg)


_OPS = {v.value: v for v in BooleanOp}


class ModelBuilder:
    def __init__(self):
        self.pairs = []

    def addSE(self, sketch, extrude, boolean_op):
        if not isinstance(sketch, SketchBuilder):
            raise EvaluationError("addSE expects a Sketch as first argument")
        if not isinstance(extrude, ExtrudeValue):
            raise EvaluationError("addSE expects an Extrude as second argument")
        if not isinstance(boolean_op, str) or boolean_op not in _OPS:
            raise EvaluationError(
                f"boolean_op must be one of {sorted(_OPS)}, got {boolean_op!r}"
            )
        self.pairs.append(SEPair(sketch.build(), extrude.build(), _OPS[boolean_op]))
        return None

    def build(self) -> CADModel:
        return CADModel(tuple(self.pairs))


def _require_number(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise EvaluationError(f"{what} must be a number, got {type(v).__name__}")
    return float(v)


def _vec3(v, what: str) -> Vec3:
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise EvaluationError(f"{what} must be a list of three numbers")
    return Vec3(*(_require_number(c, what) for c in v))


_METHODS = {
    LoopBuilder: {"moveTo": 2, "lineTo": (2, 3), "arcTo": (4, 5), "circle": 1, "close": 0},
    FaceBuilder: {"addLoop": None},
    SketchBuilder: {"addFace": None},
    ModelBuilder: {"addSE": 3},
}

_NUMERIC_METHOD_ARGS = {"moveTo", "lineTo", "arcTo", "circle"}


class _Interp:
    def __init__(self, limits: ExecLimits):
        self.limits = limits
        self.steps = 0
        self.curves = 0
        self.env = {"pi": math.pi}

    def charge_step(self):
        self.steps += 1
        if self.steps > self.limits.max_steps:
            raise ResourceLimitError(f"step limit {self.limits.max_steps} exceeded")

    def charge_curve(self):
        self.curves += 1
        if self.curves > self.limits.max_curves:
            raise ResourceLimitError(f"curve limit {self.limits.max_curves} exceeded")

    # -- statements ---------------------------------------------------------

    def run(self, module: ScriptAst):
        for stmt in module.statements:
            self.exec_stmt(stmt)

    def exec_stmt(self, stmt):
        self.charge_step()
        if isinstance(stmt, ast.Assign):
            self.env[stmt.target] = self.eval(stmt.value)
        elif isinstance(stmt, ast.ExprStmt):
            self.eval(stmt.value)
        elif isinstance(stmt, ast.For):
            args = [self.eval(a) for a in stmt.range_args]
            for a in args:
                if isinstance(a, bool) or not isinstance(a, int):
                    raise EvaluationError("range() arguments must be integers")
            try:
                rng = range(*args)
            except ValueError as exc:
                raise EvaluationError(str(exc)) from None
            if len(rng) > self.limits.max_loop_iters:
                raise ResourceLimitError(
                    f"loop of {len(rng)} iterations exceeds limit "
                    f"{self.limits.max_loop_iters}"
                )
            for value in rng:
                self.env[stmt.var] = value
                for inner in stmt.body:
                    self.exec_stmt(inner)
        else:
            raise EvaluationError(f"unknown statement {stmt!r}")

    # -- expressions --------------------------------------------------------

    def eval(self, node):
        self.charge_step()
        if isinstance(node, ast.Num):
            return node.value
        if isinstance(node, ast.Str):
            return node.value
        if isinstance(node, ast.Bool):
            return node.value
        if isinstance(node, ast.Name):
            try:
                return self.env[node.ident]
            except KeyError:
                raise EvaluationError(f"name {node.ident!r} is not defined") from None
        if isinstance(node, ast.UnaryOp):
            v = self.eval(node.operand)
            _require_number(v, "unary operand")
            return -v if node.op == "-" else +v
        if isinstance(node, ast.BinOp):
            return self.binop(node)
        if isinstance(node, ast.ListLit):
            return [self.eval(item) for item in node.items]
        if isinstance(node, ast.TupleLit):
            return tuple(self.eval(item) for item in node.items)
        if isinstance(node, ast.Call):
            return self.call(node)
        if isinstance(node, ast.MethodCall):
            return self.method_call(node)
        raise EvaluationError(f"unknown expression {node!r}")

    def binop(self, node):
        a = self.eval(node.left)
        b = self.eval(node.right)
        _require_number(a, "operand")
        _require_number(b, "operand")
        try:
            if node.op == "+":
                result = a + b
            elif node.op == "-":
                result = a - b
            elif node.op == "*":
                result = a * b
            elif node.op == "/":
                result = a / b
            elif node.op == "**":
                if isinstance(a, int) and isinstance(b, int) and b > 256 and abs(a) > 1:
                    raise EvaluationError("integer exponent too large")
                result = a**b
            else:
                raise EvaluationError(f"unknown operator {node.op!r}")
        except ZeroDivisionError:
            raise EvaluationError("division by zero") from None
        except OverflowError:
            raise EvaluationError("numeric overflow") from None
        if isinstance(result, complex):
            raise EvaluationError("complex results are not allowed")
        if isinstance(result, int) and result.bit_length() > _MAX_INT_BITS:
            raise EvaluationError("integer overflow")
        return result

    def call(self, node: ast.Call):
        args = [self.eval(a) for a in node.args]
        kwargs = {name: self.eval(v) for name, v in node.kwargs}
        name = node.func
        if name in ast.MATH_NAMES:
            if kwargs or len(args) != 1:
                raise EvaluationError(f"{name}() takes one positional argument")
            x = _require_number(args[0], f"{name}() argument")
            try:
                return getattr(math, name)(x)
            except ValueError as exc:
                raise EvaluationError(f"{name}(): {exc}") from None
        if name == "Loop":
            self._no_args(name, args, kwargs)
            return LoopBuilder(self)
        if name == "Face":
            self._no_args(name, args, kwargs)
            return FaceBuilder()
        if name == "CADModel":
            self._no_args(name, args, kwargs)
            return ModelBuilder()
        if name == "Extrude":
            bound = self._bind(name, ("distance",), args, kwargs)
            return ExtrudeValue(bound["distance"])
        if name == "Sketch":
            bound = self._bind(name, ("origin", "x_axis", "normal"), args, kwargs)
            return SketchBuilder(bound["origin"], bound["x_axis"], bound["normal"])
        raise EvaluationError(f"unknown callable {name!r}")

    def _no_args(self, name, args, kwargs):
        if args or kwargs:
            raise EvaluationError(f"{name}() takes no arguments")

    def _bind(self, name, params, args, kwargs):
        if len(args) > len(params):
            raise EvaluationError(f"{name}() takes at most {len(params)} arguments")
        bound = dict(zip(params, args))
        for key, value in kwargs.items():
            if key not in params:
                raise EvaluationError(f"{name}() got unexpected keyword {key!r}")
            if key in bound:
                raise EvaluationError(f"{name}() got duplicate argument {key!r}")
            bound[key] = value
        missing = [p for p in params if p not in bound]
        if missing:
            raise EvaluationError(f"{name}() missing argument {missing[0]!r}")
        return bound

    def method_call(self, node: ast.MethodCall):
        obj = self.eval(node.obj)
        spec = _METHODS.get(type(obj))
        if spec is None or node.method not in spec:
            raise EvaluationError(
                f"{type(obj).__name__.replace('Builder', '')} has no method "
                f"{node.method!r}"
            )
        args = [self.eval(a) for a in node.args]
        kwargs = {name: self.eval(v) for name, v in node.kwargs}
        if node.method in _NUMERIC_METHOD_ARGS:
            args = [
                _require_number(a, f"{node.method}() argument")
                if not isinstance(a, bool)
                else a
                for a in args
            ]
        method = getattr(obj, node.method)
        try:
            return method(*args, **kwargs)
        except TypeError as exc:
            raise EvaluationError(f"{node.method}(): {exc}") from None


def execute(script, limits: ExecLimits = ExecLimits()) -> CADModel:
    """Run a script (AST or source text) and return its validated model.

    Raises categorized errors: ``parse`` for bad syntax, ``resource`` for
    exceeded limits, ``evaluation`` for runtime failures, ``contract``
    when ``cad_model`` is unbound or of the wrong type, and ``validation``
    when the built model violates a structural invariant.
    """
    if isinstance(script, str):
        from .parser import parse

        script = parse(script)
    interp = _Interp(limits)
    interp.run(script)
    result = interp.env.get("cad_model")
    if result is None:
        raise ContractError("script did not bind the name 'cad_model'")
    if not isinstance(result, ModelBuilder):
        raise ContractError("'cad_model' is not a CADModel")
    model = result.build()
    report = validate_model(model)
    if not report.ok:
        raise ValidationError(report)
    return model
