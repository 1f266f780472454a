"""The scripting front end: parameterized code in, solids out.

Loops and trigonometry let one script place a circular bolt pattern;
the same geometry written by hand would hardcode every center.
"""

from recad import ExecLimits, execute, extract_primitives, emit_hardcoded
from recad.errors import RecadError

pattern = """
plate = Loop().moveTo(0.0, 0.0).circle(0.8)
face0 = Face()
face0.addLoop(plate)
sketch0 = Sketch([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
sketch0.addFace(face0)
cad_model = CADModel()
cad_model.addSE(sketch0, Extrude(0.1), "new")

for i in range(6):
    bolt = Loop().moveTo(0.55 * cos(i * pi / 3), 0.55 * sin(i * pi / 3)).circle(0.07)
    f = Face()
    f.addLoop(bolt)
    sk = Sketch([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    sk.addFace(f)
    cad_model.addSE(sk, Extrude(0.2), "cut")
"""

model = execute(pattern)
print("pairs:", len(model.pairs), "(1 plate + 6 bolt cuts)")

# Every model primitive emits back to a hardcoded script.
prims = extract_primitives(model)
script = emit_hardcoded(prims[-1])
print("emitted MSE script:", len(script.splitlines()), "lines")
print("re-executes to the same model:", execute(script) == model)

# The sandbox refuses runaway scripts with a categorized error.
try:
    execute("for i in range(10 ** 9):\n    x = i\n", ExecLimits())
except RecadError as exc:
    print("runaway loop stopped:", exc.category, "-", exc)

try:
    execute("import os\n")
except RecadError as exc:
    print("import rejected:", exc.category)
