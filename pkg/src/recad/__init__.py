"""Sketch-extrude CAD kernel with a scripted front end and RL evaluation math.

The package splits into: core model types and quantization (``model``),
planar/solid geometry (``planar``, ``solid``), serialization (``jsonio``,
``export``), the restricted scripting language (``lang``), evaluation
metrics (``metrics``), the verifiable reward (``reward``), group-relative
policy optimization math (``grpo``), and the primitive curriculum
(``curriculum``).  The ``recad`` CLI drives batch workflows.
"""

from .errors import RecadError
from .jsonio import from_external_json, model_from_json, model_to_json, model_to_json_str
from .lang import ExecLimits, emit_hardcoded, emit_model, execute, parse, tokenize
from .metrics import (
    Alignment,
    EncoderInterface,
    MetricReport,
    OccupancyEncoder,
    chamfer,
    eval_pair,
    geometric_similarity,
    invalidity_ratio,
    iou,
    iou_best,
    primitive_f1,
)
from .model import (
    Arc,
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
    QuantizedModel,
    SEPair,
    Sketch,
    ValidationReport,
    Vec3,
    count_curves,
    dequantize,
    extract_primitives,
    merge_profiles_to_faces,
    quantize,
    validate_model,
    wrap_primitive,
)
from .reward import RewardBreakdown, RewardConfig, compute_reward, extract_script, format_reward, phi
from .curriculum import (
    CurriculumEntry,
    CurriculumManifest,
    build_curriculum,
    dedup_primitives,
    rewrite_filter,
)
from .grpo import (
    Group,
    HarnessConfig,
    MockOutcome,
    MockPolicy,
    PolicyInterface,
    Question,
    Rollout,
    TrainStepReport,
    classify_hardness,
    clip_term,
    group_advantages,
    grpo_objective,
    guided_objective,
    mixed_loss,
)
from .solid import (
    MassProperties,
    SimilarityTransform,
    TriMesh,
    VoxelGrid,
    apply_transform,
    extrude_mesh,
    mass_properties,
    membership,
    model_mesh,
    normalize_model,
    normalize_transform,
    point_in_se,
    sample_surface,
    voxelize,
)
from .planar import point_in_face, solve_arc, tessellate_loop, triangulate_face

__version__ = "0.1.0"
