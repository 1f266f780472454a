"""Batch command-line surface.

Subcommands: ``convert`` between model formats, ``eval`` metric batches,
``reward`` single solutions, ``curriculum`` manifest building,
``harness-sim`` desk-scale training simulation over a mock policy, and
``export`` to OBJ or voxel files.  Every subcommand is deterministic
given its flags and seeds; exit codes are 0 (success), 1 (usage), and
2 (data error).  ``RECAD_LOG`` sets log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .curriculum import DEDUP_RESOLUTION, build_curriculum
from .errors import EmptySolidError, JsonFormatError, RecadError
from .export import grid_to_bytes, mesh_to_obj
from .grpo import HarnessConfig, MockOutcome, MockPolicy, Question, classify_hardness, mixed_loss
from .jsonio import SCHEMA, from_external_json, model_from_json, model_to_json, model_to_json_str
from .lang import ExecLimits, emit_model, execute
from .metrics import eval_pair, invalidity_ratio
from .model import CADModel, validate_model
from .reward import RewardConfig, compute_reward
from .solid import model_mesh, voxelize

logger = logging.getLogger("recad.cli")


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1; data problems exit 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _parse_limits(text: str) -> ExecLimits:
    try:
        steps, iters, curves = (int(x) for x in text.split(","))
        return ExecLimits(steps, iters, curves)
    except ValueError:
        raise JsonFormatError(
            "--limits expects 'max_steps,max_loop_iters,max_curves'"
        ) from None


def load_model(path: Path, limits: ExecLimits = ExecLimits()) -> CADModel:
    """Read a model from native JSON, external JSON, or a script file."""
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".rcad":
        return execute(text, limits)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise JsonFormatError(f"{path.name}: malformed JSON: {exc}") from None
    if isinstance(doc, dict) and doc.get("schema") == SCHEMA:
        return model_from_json(doc)
    return from_external_json(doc)


def _write(path_or_dash, data: str):
    if path_or_dash is None:
        sys.stdout.write(data)
    else:
        Path(path_or_dash).write_text(data, encoding="utf-8")


def cmd_convert(args) -> int:
    limits = _parse_limits(args.limits)
    model = load_model(Path(args.input), limits)
    out = Path(args.output)
    to = args.to
    if to is None:
        to = "script" if out.suffix == ".rcad" else "native"
    if to == "script":
        out.write_text(emit_model(model), encoding="utf-8")
    else:
        out.write_text(model_to_json_str(model), encoding="utf-8")
    return 0


def _pair_paths(pred: Path, gt: Path):
    if pred.is_file() and gt.is_file():
        return [(pred.stem, pred, gt)], []
    exts = (".json", ".rcad")
    preds = {p.stem: p for p in sorted(pred.iterdir()) if p.suffix in exts}
    gts = {p.stem: p for p in sorted(gt.iterdir()) if p.suffix in exts}
    pairs = [(stem, preds[stem], gts[stem]) for stem in sorted(preds) if stem in gts]
    unpaired = sorted(set(preds) ^ set(gts))
    return pairs, unpaired


def cmd_eval(args) -> int:
    limits = _parse_limits(args.limits)
    pairs, unpaired = _pair_paths(Path(args.pred), Path(args.gt))
    if not pairs and not unpaired:
        raise JsonFormatError("no model files found to evaluate")
    lines = []
    reports = []
    for stem, ppath, gpath in pairs:
        gt = load_model(gpath, limits)
        try:
            pred = load_model(ppath, limits)
            report = eval_pair(
                pred,
                gt,
                resolution=args.resolution,
                samples=args.samples,
                seed=args.seed,
                normalize=args.normalize,
            )
        except RecadError as exc:
            from .metrics import MetricReport

            report = MetricReport(valid=False, failure_category=exc.category)
        reports.append(report)
        lines.append(json.dumps({"stem": stem, **report.to_json()}))
    for stem in unpaired:
        logger.warning("unpaired file stem %r counted invalid", stem)
        from .metrics import MetricReport

        reports.append(MetricReport(valid=False, failure_category="unpaired"))
        lines.append(
            json.dumps({"stem": stem, "valid": False, "failure_category": "unpaired"})
        )
    valid = [r for r in reports if r.valid]
    cds = [r.chamfer_x1e3 for r in valid]
    summary = {
        "pairs": len(reports),
        "valid": len(valid),
        "ir": invalidity_ratio(reports),
        "mean_cd_x1e3": float(np.mean(cds)) if cds else None,
        "median_cd_x1e3": float(np.median(cds)) if cds else None,
        "mean_iou_best": float(np.mean([r.iou_best for r in valid])) if valid else None,
        "mean_p_f1": float(np.mean([r.p_f1 for r in valid])) if valid else None,
    }
    _write(args.output, "\n".join(lines) + "\n" if lines else "")
    sys.stdout.write(json.dumps(summary) + "\n")
    return 0


def cmd_reward(args) -> int:
    limits = _parse_limits(args.limits)
    text = Path(args.solution).read_text(encoding="utf-8")
    gt = load_model(Path(args.gt), limits)
    cfg = RewardConfig(
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        tau=args.tau,
        normalize_before=args.normalize,
        resolution=args.resolution,
        strict_zero_on_failure=args.strict,
    )
    breakdown = compute_reward(text, gt, cfg, limits=limits)
    sys.stdout.write(json.dumps(breakdown.to_json()) + "\n")
    return 0


def cmd_curriculum(args) -> int:
    limits = _parse_limits(args.limits)
    root = Path(args.models)
    files = sorted(
        p for p in root.iterdir() if p.suffix in (".json", ".rcad")
    )
    if not files:
        raise JsonFormatError(f"no model files in {root}")
    models = []
    ids = []
    skipped = 0
    for p in files:
        try:
            model = load_model(p, limits)
            report = validate_model(model)
            if not report.ok:
                raise JsonFormatError(f"invalid model: {report.violations[0]}")
        except RecadError as exc:
            skipped += 1
            logger.warning("skipping %s: %s", p.name, exc)
            continue
        models.append(model)
        ids.append(p.stem)
    manifest = build_curriculum(
        models, ids, threshold=args.threshold, resolution=args.dedup_resolution
    )
    lines = []
    for entry in manifest.entries:
        record = entry.to_json()
        if args.emit_guidance:
            gdir = Path(args.emit_guidance)
            gdir.mkdir(parents=True, exist_ok=True)
            from .lang import emit_hardcoded

            gpath = gdir / f"{entry.id.replace(':', '_').replace('.', '-')}.rcad"
            gpath.write_text(emit_hardcoded(entry.primitive), encoding="utf-8")
            record["guidance"] = [str(gpath)]
        lines.append(json.dumps(record))
    _write(args.output, "\n".join(lines) + "\n")
    counts = manifest.level_counts()
    sys.stdout.write(json.dumps({"primitives": len(manifest.entries), "levels": counts, "skipped_models": skipped}) + "\n")
    return 0


def _load_manifest_questions(path: Path, limits: ExecLimits):
    questions = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise JsonFormatError(f"manifest line {line_no}: {exc}") from None
        gt = model_from_json(record["model"])
        guidance = []
        for ref in record.get("guidance", []):
            if isinstance(ref, str) and ref.endswith(".rcad") and Path(ref).exists():
                guidance.append(Path(ref).read_text(encoding="utf-8"))
            else:
                guidance.append(ref)
        questions.append(
            (
                Question(
                    id=record["id"],
                    modality=record.get("modality", "text"),
                    payload=record.get("payload", record["id"]),
                    gt=gt,
                    guidance_codes=tuple(guidance),
                ),
                record.get("hardness"),
            )
        )
    if not questions:
        raise JsonFormatError("manifest holds no entries")
    return questions


def cmd_harness_sim(args) -> int:
    limits = _parse_limits(args.limits)
    entries = _load_manifest_questions(Path(args.manifest), limits)
    policy_doc = json.loads(Path(args.policy).read_text(encoding="utf-8"))
    outcomes = [
        MockOutcome(
            text=o["text"],
            weight=float(o.get("weight", 1.0)),
            guided_weight=o.get("guided_weight"),
            current_weight=o.get("current_weight"),
            ref_weight=o.get("ref_weight"),
        )
        for o in policy_doc["outcomes"]
    ]
    policy = MockPolicy(outcomes)
    reward_cfg = RewardConfig(
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        tau=args.tau,
        normalize_before=args.normalize,
        resolution=args.resolution,
    )
    cache = {}

    def reward_fn(question, text):
        key = (question.id, text)
        if key not in cache:
            cache[key] = compute_reward(text, question.gt, reward_cfg, limits=limits).total
        return cache[key]

    cfg = HarnessConfig(
        beta=args.beta,
        group_size=args.group_size,
        eps=args.eps,
        tau_h=args.tau_h,
        seed=args.seed,
    )
    questions = [q for q, _ in entries]
    hardness = {}
    for q, cached in entries:
        if cached is not None and not args.reclassify_hardness:
            hardness[q.id] = bool(cached)
        else:
            hardness[q.id] = classify_hardness(
                q, policy, reward_fn, cfg.group_size, cfg.tau_h, cfg.seed
            )
    lines = []
    for step in range(args.steps):
        report = mixed_loss(
            questions,
            policy,
            reward_fn,
            cfg,
            hardness=None if args.reclassify_hardness else hardness,
            step=step,
        )
        lines.append(json.dumps(report.to_json()))
    _write(args.output, "\n".join(lines) + "\n")
    hard_count = sum(1 for q in questions if hardness.get(q.id))
    sys.stdout.write(
        json.dumps({"steps": args.steps, "questions": len(questions), "hard": hard_count}) + "\n"
    )
    return 0


def cmd_export(args) -> int:
    limits = _parse_limits(args.limits)
    model = load_model(Path(args.model), limits)
    probe = voxelize(model, max(args.resolution // 4, 8))
    if probe.empty:
        raise EmptySolidError("model composes to an empty solid")
    out = Path(args.output)
    if args.format == "obj":
        out.write_text(mesh_to_obj(model_mesh(model)), encoding="utf-8")
    else:
        grid = voxelize(model, args.resolution)
        out.write_bytes(grid_to_bytes(grid))
    return 0


def _add_common(p, resolution=64):
    p.add_argument("--resolution", type=int, default=resolution, help="voxel grid resolution")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument(
        "--limits",
        default="200000,10000,5000",
        help="script limits: max_steps,max_loop_iters,max_curves",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="recad", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert between model formats")
    p.add_argument("input", help="external JSON, native JSON, or .rcad script")
    p.add_argument("output", help="output path (.json or .rcad)")
    p.add_argument("--to", choices=("native", "script"), help="output format (default: by extension)")
    p.add_argument("--limits", default="200000,10000,5000")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("eval", help="evaluate prediction/ground-truth pairs")
    p.add_argument("pred", help="prediction file or directory")
    p.add_argument("gt", help="ground-truth file or directory")
    p.add_argument("-o", "--output", help="per-pair JSONL path (default stdout)")
    p.add_argument("--samples", type=int, default=2000, help="surface samples per model")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("reward", help="score one solution text against a model")
    p.add_argument("solution", help="solution text file")
    p.add_argument("gt", help="ground-truth model file")
    p.add_argument("--tau", type=float, default=0.55)
    p.add_argument("--lambda1", type=float, default=0.1)
    p.add_argument("--lambda2", type=float, default=0.9)
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--strict", action="store_true", help="zero the whole reward on failure")
    _add_common(p)
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("curriculum", help="build a primitive curriculum manifest")
    p.add_argument("models", help="directory of model files")
    p.add_argument("-o", "--output", help="manifest JSONL path (default stdout)")
    p.add_argument("--threshold", type=float, default=0.95, help="dedup similarity threshold")
    p.add_argument("--dedup-resolution", type=int, default=DEDUP_RESOLUTION)
    p.add_argument("--emit-guidance", metavar="DIR", help="write hardcoded guidance scripts here")
    p.add_argument("--limits", default="200000,10000,5000")
    p.set_defaults(func=cmd_curriculum)

    p = sub.add_parser("harness-sim", help="simulate guided GRPO over a mock policy")
    p.add_argument("--manifest", required=True, help="curriculum/question manifest JSONL")
    p.add_argument("--policy", required=True, help="mock policy config JSON")
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--beta", type=float, required=True, help="KL weight")
    p.add_argument("--eps", type=float, default=0.2, help="clip range")
    p.add_argument("--tau-h", type=float, default=0.8, help="hardness threshold")
    p.add_argument("--tau", type=float, default=0.55)
    p.add_argument("--lambda1", type=float, default=0.1)
    p.add_argument("--lambda2", type=float, default=0.9)
    p.add_argument("--group-size", type=int, default=8)
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--reclassify-hardness", action="store_true")
    p.add_argument("-o", "--output", help="TrainStepReport JSONL path (default stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_harness_sim)

    p = sub.add_parser("export", help="export a model to OBJ or voxel binary")
    p.add_argument("model", help="model file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=("obj", "voxel"), required=True)
    _add_common(p, resolution=64)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("RECAD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RecadError as exc:
        sys.stderr.write(json.dumps({"error": exc.category, "message": str(exc)}) + "\n")
        return 2
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "io", "message": str(exc)}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
