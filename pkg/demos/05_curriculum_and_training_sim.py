"""Curriculum building and a desk-scale guided training simulation.

A mock categorical policy stands in for the language model: good enough
to exercise hardness gating, guided rollouts, and the group-relative
objective end to end.
"""

import sys

from recad import (
    HarnessConfig,
    MockOutcome,
    MockPolicy,
    Question,
    RewardConfig,
    build_curriculum,
    classify_hardness,
    compute_reward,
    emit_model,
    mixed_loss,
    rewrite_filter,
)
from recad.lang import emit_hardcoded

sys.path.insert(0, "tests")
from conftest import box_model, cube_minus_cylinder, cylinder_model

# 1. Curriculum: primitives ordered loops -> faces -> sketches -> pairs
#    -> models, by curve count within each stage.
corpus = [box_model(0.8, 0.5), cylinder_model(0.35, 0.6), cube_minus_cylinder()]
manifest = build_curriculum(corpus, model_ids=["plate", "puck", "bracket"])
print("curriculum:", [(e.level, e.curve_count, e.source) for e in manifest.entries])

# 2. Candidate filtering: keep rewrites that still match the reference.
ref = manifest.entries[-1].primitive
good_code = emit_hardcoded(ref)
kept = rewrite_filter(ref, ["broken (", good_code])
print("rewrite filter kept", len(kept), "of 2 candidates")

# 3. Hardness gating + mixed objective over a mock policy.
gt = box_model(0.8, 0.5)
good = "<think>plate</think>\n```python\n" + emit_model(gt) + "```\n"
policy = MockPolicy(
    [
        MockOutcome(good, weight=0.25, guided_weight=0.85),
        MockOutcome("<think>hmm</think>\n```python\nbroken (\n```", weight=0.25),
        MockOutcome("no structure", weight=0.5, guided_weight=0.05),
    ]
)
rcfg = RewardConfig(resolution=32)
cache = {}


def reward_fn(question, text):
    if text not in cache:
        cache[text] = compute_reward(text, question.gt, rcfg).total
    return cache[text]


question = Question("plate", "text", "a thin square plate", gt, (good_code,))
hard = classify_hardness(question, policy, reward_fn, n=8, tau_h=0.8, seed=0)
print("classified hard:", hard)

cfg = HarnessConfig(beta=0.05, group_size=8, seed=0)
for step in range(3):
    report = mixed_loss([question], policy, reward_fn, cfg, hardness={"plate": True}, step=step)
    q = report.questions[0]
    print(
        f"step {step}: objective {report.objective:+.4f}  guided {q.guided_count} "
        f"reward mean {q.reward_mean:.3f} max {q.reward_max:.3f}"
    )
