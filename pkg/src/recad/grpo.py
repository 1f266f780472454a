"""Group-relative policy optimization math over an abstract policy.

Implements group-normalized advantages, the clipped surrogate, the plain
and guidance-mixed objectives, hard-question gating, and batch dispatch.
Everything is computable at desk scale against a seedable categorical
mock policy, whose enumerable support lets tests compare objectives with
exhaustive-expectation oracles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .lang import parse
from .model import CADModel, validate_model

logger = logging.getLogger("recad.grpo")

EPS_STD = 1e-8


@dataclass(frozen=True)
class Question:
    """One training question: a prompt, its ground truth, and guidance codes."""

    id: str
    modality: str  # "text" | "image"
    payload: str
    gt: CADModel
    guidance_codes: tuple = ()

    def __post_init__(self):
        if self.modality not in ("text", "image"):
            raise ValueError(f"modality must be text|image, got {self.modality!r}")
        report = validate_model(self.gt)
        if not report.ok:
            raise ValidationError(report)
        for code in self.guidance_codes:
            parse(code)  # guidance must at least be well-formed


@dataclass(frozen=True)
class Rollout:
    """One sampled solution with per-token log-probabilities.

    ``logp_new`` is log pi_theta(token | question, prefix); ``logp_old``
    is the sampling policy's log-probability in its own context, which
    for guided rollouts additionally conditions on the guidance code.
    """

    tokens: tuple
    logp_new: tuple
    logp_old: tuple
    solution_text: str
    reward: float = math.nan
    guided: bool = False
    guidance_index: Optional[int] = None

    def __post_init__(self):
        if not (len(self.tokens) == len(self.logp_new) == len(self.logp_old)):
            raise ValueError("token and log-probability lengths differ")
        if len(self.tokens) < 1:
            raise ValueError("rollout must have at least one token")
        if self.guided and self.guidance_index is None:
            raise ValueError("guided rollout must record its guidance index")


@dataclass
class Group:
    question_id: str
    rollouts: list
    advantages: Optional[np.ndarray] = None


def group_advantages(rewards: Sequence[float]) -> np.ndarray:
    """Rewards normalized within the group: (R - mean) / population std.

    The divisor is max(std, 1e-8): the guard only engages for degenerate
    all-equal groups, leaving regular advantages exactly unit-variance.
    """
    r = np.asarray(rewards, dtype=float)
    if len(r) < 2:
        raise ValueError("advantage normalization needs at least 2 rewards")
    if np.all(r == r[0]):
        return np.zeros(len(r))
    mean = float(np.mean(r))
    std = float(np.std(r))
    return (r - mean) / max(std, EPS_STD)


def clip_term(r: float, advantage: float, eps: float) -> float:
    """min(r * A, clip(r, 1-eps, 1+eps) * A) of the clipped surrogate."""
    clipped = min(max(r, 1.0 - eps), 1.0 + eps)
    return min(r * advantage, clipped * advantage)


def _rollout_term(rollout: Rollout, advantage: float, eps: float) -> float:
    new = np.asarray(rollout.logp_new, dtype=float)
    old = np.asarray(rollout.logp_old, dtype=float)
    ratios = np.exp(new - old)
    terms = [clip_term(float(r), advantage, eps) for r in ratios]
    return float(np.mean(terms))


def grpo_objective(group: Group, eps: float, beta: float, kl: float) -> float:
    """Mean over rollouts of per-token-averaged clipped terms, minus beta*KL."""
    if not group.rollouts:
        raise ValueError("group has no rollouts")
    adv = group.advantages
    if adv is None:
        adv = group_advantages([ro.reward for ro in group.rollouts])
    terms = [
        _rollout_term(ro, float(a), eps) for ro, a in zip(group.rollouts, adv)
    ]
    return float(np.mean(terms)) - beta * kl


def guided_objective(
    on_policy: Sequence[Rollout],
    guided: Sequence[Rollout],
    eps: float,
    beta: float,
    kl: float,
) -> float:
    """Two-pool objective: on-policy clip mean plus guided clip mean.

    Advantages are normalized jointly over the union of both pools.  The
    guided ratios already carry the mismatched contexts in their stored
    log-probabilities (numerator without guidance, denominator with).
    """
    if len(guided) < 1:
        raise ValueError("guided_objective requires at least one guided rollout")
    rollouts = list(on_policy) + list(guided)
    adv = group_advantages([ro.reward for ro in rollouts])
    adv_on = adv[: len(on_policy)]
    adv_g = adv[len(on_policy):]
    term_on = 0.0
    if len(on_policy):
        term_on = float(
            np.mean(
                [_rollout_term(ro, float(a), eps) for ro, a in zip(on_policy, adv_on)]
            )
        )
    term_g = float(
        np.mean([_rollout_term(ro, float(a), eps) for ro, a in zip(guided, adv_g)])
    )
    return term_on + term_g - beta * kl


# ---------------------------------------------------------------------------
# Policies


class PolicyInterface:
    """Minimal policy surface the harness needs.

    ``sample`` draws one rollout (optionally conditioned on a guidance
    code); ``logprob`` scores a token sequence under the current policy
    without guidance.  A reference snapshot supports KL estimation.
    """

    def sample(self, question: Question, guidance: Optional[str], seed: int) -> Rollout:
        raise NotImplementedError

    def logprob(self, tokens: tuple, question: Question) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class MockOutcome:
    """One element of the mock policy's finite support."""

    text: str
    weight: float
    guided_weight: Optional[float] = None
    current_weight: Optional[float] = None
    ref_weight: Optional[float] = None


class MockPolicy(PolicyInterface):
    """Seedable categorical policy over a finite set of solution texts.

    Four distributions share the support: the sampling ("old") weights,
    optional guided sampling weights, optional current weights (to model
    a policy that has drifted from the sampler), and optional reference
    weights for exact KL.  Unset ones default to the sampling weights.
    """

    def __init__(self, outcomes: Sequence[MockOutcome]):
        if not outcomes:
            raise ValueError("mock policy needs at least one outcome")
        self.outcomes = list(outcomes)
        w = np.array([o.weight for o in outcomes], dtype=float)
        self.p_old = w / w.sum()
        g = np.array(
            [o.guided_weight if o.guided_weight is not None else o.weight for o in outcomes],
            dtype=float,
        )
        self.p_guided = g / g.sum()
        c = np.array(
            [o.current_weight if o.current_weight is not None else o.weight for o in outcomes],
            dtype=float,
        )
        self.p_current = c / c.sum()
        r = np.array(
            [o.ref_weight if o.ref_weight is not None else c_ for o, c_ in zip(outcomes, c)],
            dtype=float,
        )
        self.p_ref = r / r.sum()

    def sample(self, question: Question, guidance: Optional[str], seed: int) -> Rollout:
        dist = self.p_guided if guidance is not None else self.p_old
        rng = np.random.default_rng(seed)
        k = int(rng.choice(len(self.outcomes), p=dist))
        return Rollout(
            tokens=(k,),
            logp_new=(float(np.log(self.p_current[k])),),
            logp_old=(float(np.log(dist[k])),),
            solution_text=self.outcomes[k].text,
            guided=guidance is not None,
            guidance_index=0 if guidance is not None else None,
        )

    def logprob(self, tokens: tuple, question: Question) -> np.ndarray:
        return np.array([float(np.log(self.p_current[k])) for k in tokens])

    def exact_kl(self) -> float:
        """Exact categorical KL(current || reference)."""
        p, q = self.p_current, self.p_ref
        return float(np.sum(p * (np.log(p) - np.log(q))))


class KLEstimator:
    def estimate(self, policy, question: Question, rollouts: Sequence[Rollout]) -> float:
        raise NotImplementedError


class ExactCategoricalKL(KLEstimator):
    """Closed-form KL for policies exposing ``exact_kl`` (the mock)."""

    def estimate(self, policy, question, rollouts) -> float:
        return policy.exact_kl()


class ZeroKL(KLEstimator):
    def estimate(self, policy, question, rollouts) -> float:
        return 0.0


# ---------------------------------------------------------------------------
# Hardness and dispatch


def classify_hardness(
    question: Question,
    policy: PolicyInterface,
    reward_fn: Callable[[Question, str], float],
    n: int = 8,
    tau_h: float = 0.8,
    seed: int = 0,
) -> bool:
    """Hard iff the best of ``n`` sampled rewards stays below ``tau_h``."""
    if n < 1:
        raise ValueError("need n >= 1 samples")
    best = -math.inf
    for i in range(n):
        ro = policy.sample(question, None, seed + i)
        best = max(best, reward_fn(question, ro.solution_text))
    return best < tau_h


@dataclass(frozen=True)
class HarnessConfig:
    """Training-step knobs; ``beta`` must be chosen by the caller."""

    beta: float
    group_size: int = 8
    eps: float = 0.2
    tau_h: float = 0.8
    seed: int = 0
    kl: KLEstimator = field(default_factory=ZeroKL)


@dataclass
class QuestionReport:
    id: str
    hard: bool
    guided_count: int
    objective: float
    reward_mean: float
    reward_max: float

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "hard": self.hard,
            "guided": self.guided_count,
            "objective": self.objective,
            "reward_mean": self.reward_mean,
            "reward_max": self.reward_max,
        }


@dataclass
class TrainStepReport:
    step: int
    objective: float
    questions: list

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "objective": self.objective,
            "questions": [q.to_json() for q in self.questions],
        }


def sample_group(
    question: Question,
    policy: PolicyInterface,
    reward_fn: Callable[[Question, str], float],
    n: int,
    seed: int,
    use_guidance: bool,
):
    """Draw a group: guided slots take one rollout per guidance code,
    capped at n-1 so at least one on-policy rollout remains."""
    guidance = question.guidance_codes if use_guidance else ()
    n_guided = min(len(guidance), n - 1)
    on_policy = []
    for i in range(n - n_guided):
        ro = policy.sample(question, None, seed + i)
        on_policy.append(replace(ro, reward=reward_fn(question, ro.solution_text)))
    guided = []
    for j in range(n_guided):
        ro = policy.sample(question, guidance[j], seed + (n - n_guided) + j)
        guided.append(
            replace(ro, reward=reward_fn(question, ro.solution_text), guidance_index=j)
        )
    return on_policy, guided


def mixed_loss(
    batch: Sequence[Question],
    policy: PolicyInterface,
    reward_fn: Callable[[Question, str], float],
    cfg: HarnessConfig,
    hardness: Optional[dict] = None,
    step: int = 0,
) -> TrainStepReport:
    """Dispatch each question to the guided or plain objective.

    Hard questions (precomputed in ``hardness`` or classified here) use
    guidance when they have any; a hard question without guidance falls
    back to the plain objective with a logged warning.  The batch
    expectation is estimated by the uniform mean.
    """
    if not batch:
        raise ValueError("batch must not be empty")
    reports = []
    for qi, question in enumerate(batch):
        qseed = cfg.seed + 10_000 * step + 100 * qi
        if hardness is not None and question.id in hardness:
            hard = bool(hardness[question.id])
        else:
            hard = classify_hardness(
                question, policy, reward_fn, cfg.group_size, cfg.tau_h, qseed
            )
        use_guidance = hard
        if hard and not question.guidance_codes:
            logger.warning("hard question %s has no guidance codes", question.id)
            use_guidance = False
        on_policy, guided = sample_group(
            question, policy, reward_fn, cfg.group_size, qseed + 1_000, use_guidance
        )
        rollouts = on_policy + guided
        kl = cfg.kl.estimate(policy, question, rollouts)
        if guided:
            objective = guided_objective(on_policy, guided, cfg.eps, cfg.beta, kl)
        else:
            objective = grpo_objective(
                Group(question.id, rollouts), cfg.eps, cfg.beta, kl
            )
        rewards = [ro.reward for ro in rollouts]
        reports.append(
            QuestionReport(
                id=question.id,
                hard=hard,
                guided_count=len(guided),
                objective=objective,
                reward_mean=float(np.mean(rewards)),
                reward_max=float(np.max(rewards)),
            )
        )
    mean_obj = float(np.mean([r.objective for r in reports]))
    return TrainStepReport(step=step, objective=mean_obj, questions=reports)
