"""Arm-selection index functions.

Each index maps (global round ``t``, arm state) to a score; the engine draws
the active arm with the largest score, lowest arm id on ties.  ``math.inf``
stands for the "not yet drawn" score of UCB and LUCB.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import ArmState, ValidationError


class PolicyKind(enum.Enum):
    APT_P = "apt_p"
    UCB = "ucb"
    LUCB = "lucb"

    @classmethod
    def parse(cls, value: "str | PolicyKind") -> "PolicyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError("policy", f"unknown policy {value!r}; choose from apt_p, ucb, lucb") from None


@dataclass(frozen=True)
class PolicyContext:
    global_time: int
    theta: float
    k: int
    delta: float

    def __post_init__(self):
        if self.global_time < 1:
            raise ValidationError("global_time", "rounds are counted from 1")


def index_apt_p(ctx: PolicyContext, arm: ArmState) -> float:
    # sqrt(0) * (theta - theta) is exactly 0 for an undrawn arm
    return math.sqrt(arm.draws) * (arm.mean - ctx.theta)


def index_ucb(ctx: PolicyContext, arm: ArmState) -> float:
    if arm.draws == 0:
        return math.inf
    return arm.mean + math.sqrt(math.log(ctx.global_time) / (2 * arm.draws))


def index_lucb(ctx: PolicyContext, arm: ArmState) -> float:
    if arm.draws == 0:
        return math.inf
    t = ctx.global_time
    if t % 2 == 1:
        return arm.mean
    tf = float(t)
    # explicit product rather than pow(): keeps the compiled kernel bit-identical
    return arm.mean + math.sqrt(math.log(5.0 * ctx.k * (tf * tf * tf * tf) / (4.0 * ctx.delta)) / (2 * arm.draws))


INDEX_FUNCTIONS: dict[PolicyKind, Callable[[PolicyContext, ArmState], float]] = {
    PolicyKind.APT_P: index_apt_p,
    PolicyKind.UCB: index_ucb,
    PolicyKind.LUCB: index_lucb,
}


def select_arm(policy: PolicyKind, ctx: PolicyContext, arms: Sequence[ArmState]) -> int:
    """Position in ``arms`` of the active arm with the largest index."""
    index = INDEX_FUNCTIONS[policy]
    best = -1
    best_value = -math.inf
    for i, arm in enumerate(arms):
        if not arm.active:
            continue
        value = index(ctx, arm)
        if best < 0 or value > best_value:
            best, best_value = i, value
    if best < 0:
        raise ValidationError("arms", "no active arm to select")
    return best
