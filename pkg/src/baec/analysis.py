"""Information-theoretic lower bounds and closed-form sample-complexity bounds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

from .bounds import per_arm_gap, t_delta_i
from .core import ProblemSpec, ValidationError


def bernoulli_kl(x: float, y: float) -> float:
    """KL divergence between Bernoulli(x) and Bernoulli(y), with 0 ln 0 = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValidationError("x", f"must lie in [0, 1], got {x}")
    if not 0.0 <= y <= 1.0:
        raise ValidationError("y", f"must lie in [0, 1], got {y}")
    if x == y:
        return 0.0
    if y in (0.0, 1.0):
        return math.inf
    out = 0.0
    if x > 0.0:
        out += x * math.log(x / y)
    if x < 1.0:
        out += (1.0 - x) * math.log((1.0 - x) / (1.0 - y))
    return max(out, 0.0)


def _prefactor(delta: float) -> float:
    return (1.0 - 2.0 * delta) * math.log((1.0 - delta) / delta)


def lower_bound_positive(spec: ProblemSpec, means: Sequence[float]) -> float:
    """Expected-draw lower bound when some arm is positive; any algorithm must exceed it."""
    top = max(means)
    if top < spec.theta_u:
        raise ValidationError("means", f"no positive arm (max mean {top} < theta_u {spec.theta_u})")
    d = bernoulli_kl(top, spec.theta_l)
    if d == 0.0 or math.isinf(d):
        raise ValidationError("means", f"divergence d({top}, {spec.theta_l}) = {d}; bound undefined")
    return _prefactor(spec.delta) / d


def lower_bound_negative(spec: ProblemSpec, means: Sequence[float]) -> float:
    """Expected-draw lower bound when every arm is negative."""
    if max(means) >= spec.theta_l:
        raise ValidationError("means", "not every arm is negative")
    total = 0.0
    for mu in means:
        d = bernoulli_kl(mu, spec.theta_u)
        if d == 0.0 or math.isinf(d):
            raise ValidationError("means", f"divergence d({mu}, {spec.theta_u}) = {d}; bound undefined")
        total += 1.0 / d
    return _prefactor(spec.delta) * total


@dataclass(frozen=True)
class ComplexityReport:
    regime: str  # "positive", "negative" or "neutral"
    lower_bound_positive: float | None
    lower_bound_negative: float | None
    worst_case: int
    high_prob_positive: int | None
    high_prob_negative: int | None
    expected_upper_leading: float
    # lower-order remainder of the expected-time bound is not evaluated
    leading_terms_only: bool = True

    def as_rows(self) -> list[tuple[str, str]]:
        rows = []
        for key, value in asdict(self).items():
            if key == "leading_terms_only":
                continue
            if value is None:
                text = "n/a"
            elif key == "expected_upper_leading":
                text = f"{value:.2f} + lower-order"
            elif isinstance(value, float):
                text = f"{value:.4f}"
            else:
                text = str(value)
            rows.append((key, text))
        return rows


def regime(spec: ProblemSpec, means: Sequence[float]) -> str:
    top = max(means)
    if top >= spec.theta_u:
        return "positive"
    if top < spec.theta_l:
        return "negative"
    return "neutral"


def lower_bound(spec: ProblemSpec, means: Sequence[float]) -> tuple[float | None, float | None]:
    """(positive-case bound, negative-case bound); the inapplicable one is None."""
    kind = regime(spec, means)
    if kind == "positive":
        return lower_bound_positive(spec, means), None
    if kind == "negative":
        return None, lower_bound_negative(spec, means)
    return None, None


def expected_upper_leading(spec: ProblemSpec, means: Sequence[float]) -> float:
    """Leading terms of the expected stopping-time bound, remainder excluded."""
    c = spec.consts
    gaps = [per_arm_gap(spec, mu) for mu in means]
    if any(g <= 0.0 for g in gaps):
        raise ValidationError("means", "a per-arm gap is zero; bound undefined")
    total = sum(1.0 / (g * g) for g in gaps)
    above = sum(1.0 / (g * g) for mu, g in zip(means, gaps) if mu >= c.theta)
    return 0.5 * c.log_upper * total + 0.5 * math.log(spec.k) * above


def upper_bounds(spec: ProblemSpec, means: Sequence[float]) -> dict[str, float | int | None]:
    if len(means) != spec.k:
        raise ValidationError("means", f"{len(means)} means given for k={spec.k}")
    c = spec.consts
    per_arm = [t_delta_i(spec, mu) for mu in means]
    positives = [t for mu, t in zip(means, per_arm) if mu >= spec.theta_u]
    kind = regime(spec, means)
    return {
        "worst_case": spec.k * c.t_delta,
        "high_prob_positive": max(positives) + (spec.k - 1) * c.t_delta if positives else None,
        "high_prob_negative": sum(per_arm) if kind == "negative" else None,
        "expected_upper_leading": expected_upper_leading(spec, means),
    }


def complexity_report(spec: ProblemSpec, means: Sequence[float]) -> ComplexityReport:
    lb_pos, lb_neg = lower_bound(spec, means)
    ub = upper_bounds(spec, means)
    return ComplexityReport(
        regime=regime(spec, means),
        lower_bound_positive=lb_pos,
        lower_bound_negative=lb_neg,
        **ub,
    )


def asymptotic_coefficients(spec: ProblemSpec, means: Sequence[float]) -> dict[str, float]:
    """Dominant 1/ln(1/delta) coefficients of the policy-specific expected-time bounds.

    ``apt_p_worst`` is 1/(2 gap_m^2) for the weakest arm above theta; ``ucb``
    is (#arms tied at the top mean) / (2 gap_1^2); ``optimal`` is 1/(2 gap_1^2).
    """
    c = spec.consts
    above = sorted((mu for mu in means if mu >= c.theta), reverse=True)
    if not above:
        raise ValidationError("means", "no arm has mean >= theta")
    top_gap = per_arm_gap(spec, above[0])
    weakest_gap = per_arm_gap(spec, above[-1])
    ties = sum(1 for mu in means if mu == above[0])
    return {
        "optimal": 1.0 / (2 * top_gap**2),
        "apt_p_worst": 1.0 / (2 * weakest_gap**2),
        "ucb": ties / (2 * top_gap**2),
    }
