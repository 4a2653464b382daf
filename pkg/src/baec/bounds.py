"""Confidence-bound families and closed-form draw-count constants."""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

from .core import DerivedConstants, ProblemSpec, ValidationError


class BoundFamily(enum.Enum):
    ASYMMETRIC = "asym"
    SYMMETRIC = "sym"

    @classmethod
    def parse(cls, value: "str | BoundFamily") -> "BoundFamily":
        if isinstance(value, cls):
            return value
        aliases = {"asym": cls.ASYMMETRIC, "asymmetric": cls.ASYMMETRIC, "sym": cls.SYMMETRIC, "symmetric": cls.SYMMETRIC}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValidationError("bounds", f"unknown bound family {value!r}") from None


class BoundPair(NamedTuple):
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _check_n(n: int) -> None:
    if n < 1:
        raise ValidationError("n", "bounds are undefined before the first draw")


def asymmetric_radii(n: int, consts: DerivedConstants) -> tuple[float, float]:
    """(lower radius, upper radius) of the Delta-dependent bounds at ``n`` draws."""
    _check_n(n)
    return math.sqrt(consts.log_lower / (2 * n)), math.sqrt(consts.log_upper / (2 * n))


def asymmetric_bounds(mean: float, n: int, consts: DerivedConstants, k: int | None = None) -> BoundPair:
    # k is folded into consts.log_lower already; accepted for call-site symmetry
    r_lo, r_up = asymmetric_radii(n, consts)
    return BoundPair(mean - r_lo, mean + r_up)


def symmetric_radius(n: int, delta: float, k: int) -> float:
    _check_n(n)
    return math.sqrt(math.log(2.0 * k * n * n / delta) / (2 * n))


def symmetric_bounds(mean: float, n: int, delta: float, k: int) -> BoundPair:
    r = symmetric_radius(n, delta, k)
    return BoundPair(mean - r, mean + r)


def bounds_for(family: BoundFamily, mean: float, n: int, spec: ProblemSpec) -> BoundPair:
    if family is BoundFamily.ASYMMETRIC:
        return asymmetric_bounds(mean, n, spec.consts)
    return symmetric_bounds(mean, n, spec.delta, spec.k)


def per_arm_gap(spec: ProblemSpec, mu: float) -> float:
    """Delta_i: distance to the threshold the arm is judged against."""
    if mu >= spec.consts.theta:
        return mu - spec.theta_l
    return spec.theta_u - mu


def t_delta_i(spec: ProblemSpec, mu: float) -> int:
    if not 0.0 <= mu <= 1.0:
        raise ValidationError("mu", f"must lie in [0, 1], got {mu}")
    gap = per_arm_gap(spec, mu)
    if gap <= 0.0:
        raise ValidationError("mu", f"unbounded per-arm complexity (Delta_i = {gap})")
    c = spec.consts
    return math.ceil(2.0 / (gap * gap) * math.log(math.sqrt(spec.k) * c.n_delta_cap / spec.delta))


def t_double_delta(spec: ProblemSpec) -> int:
    """Draw count the symmetric stopping rule can be forced to exceed."""
    d = spec.consts.big_delta
    return math.floor(2.0 / (d * d) * math.log(448.0 * spec.k / (d**4 * spec.delta)))


def worst_case_gap_bound(spec: ProblemSpec) -> float:
    """Closed-form lower bound on t_double_delta - t_delta."""
    d2 = spec.consts.big_delta ** 2
    rk = math.sqrt(spec.k)
    return 2.0 / d2 * (math.log(52.0 * rk / d2) - math.log(math.log(3.0 * rk / (d2 * spec.delta))))


def crossover_draws(consts: DerivedConstants) -> float:
    """Asymmetric width is below the symmetric width from this many draws on."""
    return math.sqrt(consts.n_delta_cap / 2.0)
