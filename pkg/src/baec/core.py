"""Problem parameters, derived constants and per-arm state."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Mapping


class ValidationError(ValueError):
    """Invalid user input. ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class InvariantViolation(RuntimeError):
    """A guaranteed property of the algorithm was broken. Never expected."""


@dataclass(frozen=True)
class DerivedConstants:
    big_delta: float
    n_delta_cap: int
    alpha: float
    theta: float
    t_delta: int
    n_delta_floor: int
    # ln(K N_delta / delta) and ln(N_delta / delta), shared by every bound evaluation
    log_lower: float
    log_upper: float


def _derive(k: int, theta_l: float, theta_u: float, delta: float) -> DerivedConstants:
    big_delta = theta_u - theta_l
    d2 = big_delta * big_delta
    n_cap = math.ceil(
        2.0 * math.e / ((math.e - 1.0) * d2) * math.log(2.0 * math.sqrt(k) / (d2 * delta))
    )
    log_upper = math.log(n_cap / delta)
    log_lower = math.log(k * n_cap / delta)
    alpha = math.sqrt(1.0 + math.log(k) / log_upper)
    theta = theta_u - big_delta / (1.0 + alpha)
    t_delta = math.ceil(2.0 / d2 * math.log(math.sqrt(k) * n_cap / delta))
    n_floor = math.ceil(log_upper / (2.0 * max(theta_u, 1.0 - theta_l) ** 2))
    return DerivedConstants(
        big_delta=big_delta,
        n_delta_cap=n_cap,
        alpha=alpha,
        theta=theta,
        t_delta=t_delta,
        n_delta_floor=n_floor,
        log_lower=log_lower,
        log_upper=log_upper,
    )


@dataclass(frozen=True)
class ProblemSpec:
    """A (Delta, delta) bad-arm-existence-checking instance.

    Derived constants are computed once at construction and exposed as
    ``spec.consts``.
    """

    k: int
    theta_l: float
    theta_u: float
    delta: float
    consts: DerivedConstants = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, int):
            raise ValidationError("k", f"must be an integer, got {self.k!r}")
        if self.k < 1:
            raise ValidationError("k", f"must be >= 1, got {self.k}")
        for name in ("theta_l", "theta_u", "delta"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ValidationError(name, f"must be a finite real, got {v!r}")
        if not 0.0 < self.theta_l < 1.0:
            raise ValidationError("theta_l", f"must lie in (0, 1), got {self.theta_l}")
        if not 0.0 < self.theta_u < 1.0:
            raise ValidationError("theta_u", f"must lie in (0, 1), got {self.theta_u}")
        if not self.theta_l < self.theta_u:
            raise ValidationError("theta_u", f"must exceed theta_l ({self.theta_u} <= {self.theta_l})")
        if not 0.0 < self.delta < 0.5:
            raise ValidationError("delta", f"must lie in (0, 0.5), got {self.delta}")
        object.__setattr__(
            self, "consts", _derive(self.k, float(self.theta_l), float(self.theta_u), float(self.delta))
        )

    def with_k(self, k: int) -> "ProblemSpec":
        return replace(self, k=k)

    def to_record(self) -> dict[str, str]:
        # repr() of a float is the shortest decimal that round-trips exactly
        return {
            "k": str(self.k),
            "theta_l": repr(float(self.theta_l)),
            "theta_u": repr(float(self.theta_u)),
            "delta": repr(float(self.delta)),
        }

    @classmethod
    def from_record(cls, record: Mapping[str, object]) -> "ProblemSpec":
        missing = [key for key in ("k", "theta_l", "theta_u", "delta") if key not in record]
        if missing:
            raise ValidationError(missing[0], "missing from record")
        try:
            k = int(Decimal(str(record["k"])))
        except Exception as exc:
            raise ValidationError("k", f"not an integer: {record['k']!r}") from exc
        if Decimal(str(record["k"])) != k:
            raise ValidationError("k", f"not an integer: {record['k']!r}")
        values = {}
        for key in ("theta_l", "theta_u", "delta"):
            try:
                values[key] = float(str(record[key]))
            except ValueError as exc:
                raise ValidationError(key, f"not a number: {record[key]!r}") from exc
        return cls(k=k, **values)


def derive_constants(spec: ProblemSpec) -> DerivedConstants:
    return spec.consts


@dataclass(frozen=True)
class ArmState:
    draws: int
    mean: float
    active: bool = True

    @classmethod
    def initial(cls, theta: float) -> "ArmState":
        return cls(draws=0, mean=theta, active=True)


def running_mean(mean: float, draws: int, loss: float) -> float:
    """Incremental mean after appending ``loss`` to ``draws`` observations."""
    return (mean * draws + loss) / (draws + 1)


def update_mean(state: ArmState, loss: float) -> ArmState:
    if not 0.0 <= loss <= 1.0:
        raise ValidationError("loss", f"must lie in [0, 1], got {loss}")
    return ArmState(draws=state.draws + 1, mean=running_mean(state.mean, state.draws, loss), active=state.active)
