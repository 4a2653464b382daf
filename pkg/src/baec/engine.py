"""The bad-arm-existence-checking loop.

``run`` draws the active arm with the largest policy index, updates its mean,
and then judges it: lower bound >= theta_L ends the run with a positive
verdict; otherwise upper bound < theta_U removes the arm.  When no active arm
is left the verdict is negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .bounds import BoundFamily, bounds_for
from .core import ArmState, InvariantViolation, ProblemSpec, ValidationError, running_mean
from .env import BernoulliEnv, Environment
from .policies import PolicyContext, PolicyKind, select_arm


class Verdict(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Action(enum.Enum):
    CONTINUE = "continue"
    JUDGED_NEGATIVE = "judged_negative"
    JUDGED_POSITIVE = "judged_positive"


class StepEvent(NamedTuple):
    t: int
    arm: int
    loss: float
    n_after: int
    mean_after: float
    lower: float
    upper: float
    action: Action


STEP_FIELDS = StepEvent._fields

TraceSink = Callable[[StepEvent], None]


@dataclass(frozen=True)
class RunRecord:
    verdict: Verdict
    stopping_time: int
    per_arm_draws: tuple[int, ...]
    judged_negative: frozenset[int]
    positive_arm: int | None
    final_means: tuple[float, ...]
    trace: tuple[StepEvent, ...] | None = None

    @property
    def arm_states(self) -> tuple[ArmState, ...]:
        return tuple(
            ArmState(draws=n, mean=m, active=i not in self.judged_negative)
            for i, (n, m) in enumerate(zip(self.per_arm_draws, self.final_means))
        )

    @property
    def judged_arms(self) -> frozenset[int]:
        if self.positive_arm is None:
            return self.judged_negative
        return self.judged_negative | {self.positive_arm}


_POLICY_CODES = {PolicyKind.APT_P: _kernels.APT_P, PolicyKind.UCB: _kernels.UCB, PolicyKind.LUCB: _kernels.LUCB}
_FAMILY_CODES = {BoundFamily.ASYMMETRIC: _kernels.ASYMMETRIC, BoundFamily.SYMMETRIC: _kernels.SYMMETRIC}


def check_record(spec: ProblemSpec, family: BoundFamily, record: RunRecord) -> None:
    """Raise InvariantViolation if ``record`` breaks a guaranteed property."""
    if record.stopping_time != sum(record.per_arm_draws):
        raise InvariantViolation(
            f"stopping time {record.stopping_time} != total draws {sum(record.per_arm_draws)}"
        )
    if family is not BoundFamily.ASYMMETRIC:
        return
    c = spec.consts
    for i, n in enumerate(record.per_arm_draws):
        if n > c.t_delta:
            raise InvariantViolation(f"arm {i} drawn {n} times, above the per-arm cap {c.t_delta}")
    if record.stopping_time > spec.k * c.t_delta:
        raise InvariantViolation(f"run used {record.stopping_time} draws, above K*T = {spec.k * c.t_delta}")
    for i in record.judged_arms:
        if record.per_arm_draws[i] < c.n_delta_floor:
            raise InvariantViolation(
                f"arm {i} judged after {record.per_arm_draws[i]} draws, below the floor {c.n_delta_floor}"
            )


def _run_python(
    spec: ProblemSpec,
    policy: PolicyKind,
    family: BoundFamily,
    env: Environment,
    sink: TraceSink | None,
) -> RunRecord:
    theta = spec.consts.theta
    arms = [ArmState.initial(theta) for _ in range(spec.k)]
    negatives: set[int] = set()
    remaining = spec.k
    t = 1
    while remaining > 0:
        ctx = PolicyContext(global_time=t, theta=theta, k=spec.k, delta=spec.delta)
        i = select_arm(policy, ctx, arms)
        arm = arms[i]
        loss = env.draw(i, arm.draws + 1)
        if not 0.0 <= loss <= 1.0:
            raise ValidationError("loss", f"environment produced {loss} outside [0, 1]")
        arm = ArmState(draws=arm.draws + 1, mean=running_mean(arm.mean, arm.draws, loss), active=True)
        lower, upper = bounds_for(family, arm.mean, arm.draws, spec)
        if lower >= spec.theta_l:
            action = Action.JUDGED_POSITIVE
        elif upper < spec.theta_u:
            action = Action.JUDGED_NEGATIVE
            arm = ArmState(arm.draws, arm.mean, active=False)
            negatives.add(i)
            remaining -= 1
        else:
            action = Action.CONTINUE
        arms[i] = arm
        if sink is not None:
            sink(StepEvent(t, i, loss, arm.draws, arm.mean, lower, upper, action))
        if action is Action.JUDGED_POSITIVE:
            return _record(Verdict.POSITIVE, arms, negatives, i)
        t += 1
    return _record(Verdict.NEGATIVE, arms, negatives, None)


def _record(verdict: Verdict, arms: Sequence[ArmState], negatives: set[int], positive_arm: int | None) -> RunRecord:
    draws = tuple(a.draws for a in arms)
    return RunRecord(
        verdict=verdict,
        stopping_time=sum(draws),
        per_arm_draws=draws,
        judged_negative=frozenset(negatives),
        positive_arm=positive_arm,
        final_means=tuple(a.mean for a in arms),
    )


def _run_compiled(spec: ProblemSpec, policy: PolicyKind, family: BoundFamily, env: BernoulliEnv) -> RunRecord:
    c = spec.consts
    means = np.asarray(env.means, dtype=np.float64)
    draws = np.zeros(spec.k, dtype=np.int64)
    judged = np.zeros(spec.k, dtype=np.bool_)
    mu_hat = np.empty(spec.k, dtype=np.float64)
    verdict, best, t = _kernels.run_bernoulli(
        means, env.keys(), float(spec.theta_l), float(spec.theta_u), float(spec.delta), c.theta,
        c.log_lower, c.log_upper, _POLICY_CODES[policy], _FAMILY_CODES[family], draws, judged, mu_hat,
    )
    positive_arm = int(best) if verdict == _kernels.POSITIVE else None
    negatives = {int(i) for i in np.flatnonzero(judged) if i != positive_arm}
    record = RunRecord(
        verdict=Verdict.POSITIVE if verdict == _kernels.POSITIVE else Verdict.NEGATIVE,
        stopping_time=int(draws.sum()),
        per_arm_draws=tuple(int(n) for n in draws),
        judged_negative=frozenset(negatives),
        positive_arm=positive_arm,
        final_means=tuple(float(m) for m in mu_hat),
    )
    if record.stopping_time != t:
        raise InvariantViolation(f"kernel round counter {t} disagrees with total draws {record.stopping_time}")
    return record


def run(
    spec: ProblemSpec,
    policy: PolicyKind | str,
    family: BoundFamily | str,
    env: Environment,
    trace: bool | TraceSink = False,
    backend: Literal["auto", "python", "compiled"] = "auto",
    check: bool = True,
) -> RunRecord:
    """Execute one run.

    ``trace=True`` stores every step in the record; a callable receives each
    step instead (nothing is stored).  ``backend="auto"`` uses the compiled
    loop for Bernoulli environments without tracing.
    """
    policy = PolicyKind.parse(policy)
    family = BoundFamily.parse(family)
    if env.k != spec.k:
        raise ValidationError("means", f"environment has {env.k} arms but k={spec.k}")
    compiled = backend == "compiled" or (backend == "auto" and isinstance(env, BernoulliEnv) and not trace)
    if compiled:
        if trace or not isinstance(env, BernoulliEnv):
            raise ValidationError("backend", "the compiled loop supports untraced Bernoulli environments only")
        record = _run_compiled(spec, policy, family, env)
    else:
        events: list[StepEvent] | None = None
        sink: TraceSink | None = None
        if trace is True:
            events = []
            sink = events.append
        elif callable(trace):
            sink = trace
        record = _run_python(spec, policy, family, env, sink)
        if events is not None:
            record = RunRecord(**{**record.__dict__, "trace": tuple(events)})
    if check:
        check_record(spec, family, record)
    return record


class Judgment(NamedTuple):
    n: int
    verdict: Verdict


def replay_stopping_time(losses: Iterable[float], spec: ProblemSpec, family: BoundFamily | str) -> Judgment | None:
    """Smallest prefix length at which either stopping inequality fires.

    Positive wins a tie.  Returns None if the stream ends first, unless that
    contradicts the asymmetric per-arm cap, which raises InvariantViolation.
    """
    family = BoundFamily.parse(family)
    mean = spec.consts.theta
    n = 0
    for n, loss in enumerate(losses, start=1):
        if not 0.0 <= loss <= 1.0:
            raise ValidationError("losses", f"entry {n} = {loss} outside [0, 1]")
        mean = running_mean(mean, n - 1, loss)
        lower, upper = bounds_for(family, mean, n, spec)
        if lower >= spec.theta_l:
            return Judgment(n, Verdict.POSITIVE)
        if upper < spec.theta_u:
            return Judgment(n, Verdict.NEGATIVE)
    if n == 0:
        raise ValidationError("losses", "empty loss stream")
    if family is BoundFamily.ASYMMETRIC and n >= spec.consts.t_delta:
        raise InvariantViolation(f"no stopping condition fired within {n} >= T = {spec.consts.t_delta} draws")
    return None


def single_arm_tau(spec: ProblemSpec, family: BoundFamily | str, mu: float, seed: int, arm: int = 0) -> Judgment:
    """Stopping draw count of one Bernoulli arm under ``spec``'s bounds (compiled scan)."""
    from .env import arm_key

    family = BoundFamily.parse(family)
    c = spec.consts
    max_n = c.t_delta if family is BoundFamily.ASYMMETRIC else _symmetric_cap(spec)
    n, fired = _kernels.single_arm_tau(
        float(mu), np.uint64(arm_key(seed, arm)), float(spec.theta_l), float(spec.theta_u), float(spec.delta),
        spec.k, c.log_lower, c.log_upper, c.theta, _FAMILY_CODES[family], max_n,
    )
    if fired == _kernels.FIRED_NONE:
        raise InvariantViolation(f"no stopping condition fired within {max_n} draws")
    return Judgment(int(n), Verdict.POSITIVE if fired == _kernels.FIRED_POSITIVE else Verdict.NEGATIVE)


def _symmetric_cap(spec: ProblemSpec) -> int:
    """A draw count at which the symmetric width is surely below Delta."""
    d = spec.consts.big_delta
    n = max(2, spec.consts.t_delta)
    while 2.0 * math.sqrt(math.log(2.0 * spec.k * n * n / spec.delta) / (2 * n)) > d:
        n *= 2
    return n
