"""Bad arm existence checking: stopping bounds, arm-selection policies and a replication harness."""

__version__ = "0.1.0"

from .core import ArmState, DerivedConstants, InvariantViolation, ProblemSpec, ValidationError, derive_constants
from .bounds import BoundFamily, BoundPair, asymmetric_bounds, bounds_for, symmetric_bounds
from .policies import PolicyKind
from .env import BernoulliEnv, ReplayEnv
from .engine import RunRecord, StepEvent, Verdict, replay_stopping_time, run, single_arm_tau
from .analysis import bernoulli_kl, complexity_report, lower_bound

__all__ = [
    "ArmState", "BernoulliEnv", "BoundFamily", "BoundPair", "DerivedConstants", "InvariantViolation",
    "PolicyKind", "ProblemSpec", "ReplayEnv", "RunRecord", "StepEvent", "ValidationError", "Verdict",
    "asymmetric_bounds", "bernoulli_kl", "bounds_for", "complexity_report", "derive_constants",
    "lower_bound", "replay_stopping_time", "run", "single_arm_tau", "symmetric_bounds",
]
