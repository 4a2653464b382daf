"""Replication harness for the three stopping-time experiments.

Every replication gets its own child seed derived from the master seed, the
scenario coordinates and the replication index.  Seeds never depend on the
worker that ran them, so tables are identical for any ``jobs`` value.
Policies (and bound families in table 1) compared within one replication use
the same seed, hence identical per-arm loss streams.
"""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import groupby
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .bounds import BoundFamily
from .core import ProblemSpec, ValidationError
from .engine import Verdict, run, single_arm_tau
from .env import BernoulliEnv, derive_seed, ipinyou_means, ipinyou_threshold_center, synth_means
from .policies import PolicyKind

Z_99 = 2.5758
POLICIES = (PolicyKind.APT_P, PolicyKind.LUCB, PolicyKind.UCB)

TABLE1_PAIRS = ((0.1, 0.3), (0.3, 0.5), (0.5, 0.7), (0.7, 0.9))
TABLE1_MUS = (0.2, 0.4, 0.6, 0.8)
TABLE1_K = 100
TABLE2_PAIRS = {
    "0.2": ((0.1, 0.3), (0.4, 0.6), (0.7, 0.9)),
    "0.02": ((0.19, 0.21), (0.49, 0.51), (0.79, 0.81)),
}
TABLE2_MS = (0, 1, 25, 50, 100)
TABLE2_K = 100
TABLE3_M_PRIMES = (0, 1, 5, 10, 19)
TABLE3_HALF_WIDTH = 0.01

CSV_FIELDS = (
    "scenario_label", "theta_l", "theta_u", "delta", "m", "policy", "family", "replication", "stopping_time", "verdict",
)


def aggregate(samples: Sequence[float]) -> tuple[float, float]:
    """Mean and 99% normal-approximation CI half-width (unbiased stddev)."""
    if len(samples) < 2:
        raise ValidationError("samples", "need at least 2 samples for a confidence interval")
    r = len(samples)
    mean = math.fsum(samples) / r
    var = math.fsum((x - mean) ** 2 for x in samples) / (r - 1)
    return mean, Z_99 * math.sqrt(var) / math.sqrt(r)


@dataclass(frozen=True)
class Sample:
    scenario_label: str
    theta_l: float
    theta_u: float
    delta: float
    m: str
    policy: str
    family: str
    replication: int
    stopping_time: int
    verdict: str

    @property
    def key(self) -> tuple:
        return (self.scenario_label, self.theta_l, self.theta_u, self.delta, self.m, self.policy, self.family)

    def csv_row(self) -> list[str]:
        return [
            self.scenario_label, repr(self.theta_l), repr(self.theta_u), repr(self.delta), self.m,
            self.policy, self.family, str(self.replication), str(self.stopping_time), self.verdict,
        ]


@dataclass(frozen=True)
class Row:
    scenario_label: str
    theta_l: float
    theta_u: float
    delta: float
    m: str
    policy: str
    family: str
    mean: float
    ci99: float
    count: int
    positive_rate: float

    @property
    def column(self) -> str:
        """Column header in the printed table: the arm mean (table 1) or m."""
        if self.m:
            return f"m={self.m}"
        return self.scenario_label.split(" ", 1)[1] if " " in self.scenario_label else self.scenario_label


@dataclass
class ScenarioTable:
    name: str
    samples: list[Sample]
    scale: float = 1.0  # printed value = raw / scale
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def rows(self) -> list[Row]:
        order = self._key_order
        ordered = sorted(self.samples, key=lambda s: (_order_key(s.key, order), s.replication))
        out = []
        for key, group in groupby(ordered, key=lambda s: s.key):
            group = list(group)
            mean, half = aggregate([s.stopping_time for s in group])
            pos = sum(s.verdict == Verdict.POSITIVE.value for s in group) / len(group)
            out.append(Row(*key, mean=mean, ci99=half, count=len(group), positive_rate=pos))
        return out

    @property
    def _key_order(self) -> dict[tuple, int]:
        order: dict[tuple, int] = {}
        for s in self.samples:
            order.setdefault(s.key, len(order))
        return order

    def lookup(self, **criteria) -> Row:
        hits = [r for r in self.rows if all(_matches(getattr(r, k), v) for k, v in criteria.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match {criteria}")
        return hits[0]

    def to_csv(self, target: str | Path | io.TextIOBase) -> None:
        if isinstance(target, (str, Path)):
            with open(target, "w", newline="") as fh:
                self._write_csv(fh)
        else:
            self._write_csv(target)

    def _write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        order = self._key_order
        for s in sorted(self.samples, key=lambda s: (_order_key(s.key, order), s.replication)):
            writer.writerow(s.csv_row())

    @classmethod
    def from_csv(cls, source: str | Path, name: str = "", scale: float = 1.0) -> "ScenarioTable":
        with open(source, newline="") as fh:
            reader = csv.DictReader(fh)
            samples = [
                Sample(
                    scenario_label=row["scenario_label"], theta_l=float(row["theta_l"]), theta_u=float(row["theta_u"]),
                    delta=float(row["delta"]), m=row["m"], policy=row["policy"], family=row["family"],
                    replication=int(row["replication"]), stopping_time=int(row["stopping_time"]), verdict=row["verdict"],
                )
                for row in reader
            ]
        return cls(name=name, samples=samples, scale=scale)

    def summary_lines(self) -> list[str]:
        unit = "" if self.scale == 1 else f" (x{self.scale:g})"
        head = f"{'scenario':<22} {'theta_l':>8} {'theta_u':>8} {'delta':>6} {'m':>4} {'policy':>6} {'bounds':>6}  mean{unit} +- 99% CI   n"
        lines = [head]
        for r in self.rows:
            lines.append(
                f"{r.scenario_label:<22} {r.theta_l:>8.5f} {r.theta_u:>8.5f} {r.delta:>6g} {r.m:>4} {r.policy:>6} "
                f"{r.family:>6}  {r.mean / self.scale:.2f} +- {r.ci99 / self.scale:.2f}   {r.count}"
            )
        return lines

    def to_markdown(self) -> str:
        """Rows: (delta, thresholds, policy or bounds); columns: arm mean or m."""
        rows = self.rows
        columns: list[str] = []
        for r in rows:
            if r.column not in columns:
                columns.append(r.column)
        unit = "" if self.scale == 1 else f" (stopping time / {self.scale:g})"
        lines = [f"### {self.name}{unit}", ""]
        lines.append("| delta | (theta_L, theta_U) | policy / bounds | " + " | ".join(columns) + " |")
        lines.append("|---|---|---|" + "---|" * len(columns))
        cells: dict[tuple, dict[str, str]] = {}
        for r in rows:
            label = r.policy if r.policy else r.family
            key = (r.delta, r.theta_l, r.theta_u, label)
            cells.setdefault(key, {})[r.column] = f"{r.mean / self.scale:.2f} ± {r.ci99 / self.scale:.2f}"
        for (delta, tl, tu, label), values in cells.items():
            row = [f"{delta:g}", f"({tl:.5g}, {tu:.5g})", label] + [values.get(c, "") for c in columns]
            lines.append("| " + " | ".join(row) + " |")
        return "\n".join(lines) + "\n"


def _matches(value, wanted) -> bool:
    if isinstance(value, float) and isinstance(wanted, (int, float)):
        return math.isclose(value, wanted, rel_tol=0, abs_tol=1e-12)
    return value == wanted


def _order_key(key: tuple, order: dict[tuple, int]) -> int:
    return order[key]


def scenario_seed(master_seed: int, *coords: object) -> int:
    """Seed for a scenario, determined by its coordinates only."""
    seed = master_seed
    for c in coords:
        seed = derive_seed(seed, zlib.crc32(repr(c).encode()))
    return seed


def default_jobs() -> int:
    env = os.environ.get("BAEC_JOBS")
    if env:
        try:
            jobs = int(env)
        except ValueError:
            raise ValidationError("BAEC_JOBS", f"not an integer: {env!r}") from None
        if jobs < 1:
            raise ValidationError("BAEC_JOBS", "must be >= 1")
        return jobs
    return os.cpu_count() or 1


def _parallel(tasks: Sequence[Callable[[], list[Sample]]], jobs: int | None) -> list[Sample]:
    jobs = default_jobs() if jobs is None else jobs
    if jobs < 1:
        raise ValidationError("jobs", "must be >= 1")
    if jobs == 1:
        results = [task() for task in tasks]
    else:
        # compiled kernels release the GIL, so threads scale
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda task: task(), tasks))
    return [s for batch in results for s in batch]


def run_table1(delta: float, seed: int = 0, runs: int = 100, jobs: int | None = None) -> ScenarioTable:
    """Single-arm stopping times for both bound families (K=100 inside the bounds)."""
    _check_runs(runs)
    tasks = []
    for tl, tu in TABLE1_PAIRS:
        spec = ProblemSpec(k=TABLE1_K, theta_l=tl, theta_u=tu, delta=delta)
        for mu in TABLE1_MUS:
            base = scenario_seed(seed, "table1", tl, tu, mu)
            label = f"table1 mu={mu:g}"

            def task(spec=spec, mu=mu, base=base, label=label) -> list[Sample]:
                out = []
                for family in (BoundFamily.ASYMMETRIC, BoundFamily.SYMMETRIC):
                    for r in range(runs):
                        j = single_arm_tau(spec, family, mu, derive_seed(base, r))
                        out.append(Sample(label, spec.theta_l, spec.theta_u, delta, "", "", family.value, r, j.n, j.verdict.value))
                return out

            tasks.append(task)
    table = ScenarioTable(name=f"table1 delta={delta:g}", samples=_parallel(tasks, jobs), scale=1.0)
    table.metadata.update(_metadata(seed, runs))
    return table


def run_table2(
    delta: float,
    seed: int = 0,
    runs: int = 100,
    jobs: int | None = None,
    gaps: Iterable[str] = ("0.2",),
) -> ScenarioTable:
    """Synthetic mean-sets, three policies with common random numbers.

    ``gaps`` selects threshold-pair blocks by width: "0.2" and/or "0.02".  The
    narrow blocks take minutes.
    """
    _check_runs(runs)
    tasks = []
    for gap in gaps:
        if gap not in TABLE2_PAIRS:
            raise ValidationError("gaps", f"unknown block {gap!r}; choose from {sorted(TABLE2_PAIRS)}")
        for tl, tu in TABLE2_PAIRS[gap]:
            spec = ProblemSpec(k=TABLE2_K, theta_l=tl, theta_u=tu, delta=delta)
            for m in TABLE2_MS:
                # independent of delta: both delta settings share mean-sets and streams
                mean_base = scenario_seed(seed, "table2-means", tl, tu, m)
                loss_base = scenario_seed(seed, "table2-losses", tl, tu, m)

                def task(spec=spec, m=m, mean_base=mean_base, loss_base=loss_base) -> list[Sample]:
                    out = []
                    for r in range(runs):
                        means = synth_means(spec.k, m, spec.consts.theta, derive_seed(mean_base, r))
                        env = BernoulliEnv(means, derive_seed(loss_base, r))
                        for policy in POLICIES:
                            rec = run(spec, policy, BoundFamily.ASYMMETRIC, env)
                            out.append(Sample("table2", spec.theta_l, spec.theta_u, delta, str(m), policy.value,
                                              "asym", r, rec.stopping_time, rec.verdict.value))
                    return out

                tasks.append(task)
    table = ScenarioTable(name=f"table2 delta={delta:g}", samples=_parallel(tasks, jobs), scale=1000.0)
    table.metadata.update(_metadata(seed, runs))
    return table


def table3_spec(m_prime: int, delta: float) -> ProblemSpec:
    center = ipinyou_threshold_center(m_prime)
    return ProblemSpec(k=20, theta_l=center - TABLE3_HALF_WIDTH, theta_u=center + TABLE3_HALF_WIDTH, delta=delta)


def run_table3(delta: float, seed: int = 0, runs: int = 100, jobs: int | None = None) -> ScenarioTable:
    """Click-rate means, five threshold pairs, three policies."""
    _check_runs(runs)
    means = ipinyou_means()
    tasks = []
    for mp in TABLE3_M_PRIMES:
        spec = table3_spec(mp, delta)
        base = scenario_seed(seed, "table3", mp)
        # one task per (threshold pair, policy) keeps the slow m'=0 cells spread across workers
        for policy in POLICIES:

            def task(spec=spec, mp=mp, base=base, policy=policy) -> list[Sample]:
                out = []
                for r in range(runs):
                    env = BernoulliEnv(means, derive_seed(base, r))
                    rec = run(spec, policy, BoundFamily.ASYMMETRIC, env)
                    out.append(Sample(f"table3 m'={mp}", spec.theta_l, spec.theta_u, delta, str(mp), policy.value,
                                      "asym", r, rec.stopping_time, rec.verdict.value))
                return out

            tasks.append(task)
    table = ScenarioTable(name=f"table3 delta={delta:g}", samples=_parallel(tasks, jobs), scale=1000.0)
    table.metadata.update(_metadata(seed, runs))
    return table


def _check_runs(runs: int) -> None:
    if runs < 2:
        raise ValidationError("runs", "need at least 2 replications for a confidence interval")


def _metadata(seed: int, runs: int) -> dict[str, str]:
    return {"seed": str(seed), "runs": str(runs), "ci": f"normal approximation, z={Z_99}, unbiased stddev"}


def stdev_check(samples: Sequence[float]) -> float:
    """Sample standard deviation via the statistics module (used to cross-check ``aggregate``)."""
    return statistics.stdev(samples)
