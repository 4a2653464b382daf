"""Command-line entry point: ``baec <subcommand> [flags]``.

Exit codes: 0 success, 2 invalid input (the message names the flag),
1 an internal invariant was violated.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import complexity_report
from .bounds import BoundFamily, t_delta_i, t_double_delta, worst_case_gap_bound
from .core import InvariantViolation, ProblemSpec, ValidationError
from .engine import STEP_FIELDS, StepEvent, run
from .env import BernoulliEnv, derive_seed, load_means
from .experiments import ScenarioTable, aggregate, default_jobs, run_table1, run_table2, run_table3
from .policies import PolicyKind

# field names used in ValidationError -> flag names shown to the user
_FLAG_NAMES = {
    "k": "--k",
    "theta_l": "--theta-l",
    "theta_u": "--theta-u",
    "delta": "--delta",
    "means": "--means",
    "mu": "--mu",
    "policy": "--policy",
    "bounds": "--bounds",
    "family": "--bounds",
    "runs": "--runs",
    "jobs": "--jobs",
    "BAEC_JOBS": "BAEC_JOBS",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage text on stderr, exit 2
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("must be a 64-bit unsigned integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="master seed (default 0)")
    common.add_argument("--jobs", type=_positive_int, default=None,
                        help="worker threads (default: BAEC_JOBS or the number of logical cores)")
    common.add_argument("--out-csv", type=Path, default=None)
    common.add_argument("--out-md", type=Path, default=None)
    common.add_argument("--quiet", action="store_true", help="print only the final table")

    spec_args = argparse.ArgumentParser(add_help=False)
    spec_args.add_argument("--k", type=int, default=None, help="number of arms")
    spec_args.add_argument("--theta-l", type=float, required=True)
    spec_args.add_argument("--theta-u", type=float, required=True)
    spec_args.add_argument("--delta", type=float, required=True)

    parser = _Parser(prog="baec", description="Bad arm existence checking: bounds, simulations and benchmark tables.")
    parser.add_argument("--version", action="version", version=f"baec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", parents=[common, spec_args], help="print derived constants")
    p.add_argument("--mu", type=_float_list, default=[], help="arm means for per-arm T_i (comma list)")

    p = sub.add_parser("simulate", parents=[common, spec_args], help="run the algorithm on Bernoulli arms")
    p.add_argument("--means", required=True, help="CSV file of means or an inline comma list")
    p.add_argument("--policy", default="apt_p", choices=[k.value for k in PolicyKind])
    p.add_argument("--bounds", default="asym", choices=[f.value for f in BoundFamily])
    p.add_argument("--runs", type=_positive_int, default=1)
    p.add_argument("--trace-out", type=Path, default=None, help="CSV of every step of the first run")

    p = sub.add_parser("report", parents=[common, spec_args], help="sample-complexity bounds for a mean vector")
    p.add_argument("--means", required=True, help="CSV file of means or an inline comma list")

    for name, help_text in (
        ("table1", "single-arm stopping times, both bound families"),
        ("table2", "synthetic mean-sets, three policies"),
        ("table3", "click-rate means, three policies"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--delta", type=float, required=True)
        p.add_argument("--runs", type=_positive_int, default=100)
        if name == "table2":
            p.add_argument("--include-small-gap", action="store_true",
                           help="also run the threshold pairs of width 0.02 (minutes)")
    return parser


def _spec(args, k_default: int | None = None) -> ProblemSpec:
    k = args.k if args.k is not None else k_default
    if k is None:
        raise ValidationError("k", "required")
    return ProblemSpec(k=k, theta_l=args.theta_l, theta_u=args.theta_u, delta=args.delta)


def _means(text: str) -> list[float]:
    path = Path(text)
    if path.exists():
        return load_means(path)
    try:
        values = _float_list(text)
    except argparse.ArgumentTypeError:
        raise ValidationError("means", f"neither a file nor a list of numbers: {text!r}") from None
    if not values:
        raise ValidationError("means", "empty")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValidationError("means", f"{v} outside [0, 1]")
    return values


class _Output:
    def __init__(self, quiet: bool, stream=None):
        self.quiet = quiet
        self.stream = stream or sys.stdout

    def meta(self, line: str = "") -> None:
        if not self.quiet:
            print(f"# {line}" if line else "#", file=self.stream)

    def table(self, line: str) -> None:
        print(line, file=self.stream)


def _header(out: _Output, args, spec: ProblemSpec | None = None) -> None:
    out.meta(f"baec {__version__}  command={args.command}  seed={args.seed}")
    if spec is not None:
        c = spec.consts
        out.meta(f"spec k={spec.k} theta_l={spec.theta_l!r} theta_u={spec.theta_u!r} delta={spec.delta!r}")
        out.meta(f"constants N={c.n_delta_cap} alpha={c.alpha:.6f} theta={c.theta:.6f} T={c.t_delta} n_min={c.n_delta_floor}")


def _aligned(rows: Sequence[tuple[str, str]]) -> list[str]:
    width = max(len(k) for k, _ in rows)
    return [f"{k:<{width}}  {v}" for k, v in rows]


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _cmd_bounds(args, out: _Output) -> None:
    spec = _spec(args)
    _header(out, args, spec)
    c = spec.consts
    rows = [
        ("Delta", f"{c.big_delta:.12g}"),
        ("N_Delta", str(c.n_delta_cap)),
        ("alpha", f"{c.alpha:.6f}"),
        ("theta", f"{c.theta:.6f}"),
        ("T_Delta", str(c.t_delta)),
        ("K*T_Delta", str(spec.k * c.t_delta)),
        ("n_delta", str(c.n_delta_floor)),
        ("T''_Delta", str(t_double_delta(spec))),
        ("gap_bound", f"{worst_case_gap_bound(spec):.3f}"),
    ]
    rows += [(f"T_i(mu={mu:g})", str(t_delta_i(spec, mu))) for mu in args.mu]
    for line in _aligned(rows):
        out.table(line)
    if args.out_csv:
        _write_csv(args.out_csv, ("quantity", "value"), rows)


def _cmd_simulate(args, out: _Output) -> None:
    means = _means(args.means)
    spec = _spec(args, k_default=len(means))
    if len(means) != spec.k:
        raise ValidationError("means", f"{len(means)} means given for --k {spec.k}")
    _header(out, args, spec)
    out.meta("means " + " ".join(repr(m) for m in means))
    out.meta(f"policy={args.policy} bounds={args.bounds} runs={args.runs}")
    results = []
    for r in range(args.runs):
        env = BernoulliEnv(means, derive_seed(args.seed, r))
        if r == 0 and args.trace_out is not None:
            with open(args.trace_out, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(STEP_FIELDS)

                def sink(ev: StepEvent, writer=writer) -> None:
                    writer.writerow([*ev[:-1], ev.action.value])

                rec = run(spec, args.policy, args.bounds, env, trace=sink)
        else:
            rec = run(spec, args.policy, args.bounds, env)
        results.append((r, rec))
    out.table("run  verdict   stopping_time  positive_arm")
    for r, rec in results:
        arm = "-" if rec.positive_arm is None else str(rec.positive_arm)
        out.table(f"{r:<4} {rec.verdict.value:<9} {rec.stopping_time:>13}  {arm}")
    if args.runs >= 2:
        mean, half = aggregate([rec.stopping_time for _, rec in results])
        out.table(f"mean stopping time {mean:.2f} +- {half:.2f} (99% CI)")
    if args.out_csv:
        _write_csv(
            args.out_csv,
            ("run", "verdict", "stopping_time", "positive_arm", "per_arm_draws"),
            [(r, rec.verdict.value, rec.stopping_time, "" if rec.positive_arm is None else rec.positive_arm,
              " ".join(map(str, rec.per_arm_draws))) for r, rec in results],
        )


def _cmd_report(args, out: _Output) -> None:
    means = _means(args.means)
    spec = _spec(args, k_default=len(means))
    if len(means) != spec.k:
        raise ValidationError("means", f"{len(means)} means given for --k {spec.k}")
    _header(out, args, spec)
    out.meta("means " + " ".join(repr(m) for m in means))
    report = complexity_report(spec, means)
    rows = report.as_rows()
    for line in _aligned(rows):
        out.table(line)
    if args.out_csv:
        _write_csv(args.out_csv, ("quantity", "value"), rows)


def _cmd_table(args, out: _Output) -> None:
    jobs = args.jobs if args.jobs is not None else default_jobs()
    _header(out, args)
    out.meta(f"delta={args.delta!r} runs={args.runs} jobs={jobs}")
    if args.command == "table1":
        table = run_table1(args.delta, seed=args.seed, runs=args.runs, jobs=jobs)
    elif args.command == "table2":
        gaps = ("0.2", "0.02") if args.include_small_gap else ("0.2",)
        table = run_table2(args.delta, seed=args.seed, runs=args.runs, jobs=jobs, gaps=gaps)
    else:
        table = run_table3(args.delta, seed=args.seed, runs=args.runs, jobs=jobs)
    for key, value in table.metadata.items():
        out.meta(f"{key}: {value}")
    _emit_table(table, args, out)


def _emit_table(table: ScenarioTable, args, out: _Output) -> None:
    for line in table.summary_lines():
        out.table(line)
    if args.out_csv:
        table.to_csv(args.out_csv)
    if args.out_md:
        args.out_md.write_text(table.to_markdown())


_COMMANDS = {
    "bounds": _cmd_bounds,
    "simulate": _cmd_simulate,
    "report": _cmd_report,
    "table1": _cmd_table,
    "table2": _cmd_table,
    "table3": _cmd_table,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = _Output(args.quiet)
    try:
        _COMMANDS[args.command](args, out)
    except ValidationError as exc:
        flag = _FLAG_NAMES.get(exc.field, exc.field)
        print(f"baec: error: {flag}: {exc.message}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"baec: INVARIANT VIOLATION: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"baec: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
