"""Command line surface: cut, schedule, bench.

Exit codes: 0 success, 2 input or validation error, 3 missing solver,
4 solver failure.  All file outputs are written atomically (temp file
plus rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .bench import BenchReport, Scenario, builtin_scenarios, gen_batch, run_scenarios
from .core import (
    Instance,
    Machine,
    dump_json,
    instance_from_json,
    schedule_to_json,
    validate_instance,
    validate_schedule,
)
from .cutting import CircuitSpec, ExpansionError, resize_batch
from .gantt import render_gantt
from .milp import (
    ExtractionError,
    ModelBuildError,
    build_extended,
    build_simple,
    serialize_lp,
)
from .solvers import (
    InfeasibleModelError,
    NoSolverError,
    OracleDisagreement,
    OracleSizeError,
    SolverFailure,
    SolverOptions,
    solve,
)
from .timing import TimingConfig, aggregate_setup_max

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_SOLVER = 3
EXIT_SOLVER = 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT) -> None:
        super().__init__(message)
        self.code = code


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_json(path: str) -> dict | list:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise CliError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid JSON in {path}: {exc}") from exc


def _load_machines(data: list) -> list[Machine]:
    try:
        return [Machine(id=m["id"], capacity=int(m["capacity"])) for m in data]
    except (KeyError, TypeError) as exc:
        raise CliError(f"malformed machines file: {exc}") from exc


def cmd_cut(args: argparse.Namespace) -> int:
    circuits_data = _load_json(args.circuits)
    machines = _load_machines(_load_json(args.machines))
    try:
        circuits = [
            CircuitSpec(id=c["id"], width=int(c["width"]), depth=int(c["depth"]))
            for c in circuits_data
        ]
    except (KeyError, TypeError) as exc:
        raise CliError(f"malformed circuits file: {exc}") from exc
    if not machines:
        raise CliError("machines file is empty")
    try:
        jobs, manifest = resize_batch(circuits, machines, args.variants)
    except (ExpansionError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    jobs_payload = [
        {"id": j.id, "qubits": j.qubits, "depth": j.depth} for j in jobs
    ]
    atomic_write(args.jobs_out, dump_json({"jobs": jobs_payload}))
    atomic_write(args.manifest_out, dump_json({"schema_version": 1, **manifest}))
    print(f"wrote {len(jobs)} jobs for {len(circuits)} circuits")
    return EXIT_OK


def _solver_options(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions(
        gap=args.gap,
        time_limit=args.time_limit,
        command=args.solver_cmd,
    )


def cmd_schedule(args: argparse.Namespace) -> int:
    instance = instance_from_json(_load_json(args.instance))
    violations = validate_instance(instance)
    if violations:
        raise CliError("invalid instance: " + "; ".join(violations))
    if args.emit_lp:
        if args.strategy == "simple":
            model = build_simple(
                instance, aggregate_setup_max(dict(instance.timing.setup))
            )
        else:
            model = build_extended(instance)
        atomic_write(args.emit_lp, serialize_lp(model))
        print(
            f"wrote {args.emit_lp}: {model.stats['num_variables']} variables, "
            f"{model.stats['num_constraints']} constraints"
        )
        return EXIT_OK
    try:
        result = solve(
            instance, args.strategy, _solver_options(args),
            oracle_limit=args.oracle_limit,
        )
    except OracleSizeError as exc:
        raise CliError(str(exc)) from exc
    except OracleDisagreement as exc:
        raise CliError(str(exc), code=EXIT_SOLVER) from exc
    except NoSolverError as exc:
        raise CliError(str(exc), code=EXIT_NO_SOLVER) from exc
    except (SolverFailure, InfeasibleModelError, ExtractionError) as exc:
        raise CliError(str(exc), code=EXIT_SOLVER) from exc
    leftover = validate_schedule(result.schedule, instance)
    if leftover:
        raise CliError(
            "produced schedule failed validation: " + "; ".join(leftover),
            code=EXIT_SOLVER,
        )
    payload = schedule_to_json(result.schedule)
    payload["strategy"] = result.strategy
    payload["solver_status"] = result.solver_status
    payload["wall_time_s"] = result.wall_time
    atomic_write(args.out, dump_json(payload))
    if args.gantt:
        atomic_write(args.gantt, render_gantt(result.schedule, instance))
    print(
        f"{args.strategy}: makespan {result.schedule.makespan:g} "
        f"({result.solver_status or 'ok'})"
    )
    return EXIT_OK


def _load_scenario(args: argparse.Namespace) -> Scenario:
    builtins = builtin_scenarios(seed=args.seed, mode=args.mode)
    if args.scenario in builtins:
        return builtins[args.scenario]
    data = _load_json(args.scenario)
    if not isinstance(data, dict):
        raise CliError("scenario file must be a JSON object")
    try:
        timing = data.get("timing", {})
        return Scenario(
            name=data["name"],
            machines=tuple(_load_machines(data["machines"])),
            batches=int(data["batches"]),
            batch_size=int(data["batch_size"]),
            timing=TimingConfig(
                seed=int(timing.get("seed", args.seed)),
                mode=timing.get("mode", args.mode),
                base_processing_scale=float(
                    timing.get("base_processing_scale", 1.0)
                ),
                variation_fraction=float(timing.get("variation_fraction", 0.5)),
                setup_scale=float(timing.get("setup_scale", 0.5)),
            ),
            width_min=int(data.get("width_min", 2)),
            depth_min=int(data.get("depth_min", 5)),
            depth_max=int(data.get("depth_max", 50)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"malformed scenario file: {exc}") from exc


def cmd_bench(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    known = {"baseline", "greedy", "oracle", "simple", "extended"}
    unknown = [s for s in strategies if s not in known]
    if unknown:
        raise CliError(f"unknown strategies: {', '.join(unknown)}")
    if not strategies:
        raise CliError("no strategies requested")
    if ("simple" in strategies or "extended" in strategies):
        # Fail fast before a long run if MILP strategies cannot start.
        from .solvers import resolve_solver_command

        try:
            resolve_solver_command(_solver_options(args))
        except NoSolverError as exc:
            raise CliError(str(exc), code=EXIT_NO_SOLVER) from exc
    report = run_scenarios(
        [scenario], strategies, _solver_options(args),
        oracle_limit=args.oracle_limit, workers=args.workers,
    )
    out_dir = Path(args.out_dir)
    atomic_write(out_dir / "report.csv", report.to_csv())
    atomic_write(out_dir / "report.json", dump_json(report.to_json()))
    if args.gantt_dir:
        _emit_gantts(scenario, strategies, report, args)
    for summary in report.summaries:
        ext = summary["mean_improvement_extended_vs_baseline"]
        simple = summary["mean_improvement_simple_vs_baseline"]
        print(
            f"{summary['scenario']}: extended improvement "
            f"{'n/a' if ext is None else f'{ext:.1%}'}, simple improvement "
            f"{'n/a' if simple is None else f'{simple:.1%}'}"
        )
    print(f"wrote {out_dir / 'report.csv'} and {out_dir / 'report.json'}")
    return EXIT_OK


def _emit_gantts(
    scenario: Scenario,
    strategies: list[str],
    report: BenchReport,
    args: argparse.Namespace,
) -> None:
    gantt_dir = Path(args.gantt_dir)
    for batch in range(scenario.batches):
        instance = gen_batch(scenario, batch)
        for strategy in strategies:
            row = next(
                (
                    r
                    for r in report.rows
                    if r.batch == batch and r.strategy == strategy
                ),
                None,
            )
            if row is None or row.makespan is None:
                continue
            try:
                result = solve(
                    instance, strategy, _solver_options(args),
                    oracle_limit=args.oracle_limit,
                )
            except Exception:
                continue
            atomic_write(
                gantt_dir / f"{scenario.name}_b{batch}_{strategy}.svg",
                render_gantt(result.schedule, instance),
            )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="milq-sched",
        description="Batch scheduler for quantum-circuit jobs on QPU clusters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cut = sub.add_parser("cut", help="resize circuits to fit the machine pool")
    cut.add_argument("--circuits", required=True, help="JSON list of circuits")
    cut.add_argument("--machines", required=True, help="JSON list of machines")
    cut.add_argument("--variants", type=int, default=4,
                     help="variant copies per cut")
    cut.add_argument("--jobs-out", required=True)
    cut.add_argument("--manifest-out", required=True)
    cut.set_defaults(func=cmd_cut)

    sched = sub.add_parser("schedule", help="schedule one instance file")
    sched.add_argument("--instance", required=True)
    sched.add_argument(
        "--strategy",
        default="baseline",
        choices=["baseline", "greedy", "oracle", "simple", "extended"],
    )
    sched.add_argument("--out", default="schedule.json")
    sched.add_argument("--gap", type=float, default=0.2)
    sched.add_argument("--time-limit", type=float, default=60.0)
    sched.add_argument("--solver-cmd", default=None)
    sched.add_argument("--oracle-limit", type=int, default=5)
    sched.add_argument("--emit-lp", default=None, metavar="PATH",
                       help="write the model LP file instead of solving")
    sched.add_argument("--gantt", default=None, metavar="PATH",
                       help="also write an SVG Gantt chart")
    sched.set_defaults(func=cmd_schedule)

    bench = sub.add_parser("bench", help="run a benchmark scenario")
    bench.add_argument(
        "--scenario",
        required=True,
        help="built-in name (paper-two-qpu, paper-three-qpu) or a JSON file",
    )
    bench.add_argument("--strategies", default="baseline,simple,extended")
    bench.add_argument("--seed", type=int, default=1234)
    bench.add_argument("--mode", default="integer",
                       choices=["int", "integer", "real"])
    bench.add_argument("--out-dir", default="bench-out")
    bench.add_argument("--gap", type=float, default=0.2)
    bench.add_argument("--time-limit", type=float, default=60.0)
    bench.add_argument("--solver-cmd", default=None)
    bench.add_argument("--oracle-limit", type=int, default=5)
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--gantt-dir", default=None)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "mode", None) == "int":
        args.mode = "integer"
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ModelBuildError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
