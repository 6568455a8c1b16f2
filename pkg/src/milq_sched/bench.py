"""Benchmark harness: random batches over fixed hardware scenarios.

Two built-in scenarios mirror the benchmarked hardware pools (two
capacity-5 QPUs; a 5/6/20 trio).  Each batch samples job widths up to
the largest device, mimicking a pool of already-resized circuits, builds
synthetic timing tables, and compares strategy makespans.  Simple-model
schedules are re-evaluated under the original sequence-dependent setups
inside :func:`milq_sched.solvers.solve_milp`, so every reported makespan
is comparable.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import CircuitJob, Instance, Machine, TimingTables
from .milp import slot_tables
from .solvers import (
    OracleSizeError,
    SolveResult,
    SolverOptions,
    solve,
)
from .timing import TimingConfig, gen_timing

_WIDTH_STREAM = 1000
_TIMING_STREAM = 2000


@dataclass(frozen=True, slots=True)
class Scenario:
    """A benchmark configuration: machine pool, batch shape, timing knobs."""

    name: str
    machines: tuple[Machine, ...]
    batches: int
    batch_size: int
    timing: TimingConfig
    width_min: int = 2
    depth_min: int = 5
    depth_max: int = 50


@dataclass(frozen=True, slots=True)
class BenchRow:
    scenario: str
    batch: int
    seed: int
    strategy: str
    makespan: float | None
    status: str
    wall_time_s: float
    objective: float | None = None
    error: str | None = None


@dataclass(frozen=True, slots=True)
class BenchReport:
    rows: tuple[BenchRow, ...]
    summaries: tuple[dict, ...]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["scenario", "batch", "seed", "strategy", "makespan", "status",
             "wall_time_s"]
        )
        for row in self.rows:
            writer.writerow(
                [
                    row.scenario,
                    row.batch,
                    row.seed,
                    row.strategy,
                    "" if row.makespan is None else repr(float(row.makespan)),
                    row.status,
                    f"{row.wall_time_s:.1f}",
                ]
            )
        return buffer.getvalue()

    def to_json(self) -> dict:
        return {
            "rows": [
                {
                    "scenario": r.scenario,
                    "batch": r.batch,
                    "seed": r.seed,
                    "strategy": r.strategy,
                    "makespan": r.makespan,
                    "status": r.status,
                    "wall_time_s": r.wall_time_s,
                    "objective": r.objective,
                    "error": r.error,
                }
                for r in self.rows
            ],
            "summaries": list(self.summaries),
        }


def builtin_scenarios(
    seed: int = 1234, mode: str = "integer"
) -> dict[str, Scenario]:
    """The two hardware pools used throughout the benchmarks."""
    timing = TimingConfig(seed=seed, mode=mode)  # type: ignore[arg-type]
    return {
        "paper-two-qpu": Scenario(
            name="paper-two-qpu",
            machines=(Machine("QPU1", 5), Machine("QPU2", 5)),
            batches=10,
            batch_size=7,
            timing=timing,
        ),
        "paper-three-qpu": Scenario(
            name="paper-three-qpu",
            machines=(Machine("QPU1", 5), Machine("QPU2", 6), Machine("QPU3", 20)),
            batches=10,
            batch_size=7,
            timing=timing,
        ),
    }


def derived_seed(seed: int, batch_index: int) -> int:
    return int(
        np.random.SeedSequence(
            entropy=seed, spawn_key=(_TIMING_STREAM + batch_index,)
        ).generate_state(1)[0]
    )


def gen_batch(scenario: Scenario, batch_index: int) -> Instance:
    """One random batch: widths within the largest device, seeded timing.

    t_max defaults to 1.2x the baseline makespan in slots and big_m to
    t_max plus the largest processing-plus-setup total plus one.
    """
    max_cap = max(m.capacity for m in scenario.machines)
    rng = np.random.default_rng(
        np.random.SeedSequence(
            entropy=scenario.timing.seed,
            spawn_key=(_WIDTH_STREAM + batch_index,),
        )
    )
    widths = rng.integers(scenario.width_min, max_cap + 1, scenario.batch_size)
    depths = rng.integers(scenario.depth_min, scenario.depth_max + 1,
                          scenario.batch_size)
    jobs = tuple(
        CircuitJob(id=f"J{k + 1}", qubits=int(widths[k]), depth=int(depths[k]))
        for k in range(scenario.batch_size)
    )
    batch_seed = derived_seed(scenario.timing.seed, batch_index)
    timing = gen_timing(
        jobs, scenario.machines, replace(scenario.timing, seed=batch_seed)
    )
    return size_instance(jobs, scenario.machines, timing, granularity=1.0)


def size_instance(
    jobs: tuple[CircuitJob, ...],
    machines: tuple[Machine, ...],
    timing: TimingTables,
    granularity: float = 1.0,
    headroom: float = 1.2,
) -> Instance:
    """Fit t_max and big_m to the workload via the baseline makespan."""
    from .solvers import baseline_schedule, solve_greedy

    from .core import _t_max_lower_bound

    draft = Instance(
        jobs=jobs,
        machines=machines,
        timing=timing,
        big_m=10**9,
        t_max=10**6,
        granularity=granularity,
    )
    reference = baseline_schedule(draft).makespan
    reference = max(reference, solve_greedy(draft).schedule.makespan)
    # The relaxed model pays aggregated setups, so its feasible horizon can
    # exceed the baseline's; size against a job_only schedule as well.
    reference = max(
        reference, solve_greedy(draft, mode="job_only").schedule.makespan
    )
    t_max = max(
        1, math.ceil(headroom * reference / granularity), _t_max_lower_bound(draft)
    )
    p_slots, s_slots = slot_tables(draft)
    peak = max(p_slots.values(), default=1) + max(s_slots.values(), default=0)
    big_m = float(max(t_max + peak + 1, len(jobs) + 2))
    return Instance(
        jobs=jobs,
        machines=machines,
        timing=timing,
        big_m=big_m,
        t_max=t_max,
        granularity=granularity,
    )


def _run_batch(
    scenario: Scenario,
    batch_index: int,
    strategies: Sequence[str],
    options: SolverOptions,
    oracle_limit: int,
) -> list[BenchRow]:
    instance = gen_batch(scenario, batch_index)
    seed = derived_seed(scenario.timing.seed, batch_index)
    rows = []
    for strategy in strategies:
        started = time.perf_counter()
        try:
            result: SolveResult = solve(
                instance, strategy, options, oracle_limit=oracle_limit
            )
            rows.append(
                BenchRow(
                    scenario=scenario.name,
                    batch=batch_index,
                    seed=seed,
                    strategy=strategy,
                    makespan=result.schedule.makespan,
                    status=result.solver_status or "ok",
                    wall_time_s=result.wall_time,
                    objective=result.objective,
                )
            )
        except OracleSizeError as exc:
            rows.append(
                BenchRow(
                    scenario=scenario.name,
                    batch=batch_index,
                    seed=seed,
                    strategy=strategy,
                    makespan=None,
                    status="skipped",
                    wall_time_s=time.perf_counter() - started,
                    error=str(exc),
                )
            )
        except Exception as exc:
            rows.append(
                BenchRow(
                    scenario=scenario.name,
                    batch=batch_index,
                    seed=seed,
                    strategy=strategy,
                    makespan=None,
                    status="error",
                    wall_time_s=time.perf_counter() - started,
                    error=str(exc),
                )
            )
    return rows


def _summarize(scenario: Scenario, rows: list[BenchRow]) -> dict:
    def makespans(strategy: str) -> dict[int, float]:
        return {
            r.batch: r.makespan
            for r in rows
            if r.strategy == strategy and r.makespan is not None
        }

    baseline = makespans("baseline")

    def improvement(strategy: str) -> float | None:
        other = makespans(strategy)
        shared = sorted(set(baseline) & set(other))
        if not shared:
            return None
        values = [(baseline[b] - other[b]) / baseline[b] for b in shared]
        return sum(values) / len(values)

    underperforming = sorted(
        b
        for b, v in makespans("simple").items()
        if b in baseline and v > baseline[b]
    )
    summary = {
        "scenario": scenario.name,
        "batches": scenario.batches,
        "batch_size": scenario.batch_size,
        "mean_improvement_extended_vs_baseline": improvement("extended"),
        "mean_improvement_simple_vs_baseline": improvement("simple"),
        "batches_simple_underperforms_baseline": underperforming,
    }
    if not underperforming:
        summary["simple_underperformance_note"] = (
            "no batch where the baseline beat the simple model"
        )
    return summary


def run_scenarios(
    scenarios: Sequence[Scenario],
    strategies: Sequence[str],
    options: SolverOptions | None = None,
    oracle_limit: int = 5,
    workers: int = 1,
) -> BenchReport:
    """Run every strategy over every batch of every scenario.

    Batches run in a worker pool; rows are assembled in deterministic
    (scenario, batch, strategy) order regardless of completion order.
    Per-batch failures are recorded, not raised.
    """
    options = options or SolverOptions()
    all_rows: list[BenchRow] = []
    summaries: list[dict] = []
    for scenario in scenarios:
        tasks = list(range(scenario.batches))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                batches = list(
                    pool.map(
                        lambda b: _run_batch(
                            scenario, b, strategies, options, oracle_limit
                        ),
                        tasks,
                    )
                )
        else:
            batches = [
                _run_batch(scenario, b, strategies, options, oracle_limit)
                for b in tasks
            ]
        rows = [row for batch_rows in batches for row in batch_rows]
        strategy_order = {s: k for k, s in enumerate(strategies)}
        rows.sort(key=lambda r: (r.batch, strategy_order[r.strategy]))
        all_rows.extend(rows)
        summaries.append(_summarize(scenario, rows))
    return BenchReport(rows=tuple(all_rows), summaries=tuple(summaries))
