"""Scheduling strategies: FFD baseline, greedy, exhaustive oracle, MILP.

All strategies operate on the same admissible schedule space: a job
starts at time 0 or at/after the completion of some earlier job on its
machine, capacity is respected on half-open intervals, and completions
follow the realized-setup recursion of
:func:`milq_sched.core.evaluate_schedule`.
"""

from __future__ import annotations

import itertools
import math
import os
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .core import (
    DUMMY_JOB,
    CircuitJob,
    Instance,
    Machine,
    Schedule,
    ScheduleEntry,
    evaluate_schedule,
    make_schedule,
    realized_setup,
    validate_schedule,
)
from .milp import (
    ExtractionError,
    MilpModel,
    MilpSolution,
    assignment_from_schedule,
    build_extended,
    build_simple,
    evaluate_constraints,
    extract_schedule,
    parse_solution,
    serialize_lp,
)
from .timing import aggregate_setup_max

Strategy = Literal["baseline", "simple", "extended", "oracle", "greedy"]

DEFAULT_SOLVER_TEMPLATE = (
    "{python} -m milq_sched.highs_adapter {lp} {sol} --gap {gap} "
    "--time-limit {time_limit}"
)

SOLVER_ENV_VAR = "MILQ_SOLVER_CMD"


class NoSolverError(RuntimeError):
    """No solver adapter is configured."""


class SolverFailure(RuntimeError):
    """The external solver crashed or produced unusable output."""


class InfeasibleModelError(RuntimeError):
    """The model is infeasible; usually t_max is too small."""


class OracleSizeError(ValueError):
    """The instance exceeds the oracle's exhaustiveness limit."""


class OracleDisagreement(RuntimeError):
    """The oracle's two enumeration methods found different optima."""


@dataclass(frozen=True, slots=True)
class SolveResult:
    schedule: Schedule
    strategy: str
    solver_status: str | None = None
    wall_time: float = 0.0
    objective: float | None = None
    reported_gap: float | None = None


@dataclass(slots=True)
class SolverOptions:
    """External solver invocation knobs.

    ``command`` is a template whose tokens may carry the placeholders
    {lp} {sol} {gap} {time_limit} {python}; None selects the bundled
    HiGHS adapter, the literal strings "none"/"off" disable solving.
    The MILQ_SOLVER_CMD environment variable overrides the default.
    """

    gap: float = 0.2
    time_limit: float | None = 60.0
    command: str | None = None


@dataclass(slots=True)
class Bin:
    """One capacity bucket of the first-fit-decreasing baseline."""

    machine: str
    generation: int
    remaining: int
    contents: list[str] = field(default_factory=list)
    state: str = "open"


# ---------------------------------------------------------------------------
# Baseline: first-fit decreasing with machine-pool copies
# ---------------------------------------------------------------------------


def pack_ffd(jobs: Sequence[CircuitJob], machines: Sequence[Machine]) -> list[Bin]:
    """Pack jobs into machine bins, adding a copy of every machine when full.

    Jobs are taken in decreasing qubit order (ties by ascending id); bins
    are scanned in (generation, machine order); a bin closes when its
    remaining capacity hits zero exactly.
    """
    ordered = sorted(jobs, key=lambda j: (-j.qubits, j.id))
    open_bins = [Bin(m.id, 0, m.capacity) for m in machines]
    closed: list[Bin] = []
    generation = 0
    for job in ordered:
        target = next((b for b in open_bins if b.remaining >= job.qubits), None)
        if target is None:
            generation += 1
            fresh = [Bin(m.id, generation, m.capacity) for m in machines]
            target = next((b for b in fresh if b.remaining >= job.qubits), None)
            open_bins.extend(fresh)
            if target is None:
                raise ValueError(f"job {job.id} fits no machine")
        target.contents.append(job.id)
        target.remaining -= job.qubits
        if target.remaining == 0:
            target.state = "closed"
            open_bins.remove(target)
            closed.append(target)
    for b in open_bins:
        b.state = "closed"
    closed.extend(open_bins)
    return closed


def baseline_schedule(instance: Instance) -> Schedule:
    """Timing rule for the packing: generation g starts when g-1 completes."""
    bins = pack_ffd(instance.jobs, instance.machines)
    by_machine: dict[str, list[Bin]] = {}
    for b in bins:
        by_machine.setdefault(b.machine, []).append(b)
    triples: list[tuple[str, str, float]] = []
    for m in instance.machines:
        t = 0.0
        peers: list[tuple[str, float]] = []
        for b in sorted(by_machine.get(m.id, []), key=lambda b: b.generation):
            if not b.contents:
                continue
            completions = []
            for job_id in b.contents:
                setup = realized_setup(job_id, m.id, t, peers, instance)
                completions.append(
                    (job_id, t + instance.processing(job_id, m.id) + setup)
                )
                triples.append((job_id, m.id, t))
            peers.extend(completions)
            t = max(c for _, c in completions)
    return evaluate_schedule(triples, instance, "sequence_dependent")


def solve_baseline(instance: Instance) -> SolveResult:
    start = time.perf_counter()
    schedule = baseline_schedule(instance)
    return SolveResult(
        schedule=schedule,
        strategy="baseline",
        wall_time=time.perf_counter() - start,
        objective=schedule.makespan,
    )


# ---------------------------------------------------------------------------
# Shared placement machinery
# ---------------------------------------------------------------------------


def _capacity_ok(
    interval: tuple[float, float],
    qubits: int,
    placed: list[ScheduleEntry],
    capacity: int,
    instance: Instance,
) -> bool:
    lo, hi = interval
    events = [lo] + [e.start for e in placed if lo < e.start < hi]
    for t in events:
        usage = qubits + sum(
            instance.job(e.job).qubits
            for e in placed
            if e.start <= t < e.completion
        )
        if usage > capacity:
            return False
    return True


def _place(
    job: CircuitJob,
    machine: Machine,
    start: float,
    placed: list[ScheduleEntry],
    instance: Instance,
    aggregated: dict[tuple[str, str], float] | None = None,
) -> ScheduleEntry | None:
    """Entry for the job at this start, or None if capacity or window fail."""
    if aggregated is not None:
        setup = aggregated[(job.id, machine.id)]
    else:
        peers = [(e.job, e.completion) for e in placed]
        setup = realized_setup(job.id, machine.id, start, peers, instance)
    completion = start + instance.processing(job.id, machine.id) + setup
    if completion > instance.horizon():
        return None
    if not _capacity_ok(
        (start, completion), job.qubits, placed, machine.capacity, instance
    ):
        return None
    return ScheduleEntry(
        job=job.id, machine=machine.id, start=start, completion=completion
    )


def _candidate_starts(placed: list[ScheduleEntry]) -> list[float]:
    return sorted({0.0} | {e.completion for e in placed})


def solve_greedy(
    instance: Instance,
    mode: Literal["sequence_dependent", "job_only"] = "sequence_dependent",
) -> SolveResult:
    """Longest-processing-time list scheduling with earliest feasible starts."""
    start_time = time.perf_counter()
    aggregated = (
        aggregate_setup_max(dict(instance.timing.setup))
        if mode == "job_only"
        else None
    )

    def lpt_key(job: CircuitJob) -> tuple[float, str]:
        times = [
            instance.processing(job.id, m.id)
            for m in instance.machines
            if job.qubits <= m.capacity
        ]
        return (-(sum(times) / len(times)), job.id)

    placed: dict[str, list[ScheduleEntry]] = {m.id: [] for m in instance.machines}
    for job in sorted(instance.jobs, key=lpt_key):
        best: ScheduleEntry | None = None
        for m in instance.machines:
            if job.qubits > m.capacity:
                continue
            for t in _candidate_starts(placed[m.id]):
                entry = _place(job, m, t, placed[m.id], instance, aggregated)
                if entry is not None:
                    if best is None or entry.completion < best.completion:
                        best = entry
                    break
        if best is None:
            raise ValueError(f"no feasible placement for job {job.id}")
        placed[best.machine].append(best)
    triples = [
        (e.job, e.machine, e.start) for entries in placed.values() for e in entries
    ]
    schedule = evaluate_schedule(triples, instance, mode)
    return SolveResult(
        schedule=schedule,
        strategy="greedy",
        wall_time=time.perf_counter() - start_time,
        objective=schedule.makespan,
    )


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------


def _instance_is_integral(instance: Instance) -> bool:
    times = list(instance.timing.processing.values()) + list(
        instance.timing.setup.values()
    )
    return instance.granularity == 1.0 and all(t == int(t) for t in times)


def _dfs_optimum(instance: Instance, initial: Schedule) -> Schedule:
    """Branch and bound over chronological placements on the start lattice."""
    jobs = list(instance.jobs)
    machines = list(instance.machines)
    best_entries = list(initial.entries)
    best_makespan = initial.makespan

    placed: dict[str, list[ScheduleEntry]] = {m.id: [] for m in machines}
    chosen: list[ScheduleEntry] = []

    def recurse(remaining: set[str], last: tuple[float, str], makespan: float) -> None:
        nonlocal best_entries, best_makespan
        if not remaining:
            if makespan < best_makespan:
                best_makespan = makespan
                best_entries = list(chosen)
            return
        for job in jobs:
            if job.id not in remaining:
                continue
            for m in machines:
                if job.qubits > m.capacity:
                    continue
                for t in _candidate_starts(placed[m.id]):
                    if (t, job.id) <= last:
                        continue
                    entry = _place(job, m, t, placed[m.id], instance)
                    if entry is None or entry.completion >= best_makespan:
                        continue
                    placed[m.id].append(entry)
                    chosen.append(entry)
                    remaining.discard(job.id)
                    recurse(remaining, (t, job.id), max(makespan, entry.completion))
                    remaining.add(job.id)
                    chosen.pop()
                    placed[m.id].pop()

    recurse({j.id for j in jobs}, (-1.0, ""), 0.0)
    return make_schedule(best_entries)


def _grid_optimum(instance: Instance, ub: int) -> tuple[float, Schedule | None]:
    """Vectorized enumeration of every admissible integer-start schedule.

    Explores all machine assignments and all start tuples in {0..ub},
    applying the same admissibility, capacity, and completion rules as
    the evaluator.  Exact for integer-valued instances.
    """
    jobs = list(instance.jobs)
    machines = list(instance.machines)
    n = len(jobs)
    horizon = int(instance.horizon())
    proc = np.array(
        [
            [int(instance.processing(j.id, m.id)) for m in machines]
            for j in jobs
        ],
        dtype=np.int64,
    )
    setup = np.array(
        [
            [
                [int(instance.setup(i.id, j.id, m.id)) for m in machines]
                for j in jobs
            ]
            for i in jobs
        ],
        dtype=np.int64,
    )
    dummy = np.array(
        [
            [int(instance.setup(DUMMY_JOB, j.id, m.id)) for m in machines]
            for j in jobs
        ],
        dtype=np.int64,
    )
    qubits = np.array([j.qubits for j in jobs], dtype=np.int64)
    caps = np.array([m.capacity for m in machines], dtype=np.int64)

    starts_axis = np.arange(ub + 1, dtype=np.int64)
    grids = np.meshgrid(*([starts_axis] * n), indexing="ij")
    starts = np.stack([g.reshape(-1) for g in grids], axis=1)  # (K, n)
    K = starts.shape[0]

    best_value = np.inf
    best_config: tuple[tuple[int, ...], np.ndarray] | None = None

    fit_options = [
        [mi for mi, m in enumerate(machines) if j.qubits <= m.capacity]
        for j in jobs
    ]
    order = np.argsort(starts, axis=1, kind="stable")  # chronological sweep
    for assignment in itertools.product(*fit_options):
        machine_of = np.array(assignment, dtype=np.int64)
        completion = np.zeros((K, n), dtype=np.int64)
        valid = np.ones(K, dtype=bool)
        for pos in range(n):
            jp = order[:, pos]
            b_p = np.take_along_axis(starts, jp[:, None], axis=1)[:, 0]
            m_p = machine_of[jp]
            layer = np.full(K, -1, dtype=np.int64)
            for q in range(pos):
                jq = order[:, q]
                c_q = np.take_along_axis(completion, jq[:, None], axis=1)[:, 0]
                done = (machine_of[jq] == m_p) & (c_q <= b_p)
                layer = np.where(done & (c_q > layer), c_q, layer)
            setup_p = dummy[jp, m_p]
            has_layer = layer >= 0
            if pos:
                layer_setup = np.full(K, -1, dtype=np.int64)
                for q in range(pos):
                    jq = order[:, q]
                    c_q = np.take_along_axis(completion, jq[:, None], axis=1)[:, 0]
                    in_layer = (
                        (machine_of[jq] == m_p) & (c_q <= b_p) & (c_q == layer)
                    )
                    s_q = setup[jq, jp, m_p]
                    layer_setup = np.where(
                        in_layer & (s_q > layer_setup), s_q, layer_setup
                    )
                setup_p = np.where(has_layer, layer_setup, setup_p)
            # Mid-air starts (no completed predecessor) are inadmissible.
            valid &= (b_p == 0) | has_layer
            c_p = b_p + proc[jp, m_p] + setup_p
            valid &= c_p <= horizon
            np.put_along_axis(completion, jp[:, None], c_p[:, None], axis=1)
        for p in range(n):
            usage = np.full(K, qubits[p], dtype=np.int64)
            for q in range(n):
                if q == p:
                    continue
                same = machine_of[q] == machine_of[p]
                if not same:
                    continue
                overlaps = (starts[:, q] <= starts[:, p]) & (
                    starts[:, p] < completion[:, q]
                )
                usage += qubits[q] * overlaps
            valid &= usage <= caps[machine_of[p]]
        if not valid.any():
            continue
        makespans = np.where(valid, completion.max(axis=1), np.iinfo(np.int64).max)
        k = int(np.argmin(makespans))
        value = float(makespans[k])
        if value < best_value:
            best_value = value
            best_config = (assignment, starts[k].copy())

    if best_config is None:
        return np.inf, None
    assignment, start_row = best_config
    triples = [
        (jobs[i].id, machines[assignment[i]].id, float(start_row[i]))
        for i in range(n)
    ]
    return best_value, evaluate_schedule(triples, instance, "sequence_dependent")


def solve_oracle(
    instance: Instance,
    limit: int = 5,
    cross_check: bool = True,
) -> SolveResult:
    """Exhaustive minimum-makespan search for small instances.

    Runs a branch-and-bound over machine assignments, placement orders,
    and lattice start times.  For up to three jobs with integer times the
    result is cross-validated against a full start-grid enumeration and a
    disagreement raises :class:`OracleDisagreement`.
    """
    n = len(instance.jobs)
    if n > limit:
        raise OracleSizeError(f"instance too large: {n} jobs > limit {limit}")
    start_time = time.perf_counter()
    initial = solve_greedy(instance).schedule
    schedule = _dfs_optimum(instance, initial)
    if cross_check and n and n <= 3 and _instance_is_integral(instance):
        ub = max(0, int(schedule.makespan) - 1)
        grid_value, _ = _grid_optimum(instance, ub)
        grid_value = min(grid_value, schedule.makespan)
        if grid_value < schedule.makespan - 1e-9:
            raise OracleDisagreement(
                f"grid enumeration found makespan {grid_value}, "
                f"permutation search found {schedule.makespan}"
            )
    return SolveResult(
        schedule=schedule,
        strategy="oracle",
        wall_time=time.perf_counter() - start_time,
        objective=schedule.makespan,
    )


# ---------------------------------------------------------------------------
# MILP strategies via the external solver adapter
# ---------------------------------------------------------------------------


def resolve_solver_command(options: SolverOptions) -> str:
    command = options.command
    if command is None:
        command = os.environ.get(SOLVER_ENV_VAR) or DEFAULT_SOLVER_TEMPLATE
    if command.strip().lower() in ("", "none", "off"):
        raise NoSolverError(
            "no solver configured: set MILQ_SOLVER_CMD or pass a command template"
        )
    return command


def run_solver(
    model: MilpModel, options: SolverOptions, workdir: Path | None = None
) -> MilpSolution:
    """Serialize the model, invoke the adapter process, parse its output."""
    template = resolve_solver_command(options)
    lp_text = serialize_lp(model)
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "solution.txt"
        lp_path.write_text(lp_text, encoding="utf-8")
        mapping = {
            "lp": str(lp_path),
            "sol": str(sol_path),
            "gap": str(options.gap),
            "time_limit": str(options.time_limit or 0),
            "python": sys.executable,
        }
        tokens = [token.format(**mapping) for token in shlex.split(template)]
        budget = None if options.time_limit is None else options.time_limit + 60
        try:
            proc = subprocess.run(
                tokens, capture_output=True, text=True, timeout=budget
            )
        except FileNotFoundError as exc:
            raise NoSolverError(f"solver executable not found: {exc}") from exc
        except subprocess.TimeoutExpired as exc:
            raise SolverFailure(f"solver exceeded its time budget: {exc}") from exc
        if proc.returncode != 0:
            raise SolverFailure(
                f"solver exited with {proc.returncode}: {proc.stderr.strip()[-500:]}"
            )
        if not sol_path.exists():
            raise SolverFailure("solver wrote no solution file")
        return parse_solution(sol_path.read_text(encoding="utf-8"), model)


def _tighten_horizon(model: MilpModel, ub_slots: int) -> None:
    """Cap completion variables at a known-feasible makespan (bounds only)."""
    vs = model.variables
    cap = float(ub_slots)
    for name in list(vs.c.values()) + list(vs.b.values()):
        lb, old = vs.bounds[name]
        vs.bounds[name] = (lb, min(old, cap))
    if vs.c_max:
        lb, old = vs.bounds[vs.c_max]
        vs.bounds[vs.c_max] = (lb, min(old, cap))
    for (_j, _m, t), name in vs.z.items():
        if t >= ub_slots:
            vs.bounds[name] = (0.0, 0.0)


def _pin_assignment(model: MilpModel, schedule: Schedule) -> None:
    """Fix the machine-choice binaries to a schedule's assignment."""
    assigned = {e.job: e.machine for e in schedule.entries}
    for (j, m), name in model.variables.x.items():
        pin = 1.0 if assigned.get(j) == m else 0.0
        model.variables.bounds[name] = (pin, pin)


def _verified_incumbent(
    model: MilpModel, instance: Instance, schedule: Schedule
) -> float | None:
    """Makespan in slots if the schedule is a feasible model solution."""
    try:
        values = assignment_from_schedule(model, instance, schedule)
    except ValueError:
        return None
    if evaluate_constraints(model, values):
        return None
    return schedule.makespan / instance.granularity


def _solve_extended_staged(
    instance: Instance, options: SolverOptions, start_time: float
) -> SolveResult:
    """Exact staged search for the extended model.

    A feasible incumbent (the better of baseline and greedy, verified
    against the model) caps the horizon; a first solve with the machine
    assignment pinned refines its timing cheaply; the final free solve
    runs under the best-known cap and supplies the optimality status.
    """
    heuristics = [solve_baseline(instance).schedule,
                  solve_greedy(instance).schedule]
    incumbent = min(heuristics, key=lambda s: s.makespan)
    probe = build_extended(instance)
    ub = _verified_incumbent(probe, instance, incumbent)
    if ub is None:
        raise SolverFailure(
            "heuristic schedule failed model verification; cannot warm-start"
        )
    best_schedule = incumbent
    best_value = incumbent.makespan

    budget = options.time_limit
    stage_a_limit = None if budget is None else max(5.0, 0.25 * budget)

    model_a = build_extended(instance)
    _tighten_horizon(model_a, int(math.ceil(ub)))
    _pin_assignment(model_a, incumbent)
    try:
        sol_a = run_solver(
            model_a, SolverOptions(gap=options.gap, time_limit=stage_a_limit,
                                   command=options.command)
        )
        if sol_a.status in ("optimal", "gap_terminated"):
            schedule_a = extract_schedule(sol_a, instance)
            if schedule_a.makespan < best_value:
                best_schedule, best_value = schedule_a, schedule_a.makespan
    except (SolverFailure, ExtractionError):
        pass  # the incumbent stands; the free stage still runs

    remaining = (
        None
        if budget is None
        else max(5.0, budget - (time.perf_counter() - start_time))
    )
    model_b = build_extended(instance)
    _tighten_horizon(
        model_b, int(math.ceil(best_value / instance.granularity))
    )
    sol_b = run_solver(
        model_b, SolverOptions(gap=options.gap, time_limit=remaining,
                               command=options.command)
    )
    status = "gap_terminated"
    gap = 1.0
    if sol_b.status == "optimal":
        status, gap = "optimal", 0.0
        schedule_b = extract_schedule(sol_b, instance)
        best_schedule, best_value = schedule_b, schedule_b.makespan
    elif sol_b.status == "gap_terminated":
        schedule_b = extract_schedule(sol_b, instance)
        if schedule_b.makespan <= best_value:
            best_schedule, best_value = schedule_b, schedule_b.makespan
            gap = sol_b.reported_gap
    elif sol_b.status == "infeasible":
        raise SolverFailure(
            "bounded model infeasible although the bound came from a "
            "verified feasible schedule"
        )
    return SolveResult(
        schedule=best_schedule,
        strategy="extended",
        solver_status=status,
        wall_time=time.perf_counter() - start_time,
        objective=best_value,
        reported_gap=gap,
    )


def solve_milp(
    instance: Instance,
    mode: Literal["simple", "extended"],
    options: SolverOptions | None = None,
) -> SolveResult:
    """Build, solve, and extract one of the two MILP variants.

    On integer-valued instances the extended model is solved in verified
    warm-started stages (see :func:`_solve_extended_staged`); simple-mode
    schedules are re-evaluated under the original sequence-dependent
    setups before being reported.
    """
    options = options or SolverOptions()
    start_time = time.perf_counter()
    resolve_solver_command(options)  # fail fast when unconfigured
    if mode == "extended" and _instance_is_integral(instance):
        return _solve_extended_staged(instance, options, start_time)
    if mode == "extended":
        model = build_extended(instance)
    else:
        aggregated = aggregate_setup_max(dict(instance.timing.setup))
        model = build_simple(instance, aggregated)
        if _instance_is_integral(instance):
            hint = solve_greedy(instance, mode="job_only").schedule
            ub = _verified_incumbent(model, instance, hint)
            if ub is not None:
                _tighten_horizon(model, int(math.ceil(ub)))
    solution = run_solver(model, options)
    if solution.status == "infeasible":
        raise InfeasibleModelError(
            f"{mode} model infeasible: raise t_max (currently {instance.t_max})"
        )
    if solution.status == "timeout":
        raise SolverFailure("solver hit its limit without an incumbent")
    schedule = extract_schedule(solution, instance)
    if mode == "simple":
        schedule = evaluate_schedule(schedule, instance, "sequence_dependent")
        leftover = validate_schedule(schedule, instance)
        if leftover:
            raise SolverFailure(
                "re-evaluated simple schedule invalid: " + "; ".join(leftover)
            )
    return SolveResult(
        schedule=schedule,
        strategy=mode,
        solver_status=solution.status,
        wall_time=time.perf_counter() - start_time,
        objective=solution.objective * instance.granularity,
        reported_gap=solution.reported_gap,
    )


def solve(
    instance: Instance,
    strategy: Strategy,
    options: SolverOptions | None = None,
    oracle_limit: int = 5,
) -> SolveResult:
    """Dispatch to one strategy by name."""
    if strategy == "baseline":
        return solve_baseline(instance)
    if strategy == "greedy":
        return solve_greedy(instance)
    if strategy == "oracle":
        result = solve_oracle(instance, limit=oracle_limit)
        return SolveResult(
            schedule=result.schedule,
            strategy="oracle",
            wall_time=result.wall_time,
            objective=result.objective,
        )
    if strategy in ("simple", "extended"):
        return solve_milp(instance, strategy, options)
    raise ValueError(f"unknown strategy {strategy!r}")
