"""Batch scheduling of quantum-circuit jobs on heterogeneous QPU clusters.

Public surface: domain types and the schedule evaluator (:mod:`.core`),
greedy width cutting (:mod:`.cutting`), synthetic timing generators
(:mod:`.timing`), the time-indexed MILP builder (:mod:`.milp`),
scheduling strategies (:mod:`.solvers`), and the benchmark harness
(:mod:`.bench`).
"""

from .bench import BenchReport, Scenario, builtin_scenarios, gen_batch, run_scenarios
from .core import (
    DUMMY_JOB,
    CircuitJob,
    Instance,
    JobOrigin,
    Machine,
    Schedule,
    ScheduleEntry,
    SuccessorMap,
    TimingTables,
    derive_successors,
    evaluate_schedule,
    instance_from_json,
    instance_to_json,
    make_schedule,
    schedule_from_json,
    schedule_to_json,
    validate_instance,
    validate_schedule,
)
from .cutting import CircuitSpec, CutPlan, expand_subjobs, plan_cut, resize_batch
from .gantt import render_gantt
from .milp import (
    MilpModel,
    MilpSolution,
    build_extended,
    build_simple,
    extract_schedule,
    parse_solution,
    serialize_lp,
)
from .solvers import (
    Bin,
    SolveResult,
    SolverOptions,
    pack_ffd,
    solve,
    solve_baseline,
    solve_greedy,
    solve_milp,
    solve_oracle,
)
from .timing import TimingConfig, aggregate_setup_max, gen_processing, gen_setup, gen_timing

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "Bin",
    "CircuitJob",
    "CircuitSpec",
    "CutPlan",
    "DUMMY_JOB",
    "Instance",
    "JobOrigin",
    "Machine",
    "MilpModel",
    "MilpSolution",
    "Scenario",
    "Schedule",
    "ScheduleEntry",
    "SolveResult",
    "SolverOptions",
    "SuccessorMap",
    "TimingConfig",
    "TimingTables",
    "aggregate_setup_max",
    "build_extended",
    "build_simple",
    "builtin_scenarios",
    "derive_successors",
    "evaluate_schedule",
    "expand_subjobs",
    "extract_schedule",
    "gen_batch",
    "gen_processing",
    "gen_setup",
    "gen_timing",
    "instance_from_json",
    "instance_to_json",
    "make_schedule",
    "pack_ffd",
    "parse_solution",
    "plan_cut",
    "render_gantt",
    "resize_batch",
    "run_scenarios",
    "schedule_from_json",
    "schedule_to_json",
    "serialize_lp",
    "solve",
    "solve_baseline",
    "solve_greedy",
    "solve_milp",
    "solve_oracle",
    "validate_instance",
    "validate_schedule",
]
