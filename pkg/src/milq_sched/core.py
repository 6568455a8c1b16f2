"""Domain model for QPU batch scheduling.

Jobs are opaque resource consumers (a qubit width and a synthetic depth),
machines are capacity-limited QPUs, and a schedule assigns each job a
machine, a start, and a completion time.  Occupation uses half-open
intervals [start, completion): a job completing at t and a job starting
at t never overlap.

The successor relation on a schedule is the backbone of setup-time
accounting: the predecessors of a job are the jobs in the *last
completion layer* at or before its start on the same machine (the dummy
job ``0`` when nothing has completed yet), and the realized setup is the
maximum setup time over that layer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping

#: Identifier of the artificial dummy predecessor. Real jobs must not use it.
DUMMY_JOB = "0"

SCHEMA_VERSION = 1

EvalMode = Literal["sequence_dependent", "job_only"]


class EvaluationError(RuntimeError):
    """Raised when completion times fail to reach a fixed point."""


@dataclass(frozen=True, slots=True)
class JobOrigin:
    """Provenance of a cut fragment: which circuit, which piece, which variant."""

    parent: str
    fragment: int
    variant: int


@dataclass(frozen=True, slots=True)
class CircuitJob:
    """A schedulable unit of work requiring ``qubits`` qubits."""

    id: str
    qubits: int
    depth: int
    origin: JobOrigin | None = None


@dataclass(frozen=True, slots=True)
class Machine:
    """A QPU with a fixed qubit capacity."""

    id: str
    capacity: int


@dataclass(frozen=True, slots=True)
class TimingTables:
    """Processing and setup times.

    ``processing`` maps (job, machine) to a non-negative duration.
    ``setup`` maps (predecessor, job, machine) to a non-negative duration,
    where the predecessor ranges over all jobs plus :data:`DUMMY_JOB`.
    Tables are treated as read-only after construction.
    """

    processing: Mapping[tuple[str, str], float]
    setup: Mapping[tuple[str, str, str], float]


@dataclass(frozen=True, slots=True)
class Instance:
    """A scheduling problem: jobs, machines, timing, and solver metaparameters.

    ``t_max`` is the number of the last time slot (slots run 0..t_max) and
    ``granularity`` is the width of one slot in time units.
    """

    jobs: tuple[CircuitJob, ...]
    machines: tuple[Machine, ...]
    timing: TimingTables
    big_m: float
    t_max: int
    granularity: float = 1.0

    def job(self, job_id: str) -> CircuitJob:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise KeyError(job_id)

    def machine(self, machine_id: str) -> Machine:
        for m in self.machines:
            if m.id == machine_id:
                return m
        raise KeyError(machine_id)

    def processing(self, job_id: str, machine_id: str) -> float:
        return self.timing.processing[(job_id, machine_id)]

    def setup(self, pred_id: str, job_id: str, machine_id: str) -> float:
        return self.timing.setup[(pred_id, job_id, machine_id)]

    def horizon(self) -> float:
        """Latest admissible completion time."""
        return self.t_max * self.granularity


@dataclass(frozen=True, slots=True)
class ScheduleEntry:
    """One job's placement: machine, start, completion."""

    job: str
    machine: str
    start: float
    completion: float


@dataclass(frozen=True, slots=True)
class Schedule:
    """A complete assignment with one entry per job."""

    entries: tuple[ScheduleEntry, ...]
    makespan: float

    def entry(self, job_id: str) -> ScheduleEntry:
        for e in self.entries:
            if e.job == job_id:
                return e
        raise KeyError(job_id)


@dataclass(frozen=True, slots=True)
class SuccessorMap:
    """Realized predecessor triples (pred, job, machine); pred may be the dummy."""

    relation: frozenset[tuple[str, str, str]]

    def predecessors(self, job_id: str) -> set[str]:
        return {i for (i, j, _m) in self.relation if j == job_id}


def make_schedule(entries: Iterable[ScheduleEntry]) -> Schedule:
    """Build a Schedule with the makespan recomputed from its entries."""
    ordered = tuple(sorted(entries, key=lambda e: (e.machine, e.start, e.job)))
    makespan = max((e.completion for e in ordered), default=0.0)
    return Schedule(entries=ordered, makespan=makespan)


def _t_max_lower_bound(instance: Instance) -> int:
    """Crude workload bound: no schedule fits below this many slots."""
    total = 0.0
    for job in instance.jobs:
        best = math.inf
        for m in instance.machines:
            p = instance.timing.processing.get((job.id, m.id))
            if p is None:
                continue
            setups = [
                instance.timing.setup.get((i, job.id, m.id))
                for i in [DUMMY_JOB] + [j.id for j in instance.jobs]
            ]
            setups = [s for s in setups if s is not None]
            best = min(best, p + (min(setups) if setups else 0.0))
        if best is not math.inf:
            total += best
    if not instance.machines:
        return 0
    return math.ceil(total / (instance.granularity * len(instance.machines)))


def validate_instance(instance: Instance) -> list[str]:
    """Return a description of every violated instance invariant (empty if none)."""
    violations: list[str] = []
    seen_jobs: set[str] = set()
    for job in instance.jobs:
        if job.id in seen_jobs:
            violations.append(f"duplicate job id {job.id}")
        seen_jobs.add(job.id)
        if job.id == DUMMY_JOB:
            violations.append(f"job id {DUMMY_JOB} is reserved for the dummy job")
        if job.qubits < 1:
            violations.append(f"job {job.id} qubits must be >= 1")
        if job.depth < 1:
            violations.append(f"job {job.id} depth must be >= 1")
    seen_machines: set[str] = set()
    for m in instance.machines:
        if m.id in seen_machines:
            violations.append(f"duplicate machine id {m.id}")
        seen_machines.add(m.id)
        if m.capacity < 1:
            violations.append(f"machine {m.id} capacity must be >= 1")
    for job in instance.jobs:
        if not any(job.qubits <= m.capacity for m in instance.machines):
            violations.append(f"job {job.id} fits no machine")
    missing_p = [
        (j.id, m.id)
        for j in instance.jobs
        for m in instance.machines
        if (j.id, m.id) not in instance.timing.processing
    ]
    if missing_p:
        violations.append(
            f"processing table incomplete: missing {sorted(missing_p)[:3]}"
        )
    preds = [DUMMY_JOB] + [j.id for j in instance.jobs]
    missing_s = [
        (i, j.id, m.id)
        for i in preds
        for j in instance.jobs
        for m in instance.machines
        if (i, j.id, m.id) not in instance.timing.setup
    ]
    if missing_s:
        violations.append(f"setup table incomplete: missing {sorted(missing_s)[:3]}")
    negatives = [k for k, v in instance.timing.processing.items() if v < 0]
    negatives += [k for k, v in instance.timing.setup.items() if v < 0]
    if negatives:
        violations.append(f"negative times at {sorted(negatives)[:3]}")
    if instance.granularity <= 0:
        violations.append("granularity must be > 0")
    if instance.t_max < 1:
        violations.append("t_max must be >= 1")
    if instance.big_m <= instance.t_max:
        violations.append(
            f"big_m {instance.big_m} must strictly exceed t_max {instance.t_max}"
        )
    if not missing_p and not missing_s and instance.granularity > 0:
        bound = _t_max_lower_bound(instance)
        if instance.t_max < bound:
            violations.append(f"t_max {instance.t_max} below lower bound {bound}")
    return violations


def _check_entries(schedule: Schedule, instance: Instance) -> list[str]:
    errors = []
    known_jobs = {j.id for j in instance.jobs}
    known_machines = {m.id for m in instance.machines}
    for e in schedule.entries:
        if e.job not in known_jobs:
            errors.append(f"unknown job {e.job}")
        if e.machine not in known_machines:
            errors.append(f"unknown machine {e.machine}")
    return errors


def derive_successors(schedule: Schedule, instance: Instance) -> SuccessorMap:
    """Compute the realized predecessor relation of a schedule.

    For each job j on machine m, the predecessors are the jobs on m in the
    last completion layer at or before j's start: the jobs whose completion
    equals max{c_i : c_i <= b_j}.  A completion exactly at b_j supersedes
    earlier layers; jobs completing at the same instant do not supersede
    each other.  When no job on m has completed by b_j, the dummy job is
    the sole predecessor.
    """
    bad = _check_entries(schedule, instance)
    if bad:
        raise ValueError("; ".join(bad))
    relation: set[tuple[str, str, str]] = set()
    by_machine: dict[str, list[ScheduleEntry]] = {}
    for e in schedule.entries:
        by_machine.setdefault(e.machine, []).append(e)
    for machine_id, entries in by_machine.items():
        for e in entries:
            done = [o for o in entries if o.job != e.job and o.completion <= e.start]
            if not done:
                relation.add((DUMMY_JOB, e.job, machine_id))
                continue
            layer = max(o.completion for o in done)
            for o in done:
                if o.completion == layer:
                    relation.add((o.job, e.job, machine_id))
    return SuccessorMap(relation=frozenset(relation))


def realized_setup(
    job_id: str,
    machine_id: str,
    start: float,
    peers: list[tuple[str, float]],
    instance: Instance,
) -> float:
    """Realized setup for a job given (peer, completion) pairs on its machine."""
    done = [(i, c) for (i, c) in peers if i != job_id and c <= start]
    if not done:
        return instance.setup(DUMMY_JOB, job_id, machine_id)
    layer = max(c for (_i, c) in done)
    return max(instance.setup(i, job_id, machine_id) for (i, c) in done if c == layer)


def evaluate_schedule(
    assignment: Iterable[tuple[str, str, float]] | Schedule,
    instance: Instance,
    mode: EvalMode = "sequence_dependent",
) -> Schedule:
    """Recompute completion times for given (job, machine, start) placements.

    In ``sequence_dependent`` mode each completion is
    start + processing + (max setup over the realized predecessor layer),
    iterated until the successor relation implied by the computed
    completions is a fixed point.  In ``job_only`` mode the setup is the
    predecessor-independent aggregate max_i s(i, j, m).

    Raises :class:`EvaluationError` if no fixed point is reached within
    len(jobs) iterations (a cyclic timing dependency).
    """
    if isinstance(assignment, Schedule):
        triples = [(e.job, e.machine, e.start) for e in assignment.entries]
    else:
        triples = list(assignment)
    seen = set()
    for job_id, machine_id, start in triples:
        if job_id in seen:
            raise ValueError(f"duplicate job {job_id} in assignment")
        seen.add(job_id)
        instance.job(job_id)
        instance.machine(machine_id)
        if start < 0:
            raise ValueError(f"negative start for job {job_id}")

    if mode == "job_only":
        agg: dict[tuple[str, str], float] = {}
        preds = [DUMMY_JOB] + [j.id for j in instance.jobs]
        for job_id, machine_id, _ in triples:
            agg[(job_id, machine_id)] = max(
                instance.setup(i, job_id, machine_id) for i in preds
            )
        entries = [
            ScheduleEntry(
                job=j,
                machine=m,
                start=b,
                completion=b + instance.processing(j, m) + agg[(j, m)],
            )
            for (j, m, b) in triples
        ]
        return make_schedule(entries)

    completions = {
        j: b + instance.processing(j, m) for (j, m, b) in triples
    }
    by_machine: dict[str, list[tuple[str, float]]] = {}
    for j, m, b in triples:
        by_machine.setdefault(m, []).append((j, b))
    n = max(1, len(triples))
    for _iteration in range(n + 1):
        updated: dict[str, float] = {}
        for m, placed in by_machine.items():
            peers = [(j, completions[j]) for (j, _b) in placed]
            for j, b in placed:
                setup = realized_setup(j, m, b, peers, instance)
                updated[j] = b + instance.processing(j, m) + setup
        if updated == completions:
            entries = [
                ScheduleEntry(job=j, machine=m, start=b, completion=completions[j])
                for (j, m, b) in triples
            ]
            return make_schedule(entries)
        completions = updated
    raise EvaluationError(
        f"completion times did not converge within {n} iterations"
    )


def validate_schedule(schedule: Schedule, instance: Instance) -> list[str]:
    """Return a description of every violated schedule invariant (empty if none)."""
    violations: list[str] = []
    entry_jobs = [e.job for e in schedule.entries]
    known_jobs = {j.id for j in instance.jobs}
    known_machines = {m.id for m in instance.machines}
    for job_id in entry_jobs:
        if job_id not in known_jobs:
            violations.append(f"unknown job {job_id}")
    for j in instance.jobs:
        count = entry_jobs.count(j.id)
        if count == 0:
            violations.append(f"job {j.id} has no entry")
        elif count > 1:
            violations.append(f"job {j.id} has {count} entries")
    horizon = instance.horizon()
    for e in schedule.entries:
        if e.machine not in known_machines:
            violations.append(f"unknown machine {e.machine}")
            continue
        if e.job not in known_jobs:
            continue
        if e.completion <= e.start:
            violations.append(f"job {e.job} completion must exceed start")
        if instance.job(e.job).qubits > instance.machine(e.machine).capacity:
            violations.append(f"job {e.job} does not fit {e.machine}")
        if e.start < 0 or e.completion > horizon:
            violations.append(
                f"job {e.job} interval [{e.start}, {e.completion}) outside "
                f"[0, {horizon}]"
            )
    by_machine: dict[str, list[ScheduleEntry]] = {}
    for e in schedule.entries:
        if e.machine in known_machines and e.job in known_jobs:
            by_machine.setdefault(e.machine, []).append(e)
    for machine_id, entries in sorted(by_machine.items()):
        capacity = instance.machine(machine_id).capacity
        # Peak usage of half-open intervals occurs at some interval start.
        for e in entries:
            usage = sum(
                instance.job(o.job).qubits
                for o in entries
                if o.start <= e.start < o.completion
            )
            if usage > capacity:
                violations.append(
                    f"capacity exceeded on {machine_id} at t={e.start:g}"
                )
                break
    actual = max((e.completion for e in schedule.entries), default=0.0)
    if schedule.makespan != actual:
        violations.append(
            f"makespan {schedule.makespan} != max completion {actual}"
        )
    return violations


# ---------------------------------------------------------------------------
# JSON serialization (schema files under milq_sched/schemas/)
# ---------------------------------------------------------------------------


def instance_to_json(instance: Instance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "jobs": [
            {
                "id": j.id,
                "qubits": j.qubits,
                "depth": j.depth,
                **(
                    {
                        "origin": {
                            "parent": j.origin.parent,
                            "fragment": j.origin.fragment,
                            "variant": j.origin.variant,
                        }
                    }
                    if j.origin
                    else {}
                ),
            }
            for j in instance.jobs
        ],
        "machines": [
            {"id": m.id, "capacity": m.capacity} for m in instance.machines
        ],
        "timing": {
            "processing": _nest2(instance.timing.processing),
            "setup": _nest3(instance.timing.setup),
        },
        "big_m": instance.big_m,
        "t_max": instance.t_max,
        "granularity": instance.granularity,
    }


def instance_from_json(data: dict) -> Instance:
    jobs = tuple(
        CircuitJob(
            id=j["id"],
            qubits=j["qubits"],
            depth=j["depth"],
            origin=(
                JobOrigin(
                    parent=j["origin"]["parent"],
                    fragment=j["origin"]["fragment"],
                    variant=j["origin"]["variant"],
                )
                if j.get("origin")
                else None
            ),
        )
        for j in data["jobs"]
    )
    machines = tuple(
        Machine(id=m["id"], capacity=m["capacity"]) for m in data["machines"]
    )
    processing = {
        (j, m): float(v)
        for j, row in data["timing"]["processing"].items()
        for m, v in row.items()
    }
    setup = {
        (i, j, m): float(v)
        for i, block in data["timing"]["setup"].items()
        for j, row in block.items()
        for m, v in row.items()
    }
    return Instance(
        jobs=jobs,
        machines=machines,
        timing=TimingTables(processing=processing, setup=setup),
        big_m=float(data["big_m"]),
        t_max=int(data["t_max"]),
        granularity=float(data.get("granularity", 1.0)),
    )


def schedule_to_json(schedule: Schedule) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "entries": [
            {
                "job": e.job,
                "machine": e.machine,
                "start": e.start,
                "completion": e.completion,
            }
            for e in schedule.entries
        ],
        "makespan": schedule.makespan,
    }


def schedule_from_json(data: dict) -> Schedule:
    entries = tuple(
        ScheduleEntry(
            job=e["job"],
            machine=e["machine"],
            start=float(e["start"]),
            completion=float(e["completion"]),
        )
        for e in data["entries"]
    )
    return Schedule(entries=entries, makespan=float(data["makespan"]))


def _nest2(table: Mapping[tuple[str, str], float]) -> dict:
    out: dict[str, dict[str, float]] = {}
    for (a, b), v in sorted(table.items()):
        out.setdefault(a, {})[b] = v
    return out


def _nest3(table: Mapping[tuple[str, str, str], float]) -> dict:
    out: dict[str, dict[str, dict[str, float]]] = {}
    for (a, b, c), v in sorted(table.items()):
        out.setdefault(a, {}).setdefault(b, {})[c] = v
    return out


def dump_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
