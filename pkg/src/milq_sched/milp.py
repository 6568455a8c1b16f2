"""Time-indexed MILP formulations for the scheduling problem.

Two models share the binary occupation grid z(j, m, t):

* ``extended`` carries the full sequence-dependent setup machinery: a
  successor pick y per job, plus indicator helpers alpha/beta/gamma/delta
  that pin the pick to the realized predecessor layer of
  :func:`milq_sched.core.derive_successors`.
* ``simple`` drops all successor machinery and charges the aggregated
  predecessor-independent setup s(j, m) inside the completion equation.

Slot conventions (the single source of the +-1 rules): slot t covers
[t, t+1) in slot units; a job occupies exactly the slots [b_j, c_j), so
the occupation count is c_j - b_j (C7) and an occupied slot t implies
c_j >= t + 1 (C9) and b_j <= t (C10).  Capacity per slot (C11) is then
identical to the evaluator's half-open interval check.  Real-valued
times are divided by the granularity and rounded up before building;
results are scaled back on extraction.

Successor semantics in the extended model: alpha(i,j) = 1 iff
c_i <= b_j, beta(i,j) = 1 iff c_i < c_j, gamma(i,j,m) = 1 iff both run
on m, and delta(i,j,k,m) = 1 if k runs on m and completes inside
(c_i, b_j].  Each job picks exactly one predecessor (C12): a job in
slot 0 must pick the dummy (C15), any other job must pick a predecessor
from its realized layer (C20 reverse bounds), and the per-predecessor
lower bounds C5R force the picked setup to be the layer maximum, which
makes the completion equation C5 reproduce the evaluator exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping

from .core import (
    DUMMY_JOB,
    Instance,
    Schedule,
    ScheduleEntry,
    derive_successors,
    make_schedule,
    validate_instance,
    validate_schedule,
)

ModelMode = Literal["extended", "simple"]

SOLUTION_STATUSES = ("optimal", "gap_terminated", "infeasible", "timeout")


class ModelBuildError(ValueError):
    """Raised when an instance cannot be turned into a model."""


class SizingError(ModelBuildError):
    """Raised when t_max is below the workload lower bound."""


class SolutionParseError(ValueError):
    """Raised on malformed or inconsistent solver output."""


class ExtractionError(ValueError):
    """Raised when a solution does not yield a valid schedule."""


def sanitize(identifier: str) -> str:
    """Restrict an id to LP-safe characters."""
    return re.sub(r"[^A-Za-z0-9]", "_", identifier)


@dataclass(slots=True)
class VarSpace:
    """Ordered variable registry with structured name lookups."""

    names: list[str] = field(default_factory=list)
    kinds: dict[str, str] = field(default_factory=dict)  # "binary" | "continuous"
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    x: dict[tuple[str, str], str] = field(default_factory=dict)
    y: dict[tuple[str, str, str], str] = field(default_factory=dict)
    z: dict[tuple[str, str, int], str] = field(default_factory=dict)
    alpha: dict[tuple[str, str], str] = field(default_factory=dict)
    beta: dict[tuple[str, str], str] = field(default_factory=dict)
    gamma: dict[tuple[str, str, str], str] = field(default_factory=dict)
    delta: dict[tuple[str, str, str, str], str] = field(default_factory=dict)
    c: dict[str, str] = field(default_factory=dict)
    b: dict[str, str] = field(default_factory=dict)
    c_dummy: str | None = None
    c_max: str | None = None

    def add(self, name: str, kind: str, lb: float = 0.0, ub: float = 1.0) -> str:
        if name in self.kinds:
            raise ModelBuildError(f"duplicate variable name {name}")
        self.names.append(name)
        self.kinds[name] = kind
        self.bounds[name] = (lb, ub)
        return name


@dataclass(frozen=True, slots=True)
class Constraint:
    name: str
    family: str
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=", ">=", "="
    rhs: float


@dataclass(slots=True)
class MilpModel:
    mode: ModelMode
    variables: VarSpace
    constraints: list[Constraint]
    objective: tuple[tuple[str, float], ...]
    stats: dict[str, int]
    granularity: float
    job_ids: tuple[str, ...]
    machine_ids: tuple[str, ...]

    def family_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for con in self.constraints:
            counts[con.family] = counts.get(con.family, 0) + 1
        return counts


@dataclass(frozen=True, slots=True)
class MilpSolution:
    status: str
    objective: float
    values: Mapping[str, float]
    reported_gap: float

    def value(self, name: str) -> float:
        return self.values.get(name, 0.0)


# ---------------------------------------------------------------------------
# Slot conversion
# ---------------------------------------------------------------------------


def _slots(value: float, granularity: float, floor: int) -> int:
    return max(floor, math.ceil(round(value / granularity, 9)))


def slot_tables(
    instance: Instance,
) -> tuple[dict[tuple[str, str], int], dict[tuple[str, str, str], int]]:
    """Round timing tables up to whole slots; processing gets at least one."""
    g = instance.granularity
    p = {k: _slots(v, g, 1) for k, v in instance.timing.processing.items()}
    s = {k: _slots(v, g, 0) for k, v in instance.timing.setup.items()}
    return p, s


def _prepare(instance: Instance) -> tuple[
    dict[tuple[str, str], int], dict[tuple[str, str, str], int]
]:
    violations = validate_instance(instance)
    sizing = [v for v in violations if v.startswith("t_max")]
    if sizing:
        raise SizingError("; ".join(sizing))
    if violations:
        raise ModelBuildError("; ".join(violations))
    return slot_tables(instance)


# ---------------------------------------------------------------------------
# Model building
# ---------------------------------------------------------------------------


class _Builder:
    def __init__(self, instance: Instance, mode: ModelMode) -> None:
        self.instance = instance
        self.mode: ModelMode = mode
        self.vs = VarSpace()
        self.constraints: list[Constraint] = []
        self.jobs = [j.id for j in instance.jobs]
        self.machines = [m.id for m in instance.machines]
        self.sj = {j: sanitize(j) for j in self.jobs}
        self.sm = {m: sanitize(m) for m in self.machines}
        if len(set(self.sj.values())) != len(self.jobs):
            raise ModelBuildError("job ids collide after sanitization")
        if len(set(self.sm.values())) != len(self.machines):
            raise ModelBuildError("machine ids collide after sanitization")
        self.M = float(instance.big_m)
        self.T = instance.t_max

    def add_con(
        self,
        family: str,
        suffix: str,
        terms: dict[str, float] | list[tuple[str, float]],
        sense: str,
        rhs: float,
    ) -> None:
        name = family if not suffix else f"{family}_{suffix}"
        if isinstance(terms, list):
            acc: dict[str, float] = {}
            for var, coef in terms:
                acc[var] = acc.get(var, 0.0) + coef
            terms = acc
        kept = tuple((v, c) for v, c in terms.items() if c != 0.0)
        self.constraints.append(
            Constraint(name=name, family=family, terms=kept, sense=sense, rhs=rhs)
        )

    def declare_variables(self) -> None:
        vs = self.vs
        inst = self.instance
        for j in self.jobs:
            for m in self.machines:
                fits = inst.job(j).qubits <= inst.machine(m).capacity
                vs.x[(j, m)] = vs.add(
                    f"x_{self.sj[j]}_{self.sm[m]}", "binary", 0.0, 1.0 if fits else 0.0
                )
        if self.mode == "extended":
            preds = [DUMMY_JOB] + self.jobs
            succs = [DUMMY_JOB] + self.jobs
            label = {DUMMY_JOB: "0", **self.sj}
            for i in preds:
                for j in succs:
                    if i == DUMMY_JOB and j == DUMMY_JOB:
                        continue
                    for m in self.machines:
                        vs.y[(i, j, m)] = vs.add(
                            f"y_{label[i]}_{label[j]}_{self.sm[m]}", "binary"
                        )
        for j in self.jobs:
            for m in self.machines:
                for t in range(self.T + 1):
                    vs.z[(j, m, t)] = vs.add(
                        f"z_{self.sj[j]}_{self.sm[m]}_{t}", "binary"
                    )
        if self.mode == "extended":
            for i in self.jobs:
                for j in self.jobs:
                    vs.alpha[(i, j)] = vs.add(
                        f"alpha_{self.sj[i]}_{self.sj[j]}", "binary"
                    )
            for i in self.jobs:
                for j in self.jobs:
                    vs.beta[(i, j)] = vs.add(
                        f"beta_{self.sj[i]}_{self.sj[j]}", "binary"
                    )
            for i in self.jobs:
                for j in self.jobs:
                    for m in self.machines:
                        vs.gamma[(i, j, m)] = vs.add(
                            f"gamma_{self.sj[i]}_{self.sj[j]}_{self.sm[m]}", "binary"
                        )
            for i in self.jobs:
                for j in self.jobs:
                    for k in self.jobs:
                        for m in self.machines:
                            vs.delta[(i, j, k, m)] = vs.add(
                                f"delta_{self.sj[i]}_{self.sj[j]}_"
                                f"{self.sj[k]}_{self.sm[m]}",
                                "binary",
                            )
        horizon = float(self.T)
        for j in self.jobs:
            vs.c[j] = vs.add(f"c_{self.sj[j]}", "continuous", 0.0, horizon)
        for j in self.jobs:
            vs.b[j] = vs.add(f"b_{self.sj[j]}", "continuous", 0.0, horizon)
        if self.jobs:
            vs.c_dummy = vs.add("c_0", "continuous", 0.0, horizon)
        vs.c_max = vs.add("c_max", "continuous", 0.0, horizon)

    def c_of(self, i: str) -> str:
        if i == DUMMY_JOB:
            assert self.vs.c_dummy is not None
            return self.vs.c_dummy
        return self.vs.c[i]

    def emit_shared(
        self, p: dict[tuple[str, str], int], setup_term: dict[str, dict[str, float]]
    ) -> None:
        """Constraint families common to both modes (C5 varies via setup_term)."""
        vs, M, T = self.vs, self.M, self.T
        for j in self.jobs:
            self.add_con("C1", self.sj[j], {vs.c[j]: 1.0, vs.c_max: -1.0}, "<=", 0.0)
        if self.jobs:
            self.add_con("C2", "", {vs.c_dummy: 1.0}, "=", 0.0)
        for j in self.jobs:
            self.add_con(
                "C3", self.sj[j], {vs.x[(j, m)]: 1.0 for m in self.machines}, "=", 1.0
            )
        for j in self.jobs:
            for t in range(T + 1):
                self.add_con(
                    "C4",
                    f"{self.sj[j]}_{t}",
                    {vs.z[(j, m, t)]: 1.0 for m in self.machines},
                    "<=",
                    1.0,
                )
        for j in self.jobs:
            terms = {vs.c[j]: 1.0, vs.b[j]: -1.0}
            for m in self.machines:
                terms[vs.x[(j, m)]] = -float(p[(j, m)])
            for var, coef in setup_term[j].items():
                terms[var] = terms.get(var, 0.0) - coef
            self.add_con("C5", self.sj[j], terms, "=", 0.0)
        for j in self.jobs:
            terms = {
                vs.z[(j, m, t)]: 1.0 for m in self.machines for t in range(T + 1)
            }
            terms[vs.c[j]] = -1.0
            terms[vs.b[j]] = 1.0
            self.add_con("C7", self.sj[j], terms, "=", 0.0)
        for j in self.jobs:
            for m in self.machines:
                terms = {vs.z[(j, m, t)]: 1.0 for t in range(T + 1)}
                terms[vs.x[(j, m)]] = -float(T + 1)
                self.add_con("C8", f"{self.sj[j]}_{self.sm[m]}", terms, "<=", 0.0)
        for j in self.jobs:
            for t in range(T + 1):
                terms = {vs.z[(j, m, t)]: -float(t + 1) for m in self.machines}
                terms[vs.c[j]] = 1.0
                self.add_con("C9", f"{self.sj[j]}_{t}", terms, ">=", 0.0)
        for j in self.jobs:
            for t in range(T + 1):
                terms = {
                    vs.z[(j, m, t)]: float(T - t) for m in self.machines
                }
                terms[vs.b[j]] = 1.0
                self.add_con("C10", f"{self.sj[j]}_{t}", terms, "<=", float(T))
        for m in self.machines:
            q = {j: float(self.instance.job(j).qubits) for j in self.jobs}
            cap = float(self.instance.machine(m).capacity)
            for t in range(T + 1):
                self.add_con(
                    "C11",
                    f"{self.sm[m]}_{t}",
                    {vs.z[(j, m, t)]: q[j] for j in self.jobs},
                    "<=",
                    cap,
                )

    def emit_extended(
        self,
        p: dict[tuple[str, str], int],
        s: dict[tuple[str, str, str], int],
    ) -> None:
        vs, M = self.vs, self.M
        preds = [DUMMY_JOB] + self.jobs
        setup_term = {
            j: {
                vs.y[(i, j, m)]: float(s[(i, j, m)])
                for i in preds
                for m in self.machines
            }
            for j in self.jobs
        }
        self.emit_shared(p, setup_term)
        label = {DUMMY_JOB: "0", **self.sj}
        n = float(len(self.jobs))
        # C5R: the picked setup can never undercut any realized predecessor.
        for i in self.jobs:
            for j in self.jobs:
                if i == j:
                    continue
                for m in self.machines:
                    Mr = float(self.T + p[(j, m)] + s[(i, j, m)] + 1)
                    terms = {
                        vs.c[j]: 1.0,
                        vs.b[j]: -1.0,
                        vs.alpha[(i, j)]: -Mr,
                        vs.gamma[(i, j, m)]: -Mr,
                    }
                    for k in self.jobs:
                        terms[vs.delta[(i, j, k, m)]] = Mr
                    self.add_con(
                        "C5R",
                        f"{self.sj[i]}_{self.sj[j]}_{self.sm[m]}",
                        terms,
                        ">=",
                        float(p[(j, m)] + s[(i, j, m)]) - 2.0 * Mr,
                    )
        H = float(self.T + 1)  # horizon constant: tightest valid big-M
        for j in self.jobs:
            for i in preds:
                terms = {vs.b[j]: 1.0, self.c_of(i): -1.0}
                for m in self.machines:
                    terms[vs.y[(i, j, m)]] = terms.get(vs.y[(i, j, m)], 0.0) - H
                self.add_con(
                    "C6", f"{label[i]}_{self.sj[j]}", terms, ">=", -H
                )
        for j in self.jobs:
            terms = {
                vs.y[(i, j, m)]: 1.0 for i in preds for m in self.machines
            }
            self.add_con("C12", self.sj[j], terms, "=", 1.0)
        npreds = float(len(preds))
        for j in self.jobs:
            for m in self.machines:
                terms = {vs.y[(i, j, m)]: 1.0 for i in preds}
                terms[vs.x[(j, m)]] = -npreds
                self.add_con("C13", f"{self.sj[j]}_{self.sm[m]}", terms, "<=", 0.0)
        for j in self.jobs:
            for m in self.machines:
                terms = {vs.y[(j, i, m)]: 1.0 for i in preds}
                terms[vs.x[(j, m)]] = -npreds
                self.add_con("C14", f"{self.sj[j]}_{self.sm[m]}", terms, "<=", 0.0)
        for j in self.jobs:
            for m in self.machines:
                self.add_con(
                    "C15",
                    f"{self.sj[j]}_{self.sm[m]}",
                    {vs.z[(j, m, 0)]: 1.0, vs.y[(DUMMY_JOB, j, m)]: -1.0},
                    "=",
                    0.0,
                )
        # C16/C17 pairs pin alpha and beta as exact indicators (b, c integral).
        H2 = float(self.T + 2)
        for i in self.jobs:
            for j in self.jobs:
                sfx = f"{self.sj[i]}_{self.sj[j]}"
                self.add_con(
                    "C16",
                    sfx,
                    [(vs.alpha[(i, j)], H2), (vs.b[j], -1.0), (vs.c[i], 1.0)],
                    ">=",
                    1.0,
                )
                self.add_con(
                    "C16",
                    f"{sfx}_r",
                    [(vs.alpha[(i, j)], H2), (vs.c[i], 1.0), (vs.b[j], -1.0)],
                    "<=",
                    H2,
                )
        for i in self.jobs:
            for j in self.jobs:
                sfx = f"{self.sj[i]}_{self.sj[j]}"
                self.add_con(
                    "C17",
                    sfx,
                    [(vs.beta[(i, j)], H2), (vs.c[j], -1.0), (vs.c[i], 1.0)],
                    ">=",
                    0.0,
                )
                self.add_con(
                    "C17",
                    f"{sfx}_r",
                    [(vs.beta[(i, j)], H2), (vs.c[i], 1.0), (vs.c[j], -1.0)],
                    "<=",
                    H2 - 1.0,
                )
        for i in self.jobs:
            for j in self.jobs:
                if i == j:
                    continue
                for m in self.machines:
                    sfx = f"{self.sj[i]}_{self.sj[j]}_{self.sm[m]}"
                    self.add_con(
                        "C18",
                        sfx,
                        {
                            vs.gamma[(i, j, m)]: 1.0,
                            vs.x[(i, m)]: -1.0,
                            vs.x[(j, m)]: -1.0,
                        },
                        ">=",
                        -1.0,
                    )
                    self.add_con(
                        "C18",
                        f"{sfx}_r",
                        {
                            vs.gamma[(i, j, m)]: 2.0,
                            vs.x[(i, m)]: -1.0,
                            vs.x[(j, m)]: -1.0,
                        },
                        "<=",
                        0.0,
                    )
        for i in self.jobs:
            for j in self.jobs:
                if i == j:
                    continue
                for k in self.jobs:
                    for m in self.machines:
                        sfx = f"{self.sj[i]}_{self.sj[j]}_{self.sj[k]}_{self.sm[m]}"
                        self.add_con(
                            "C19",
                            sfx,
                            {
                                vs.delta[(i, j, k, m)]: 1.0,
                                vs.x[(k, m)]: -1.0,
                                vs.beta[(i, k)]: -1.0,
                                vs.alpha[(k, j)]: -1.0,
                            },
                            ">=",
                            -2.0,
                        )
                        self.add_con(
                            "C19",
                            f"{sfx}_r",
                            {
                                vs.delta[(i, j, k, m)]: 3.0,
                                vs.x[(k, m)]: -1.0,
                                vs.beta[(i, k)]: -1.0,
                                vs.alpha[(k, j)]: -1.0,
                            },
                            "<=",
                            0.0,
                        )
        # C20 reverse bounds: a pick must come from the realized layer.
        for i in self.jobs:
            for j in self.jobs:
                if i == j:
                    continue
                for m in self.machines:
                    sfx = f"{self.sj[i]}_{self.sj[j]}_{self.sm[m]}"
                    self.add_con(
                        "C20",
                        f"{sfx}_a",
                        {vs.y[(i, j, m)]: 1.0, vs.alpha[(i, j)]: -1.0},
                        "<=",
                        0.0,
                    )
                    self.add_con(
                        "C20",
                        f"{sfx}_g",
                        {vs.y[(i, j, m)]: 1.0, vs.gamma[(i, j, m)]: -1.0},
                        "<=",
                        0.0,
                    )
                    terms = {vs.y[(i, j, m)]: n}
                    for k in self.jobs:
                        terms[vs.delta[(i, j, k, m)]] = 1.0
                    self.add_con("C20", f"{sfx}_d", terms, "<=", n)

    def emit_simple(
        self,
        p: dict[tuple[str, str], int],
        s_agg: dict[tuple[str, str], int],
    ) -> None:
        vs = self.vs
        setup_term = {
            j: {vs.x[(j, m)]: float(s_agg[(j, m)]) for m in self.machines}
            for j in self.jobs
        }
        self.emit_shared(p, setup_term)

    def finish(self) -> MilpModel:
        objective = ((self.vs.c_max, 1.0),) if self.vs.c_max else ()
        model = MilpModel(
            mode=self.mode,
            variables=self.vs,
            constraints=self.constraints,
            objective=objective,
            stats={
                "num_variables": len(self.vs.names),
                "num_constraints": len(self.constraints),
            },
            granularity=self.instance.granularity,
            job_ids=tuple(self.jobs),
            machine_ids=tuple(self.machines),
        )
        return model


def build_extended(instance: Instance) -> MilpModel:
    """Build the full sequence-dependent model."""
    p, s = _prepare(instance)
    builder = _Builder(instance, "extended")
    builder.declare_variables()
    if instance.jobs:
        builder.emit_extended(p, s)
    return builder.finish()


def build_simple(
    instance: Instance, aggregated_setup: Mapping[tuple[str, str], float]
) -> MilpModel:
    """Build the relaxed model with predecessor-independent setups."""
    p, _ = _prepare(instance)
    g = instance.granularity
    s_agg = {k: _slots(v, g, 0) for k, v in aggregated_setup.items()}
    for j in instance.jobs:
        for m in instance.machines:
            if (j.id, m.id) not in s_agg:
                raise ModelBuildError(
                    f"aggregated setup missing entry ({j.id}, {m.id})"
                )
    builder = _Builder(instance, "simple")
    builder.declare_variables()
    if instance.jobs:
        builder.emit_simple(p, s_agg)
    return builder.finish()


# ---------------------------------------------------------------------------
# LP serialization
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _expr(terms: Iterable[tuple[str, float]]) -> str:
    parts: list[str] = []
    for name, coef in terms:
        if not parts:
            if coef == 1.0:
                parts.append(name)
            elif coef == -1.0:
                parts.append(f"- {name}")
            else:
                parts.append(f"{_fmt(coef)} {name}")
            continue
        sign = "+" if coef >= 0 else "-"
        mag = abs(coef)
        if mag == 1.0:
            parts.append(f"{sign} {name}")
        else:
            parts.append(f"{sign} {_fmt(mag)} {name}")
    return " ".join(parts) if parts else "0 c_max"


def _wrap(line: str, width: int = 240) -> list[str]:
    if len(line) <= width:
        return [line]
    out: list[str] = []
    current = ""
    for token in line.split(" "):
        if current and len(current) + 1 + len(token) > width:
            out.append(current)
            current = "   " + token
        else:
            current = token if not current else f"{current} {token}"
    if current:
        out.append(current)
    return out


def serialize_lp(model: MilpModel) -> str:
    """Emit the model in LP format, byte-deterministic for a fixed model."""
    lines: list[str] = ["Minimize"]
    lines.extend(_wrap(" obj: " + _expr(model.objective)))
    lines.append("Subject To")
    for con in model.constraints:
        sense = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
        expr = _expr(con.terms)
        lines.extend(_wrap(f" {con.name}: {expr} {sense} {_fmt(con.rhs)}"))
    lines.append("Bounds")
    vs = model.variables
    for name in vs.names:
        lb, ub = vs.bounds[name]
        if vs.kinds[name] == "binary":
            if ub == 0.0:
                lines.append(f" {name} = 0")
            continue
        lines.append(f" {_fmt(lb)} <= {name} <= {_fmt(ub)}")
    binaries = [n for n in vs.names if vs.kinds[n] == "binary"]
    if binaries:
        lines.append("Binaries")
        for name in binaries:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Solution parsing and schedule extraction
# ---------------------------------------------------------------------------


def parse_solution(text: str, model: MilpModel) -> MilpSolution:
    """Parse the adapter's solution format.

    Header lines: ``status <s>``, ``objective <v>``, ``gap <g>``.  Every
    other line is a ``name value`` pair.  Variables absent from the file
    default to 0.
    """
    status: str | None = None
    objective: float | None = None
    gap = 0.0
    values: dict[str, float] = {}
    unknown: list[str] = []
    known = model.variables.kinds
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "status" and len(parts) == 2:
            if parts[1] not in SOLUTION_STATUSES:
                raise SolutionParseError(f"unknown status {parts[1]!r}")
            status = parts[1]
            continue
        if parts[0] == "objective" and len(parts) == 2:
            objective = float(parts[1])
            continue
        if parts[0] == "gap" and len(parts) == 2:
            gap = float(parts[1])
            continue
        if len(parts) != 2:
            raise SolutionParseError(f"malformed line {raw!r}")
        name, value = parts
        if name not in known:
            unknown.append(name)
            continue
        values[name] = float(value)
    if unknown:
        raise SolutionParseError(
            f"unknown variable names: {', '.join(sorted(unknown)[:5])}"
        )
    if status is None:
        raise SolutionParseError("missing status line")
    if objective is None:
        raise SolutionParseError("missing objective line")
    if status == "optimal":
        gap = 0.0
    return MilpSolution(
        status=status, objective=objective, values=values, reported_gap=gap
    )


def _snap(value: float) -> float:
    nearest = round(value)
    if abs(value - nearest) < 1e-4:
        return float(nearest)
    return value


_FAMILY_HINTS = (("capacity exceeded", "C11"), ("does not fit", "C11"),
                 ("outside", "C9/C10"), ("entries", "C3"))


def extract_schedule(solution: MilpSolution, instance: Instance) -> Schedule:
    """Turn a solved model's variable values into a Schedule.

    Requires an optimal or gap_terminated solution; machine assignment is
    read from x, times from b and c scaled back by the granularity.
    """
    if solution.status not in ("optimal", "gap_terminated"):
        raise ExtractionError(
            f"cannot extract a schedule from status {solution.status!r}"
        )
    g = instance.granularity
    entries = []
    for job in instance.jobs:
        sj = sanitize(job.id)
        assigned = [
            m.id
            for m in instance.machines
            if solution.value(f"x_{sj}_{sanitize(m.id)}") > 0.5
        ]
        if len(assigned) != 1:
            raise ExtractionError(
                f"assignment ambiguous for job {job.id}: x selects {assigned}"
            )
        start = _snap(solution.value(f"b_{sj}")) * g
        completion = _snap(solution.value(f"c_{sj}")) * g
        entries.append(
            ScheduleEntry(
                job=job.id, machine=assigned[0], start=start, completion=completion
            )
        )
    schedule = make_schedule(entries)
    violations = validate_schedule(schedule, instance)
    if violations:
        tagged = []
        for v in violations:
            family = next((f for key, f in _FAMILY_HINTS if key in v), "model")
            tagged.append(f"[{family}] {v}")
        raise ExtractionError("extracted schedule invalid: " + "; ".join(tagged))
    return schedule


# ---------------------------------------------------------------------------
# Assignment injection: independent feasibility checking
# ---------------------------------------------------------------------------


def evaluate_constraints(
    model: MilpModel, values: Mapping[str, float], tolerance: float = 1e-6
) -> list[str]:
    """Names of constraints a full variable assignment violates."""
    violated = []
    for con in model.constraints:
        lhs = sum(values.get(name, 0.0) * coef for name, coef in con.terms)
        ok = (
            lhs <= con.rhs + tolerance
            if con.sense == "<="
            else lhs >= con.rhs - tolerance
            if con.sense == ">="
            else abs(lhs - con.rhs) <= tolerance
        )
        if not ok:
            violated.append(con.name)
    return violated


def assignment_from_schedule(
    model: MilpModel, instance: Instance, schedule: Schedule
) -> dict[str, float]:
    """Encode a schedule as a full MILP variable assignment.

    Builds every variable family directly from its stated semantics,
    independently of the constraint emission, so checking the result with
    :func:`evaluate_constraints` cross-validates the model.  The schedule
    must use whole slots (granularity-divisible times).
    """
    vs = model.variables
    g = instance.granularity
    values = dict.fromkeys(vs.names, 0.0)
    b: dict[str, float] = {}
    c: dict[str, float] = {}
    machine_of: dict[str, str] = {}
    for e in schedule.entries:
        start, completion = e.start / g, e.completion / g
        if abs(start - round(start)) > 1e-9 or abs(completion - round(completion)) > 1e-9:
            raise ValueError(f"entry for {e.job} is not slot-aligned")
        b[e.job], c[e.job] = round(start), round(completion)
        machine_of[e.job] = e.machine
    for j, m in machine_of.items():
        values[vs.x[(j, m)]] = 1.0
        for t in range(int(b[j]), int(c[j])):
            values[vs.z[(j, m, t)]] = 1.0
        values[vs.c[j]] = c[j]
        values[vs.b[j]] = b[j]
    if vs.c_dummy:
        values[vs.c_dummy] = 0.0
    if vs.c_max:
        values[vs.c_max] = max(c.values(), default=0.0)
    if model.mode == "simple":
        return values
    jobs = list(machine_of)
    for i in jobs:
        for j in jobs:
            if (i, j) in vs.alpha:
                values[vs.alpha[(i, j)]] = 1.0 if i != j and c[i] <= b[j] else 0.0
            if (i, j) in vs.beta:
                values[vs.beta[(i, j)]] = 1.0 if c[i] < c[j] else 0.0
    for i in jobs:
        for j in jobs:
            for m in model.machine_ids:
                key = (i, j, m)
                if key in vs.gamma:
                    both = machine_of[i] == m and machine_of[j] == m
                    values[vs.gamma[key]] = 1.0 if both else 0.0
    for i in jobs:
        for j in jobs:
            if i == j:
                continue
            for k in jobs:
                for m in model.machine_ids:
                    key = (i, j, k, m)
                    if key in vs.delta:
                        blocking = (
                            machine_of[k] == m and c[i] < c[k] and c[k] <= b[j]
                        )
                        values[vs.delta[key]] = 1.0 if blocking else 0.0
    relation = derive_successors(schedule, instance)
    _, s = slot_tables(instance)
    for j in jobs:
        m = machine_of[j]
        preds = sorted(relation.predecessors(j))
        if preds == [DUMMY_JOB]:
            values[vs.y[(DUMMY_JOB, j, m)]] = 1.0
            continue
        pick = max(preds, key=lambda i: (s[(i, j, m)], i))
        values[vs.y[(pick, j, m)]] = 1.0
    return values
