"""Greedy width-based circuit resizing.

Circuits wider than every machine are split into device-fitting fragments
by repeatedly carving off a piece of the largest available capacity.  Each
cut multiplies the number of subexperiment variants that must run, so the
expansion enumerates variant copies of every fragment and a manifest maps
each emitted job back to (circuit, fragment, variant) for downstream
result reconstruction.  No gate-level cut placement happens here; only
widths are partitioned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import CircuitJob, JobOrigin, Machine

#: Refuse expansions that would emit more jobs than this per circuit.
DEFAULT_JOB_CAP = 1024


class ExpansionError(ValueError):
    """Raised when a cut plan would expand past the job cap."""


@dataclass(frozen=True, slots=True)
class CircuitSpec:
    """An incoming circuit before resizing."""

    id: str
    width: int
    depth: int


@dataclass(frozen=True, slots=True)
class CutPlan:
    """Fragment widths for one circuit plus the variant multiplicity per cut."""

    circuit: str
    fragments: tuple[int, ...]
    cut_count: int
    variants_per_cut: int


def plan_cut(
    circuit: CircuitSpec,
    capacities: Sequence[int],
    variants_per_cut: int = 4,
) -> CutPlan:
    """Pick the fragment widths for one circuit.

    Only necessary cuts are made: a circuit that fits the largest capacity
    stays whole.  Otherwise fragments of the largest capacity are carved
    off greedily until the remainder fits.
    """
    if not capacities:
        raise ValueError("capacities must be non-empty")
    if variants_per_cut < 1:
        raise ValueError("variants_per_cut must be >= 1")
    cap = max(capacities)
    fragments: list[int] = []
    remaining = circuit.width
    while remaining > cap:
        fragments.append(cap)
        remaining -= cap
    fragments.append(remaining)
    return CutPlan(
        circuit=circuit.id,
        fragments=tuple(fragments),
        cut_count=len(fragments) - 1,
        variants_per_cut=variants_per_cut,
    )


def expand_subjobs(
    plan: CutPlan, depth: int, job_cap: int = DEFAULT_JOB_CAP
) -> list[CircuitJob]:
    """Enumerate the jobs a cut plan requires.

    An uncut circuit stays a single job under its own id.  A plan with k
    cuts needs variants_per_cut**k variant copies of every fragment;
    fragments keep the parent depth (cuts are space-like).
    """
    if plan.cut_count == 0:
        return [
            CircuitJob(
                id=plan.circuit,
                qubits=plan.fragments[0],
                depth=depth,
                origin=JobOrigin(parent=plan.circuit, fragment=0, variant=0),
            )
        ]
    copies = plan.variants_per_cut**plan.cut_count
    total = len(plan.fragments) * copies
    if total > job_cap:
        raise ExpansionError(
            f"circuit {plan.circuit} expands to {total} jobs, cap is {job_cap}"
        )
    jobs = []
    for frag_index, width in enumerate(plan.fragments):
        for variant in range(copies):
            jobs.append(
                CircuitJob(
                    id=f"{plan.circuit}_f{frag_index}_v{variant}",
                    qubits=width,
                    depth=depth,
                    origin=JobOrigin(
                        parent=plan.circuit, fragment=frag_index, variant=variant
                    ),
                )
            )
    return jobs


def resize_batch(
    circuits: Iterable[CircuitSpec],
    machines: Sequence[Machine],
    variants_per_cut: int = 4,
    job_cap: int = DEFAULT_JOB_CAP,
) -> tuple[list[CircuitJob], dict[str, list[dict]]]:
    """Resize a batch of circuits against a machine pool.

    Returns the concatenated job list and a manifest
    {circuit_id: [{job_id, fragment_index, variant_index, width}, ...]}
    sufficient to regroup results during postprocessing.
    """
    capacities = [m.capacity for m in machines]
    jobs: list[CircuitJob] = []
    manifest: dict[str, list[dict]] = {}
    for circuit in circuits:
        plan = plan_cut(circuit, capacities, variants_per_cut)
        expanded = expand_subjobs(plan, circuit.depth, job_cap=job_cap)
        jobs.extend(expanded)
        manifest[circuit.id] = [
            {
                "job_id": job.id,
                "fragment_index": job.origin.fragment,
                "variant_index": job.origin.variant,
                "width": job.qubits,
            }
            for job in expanded
        ]
    return jobs, manifest
