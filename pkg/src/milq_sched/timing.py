"""Seeded synthetic processing and setup time generators.

Hardware interfaces rarely expose timing estimates, so benchmarks run on
synthetic tables: processing time scales with a job's qubit count and
setup time with the mean size of the (predecessor, successor) pair, each
perturbed by a uniform relative variation.  Generation order is part of
the contract (row-major per table, one dedicated RNG stream per table) so
golden fixtures stay stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .core import DUMMY_JOB, CircuitJob, Machine, TimingTables

TimeMode = Literal["integer", "real"]

_PROCESSING_STREAM = 0
_SETUP_STREAM = 1


@dataclass(frozen=True, slots=True)
class TimingConfig:
    """Knobs for the synthetic generators.

    ``depth_weight`` optionally folds circuit depth into processing times
    (0 keeps the size-only model).  ``dummy_offset`` shifts the effective
    size of the dummy predecessor away from 0 when a fixed initial
    calibration cost is wanted.
    """

    seed: int
    mode: TimeMode = "integer"
    base_processing_scale: float = 0.5
    variation_fraction: float = 0.5
    setup_scale: float = 0.25
    depth_weight: float = 0.0
    dummy_offset: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.variation_fraction < 1:
            raise ValueError("variation_fraction must be in [0, 1)")
        if self.base_processing_scale <= 0 or self.setup_scale <= 0:
            raise ValueError("scales must be positive")


def _stream(config: TimingConfig, table: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed, spawn_key=(table,))
    )


def _finish(value: float, config: TimingConfig, floor: float) -> float:
    if config.mode == "integer":
        return float(max(floor, math.ceil(value)))
    return float(max(floor, value))


def gen_processing(
    jobs: Sequence[CircuitJob],
    machines: Sequence[Machine],
    config: TimingConfig,
) -> dict[tuple[str, str], float]:
    """p(j, m) = scale * qubits_j * (1 + u), u ~ U(-v, +v) per (job, machine).

    Integer mode rounds up and keeps every entry >= 1.
    """
    rng = _stream(config, _PROCESSING_STREAM)
    v = config.variation_fraction
    table: dict[tuple[str, str], float] = {}
    for job in jobs:
        size = job.qubits * (1.0 + config.depth_weight * job.depth)
        for m in machines:
            u = rng.uniform(-v, v)
            raw = config.base_processing_scale * size * (1.0 + u)
            table[(job.id, m.id)] = _finish(raw, config, floor=1.0)
    return table


def gen_setup(
    jobs: Sequence[CircuitJob],
    machines: Sequence[Machine],
    config: TimingConfig,
) -> dict[tuple[str, str, str], float]:
    """s(i, j, m) = scale * (q_i + q_j)/2 * (1 + u) per (pred, job, machine).

    The dummy predecessor row uses q_0 = dummy_offset (default 0).  The
    diagonal s(i, i, m) is generated to keep the stream layout fixed even
    though schedules never read it.  Integer mode rounds up to >= 0.
    """
    rng = _stream(config, _SETUP_STREAM)
    v = config.variation_fraction
    sizes = {DUMMY_JOB: float(config.dummy_offset)}
    sizes.update({j.id: float(j.qubits) for j in jobs})
    table: dict[tuple[str, str, str], float] = {}
    for pred_id in [DUMMY_JOB] + [j.id for j in jobs]:
        for job in jobs:
            pair = (sizes[pred_id] + job.qubits) / 2.0
            for m in machines:
                u = rng.uniform(-v, v)
                raw = config.setup_scale * pair * (1.0 + u)
                table[(pred_id, job.id, m.id)] = _finish(raw, config, floor=0.0)
    return table


def gen_timing(
    jobs: Sequence[CircuitJob],
    machines: Sequence[Machine],
    config: TimingConfig,
) -> TimingTables:
    """Generate both tables with their dedicated streams."""
    return TimingTables(
        processing=gen_processing(jobs, machines, config),
        setup=gen_setup(jobs, machines, config),
    )


def aggregate_setup_max(
    setup: dict[tuple[str, str, str], float],
) -> dict[tuple[str, str], float]:
    """Collapse the setup table to s(j, m) = max over predecessors of s(i, j, m)."""
    out: dict[tuple[str, str], float] = {}
    for (_i, j, m), value in setup.items():
        key = (j, m)
        if key not in out or value > out[key]:
            out[key] = value
    return out
