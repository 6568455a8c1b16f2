"""Shared fixtures and instance factories."""

from __future__ import annotations

import numpy as np
import pytest

from milq_sched.bench import size_instance
from milq_sched.core import CircuitJob, Instance, Machine, TimingTables
from milq_sched.cutting import CircuitSpec, resize_batch
from milq_sched.timing import TimingConfig, gen_timing


def manual_instance(
    processing: dict,
    setup: dict,
    jobs: tuple,
    machines: tuple,
    t_max: int = 50,
    big_m: float = 1000.0,
    granularity: float = 1.0,
) -> Instance:
    """Instance with hand-written timing tables."""
    return Instance(
        jobs=jobs,
        machines=machines,
        timing=TimingTables(processing=processing, setup=setup),
        big_m=big_m,
        t_max=t_max,
        granularity=granularity,
    )


def uniform_timing(
    jobs: tuple,
    machines: tuple,
    p: float,
    s_dummy: float,
    s_pair: float,
) -> TimingTables:
    """All processing times p, dummy setups s_dummy, pairwise setups s_pair."""
    processing = {(j.id, m.id): p for j in jobs for m in machines}
    setup = {}
    for m in machines:
        for j in jobs:
            setup[("0", j.id, m.id)] = s_dummy
            for i in jobs:
                setup[(i.id, j.id, m.id)] = s_pair
    return TimingTables(processing=processing, setup=setup)


def random_instance(
    seed: int,
    n_jobs: int | None = None,
    machines: tuple | None = None,
    q_max: int = 4,
    variation: float = 0.25,
    mode: str = "integer",
) -> Instance:
    """Small seeded instance with integer times <= 5 by construction."""
    rng = np.random.default_rng(int(seed))
    n = int(n_jobs or rng.integers(2, 5))
    jobs = tuple(
        CircuitJob(f"J{k + 1}", int(rng.integers(2, q_max + 1)),
                   int(rng.integers(5, 51)))
        for k in range(n)
    )
    machines = machines or (Machine("M1", 5), Machine("M2", 5))
    config = TimingConfig(
        seed=int(seed),
        mode=mode,  # type: ignore[arg-type]
        base_processing_scale=1.0,
        variation_fraction=variation,
        setup_scale=0.5,
    )
    timing = gen_timing(jobs, machines, config)
    return size_instance(jobs, machines, timing)


@pytest.fixture
def paper_example_instance() -> Instance:
    """The worked 9-job example: A(7) cut into [5,2] x4 variants plus B(3)."""
    circuits = [CircuitSpec("A", 7, 20), CircuitSpec("B", 3, 20)]
    machines = (Machine("QPU1", 5), Machine("QPU2", 5))
    jobs, _ = resize_batch(circuits, machines, variants_per_cut=4)
    timing = gen_timing(
        tuple(jobs), machines, TimingConfig(seed=11, mode="integer")
    )
    return Instance(
        jobs=tuple(jobs),
        machines=machines,
        timing=timing,
        big_m=1000.0,
        t_max=64,
        granularity=1.0,
    )


@pytest.fixture
def paper_example_sized(paper_example_instance) -> Instance:
    """Same 9 jobs and machines, with a workload-sized horizon for solving."""
    return size_instance(
        paper_example_instance.jobs,
        paper_example_instance.machines,
        paper_example_instance.timing,
    )
