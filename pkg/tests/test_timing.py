"""Synthetic timing generators and the setup aggregation."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from milq_sched.core import CircuitJob, Machine
from milq_sched.timing import (
    TimingConfig,
    aggregate_setup_max,
    gen_processing,
    gen_setup,
)

JOBS = (CircuitJob("J1", 2, 10), CircuitJob("J2", 3, 20), CircuitJob("J3", 5, 30))
MACHINES = (Machine("M1", 5), Machine("M2", 6))


def config(**overrides) -> TimingConfig:
    base = dict(
        seed=7,
        mode="integer",
        base_processing_scale=1.0,
        variation_fraction=0.5,
        setup_scale=0.5,
    )
    base.update(overrides)
    return TimingConfig(**base)


class TestGenProcessing:
    def test_degenerate_variation_gives_exact_sizes(self):
        table = gen_processing(
            (CircuitJob("J", 5, 10),), MACHINES, config(variation_fraction=0.0)
        )
        assert all(v == 5.0 for v in table.values())

    def test_seeded_determinism(self):
        a = gen_processing(JOBS, MACHINES, config(seed=42))
        b = gen_processing(JOBS, MACHINES, config(seed=42))
        assert a == b
        c = gen_processing(JOBS, MACHINES, config(seed=43))
        assert a != c

    def test_integer_mode_floors_at_one(self):
        table = gen_processing(
            (CircuitJob("J", 1, 1),),
            MACHINES,
            config(base_processing_scale=0.01),
        )
        assert all(v == 1.0 for v in table.values())

    def test_depth_weight_switch(self):
        flat = gen_processing(JOBS, MACHINES, config(variation_fraction=0.0))
        weighted = gen_processing(
            JOBS, MACHINES, config(variation_fraction=0.0, depth_weight=0.1)
        )
        assert weighted[("J2", "M1")] == 3 * (1 + 0.1 * 20)
        assert weighted[("J2", "M1")] > flat[("J2", "M1")]


class TestGenSetup:
    def test_degenerate_variation_pairwise_mean(self):
        jobs = (CircuitJob("A", 4, 10), CircuitJob("B", 2, 10))
        table = gen_setup(
            jobs, MACHINES, config(variation_fraction=0.0, setup_scale=1.0)
        )
        assert table[("A", "B", "M1")] == 3.0
        assert table[("B", "A", "M2")] == 3.0

    def test_dummy_row_uses_zero_size(self):
        jobs = (CircuitJob("A", 4, 10),)
        table = gen_setup(
            jobs, MACHINES, config(variation_fraction=0.0, setup_scale=1.0)
        )
        assert table[("0", "A", "M1")] == 2.0

    def test_dummy_offset(self):
        jobs = (CircuitJob("A", 4, 10),)
        table = gen_setup(
            jobs,
            MACHINES,
            config(variation_fraction=0.0, setup_scale=1.0, dummy_offset=2.0),
        )
        assert table[("0", "A", "M1")] == 3.0

    def test_complete_including_diagonal(self):
        table = gen_setup(JOBS, MACHINES, config())
        preds = ["0"] + [j.id for j in JOBS]
        assert set(table) == {
            (i, j.id, m.id) for i in preds for j in JOBS for m in MACHINES
        }


class TestGoldenFixture:
    def test_seed7_tables_match_frozen_reference(self):
        golden = json.loads(
            (Path(__file__).parent / "data/timing_seed7.json").read_text()
        )
        cfg = TimingConfig(**golden["config"])
        jobs = tuple(CircuitJob(j["id"], j["qubits"], j["depth"])
                     for j in golden["jobs"])
        machines = tuple(Machine(m["id"], m["capacity"])
                         for m in golden["machines"])
        processing = gen_processing(jobs, machines, cfg)
        setup = gen_setup(jobs, machines, cfg)
        assert {f"{j}|{m}": v for (j, m), v in processing.items()} == golden[
            "processing"
        ]
        assert {f"{i}|{j}|{m}": v for (i, j, m), v in setup.items()} == golden[
            "setup"
        ]


class TestAggregateSetupMax:
    def test_max_of_two(self):
        table = {("0", "J1", "M1"): 2.0, ("J2", "J1", "M1"): 5.0}
        assert aggregate_setup_max(table) == {("J1", "M1"): 5.0}

    def test_all_equal_column(self):
        table = {("0", "J1", "M1"): 3.0, ("J2", "J1", "M1"): 3.0}
        assert aggregate_setup_max(table) == {("J1", "M1"): 3.0}

    def test_matches_brute_force_on_random_table(self):
        import numpy as np

        rng = np.random.default_rng(0)
        jobs = [f"J{k}" for k in range(9)]
        machines = ["M1", "M2"]
        table = {
            (i, j, m): float(rng.integers(0, 20))
            for i in ["0"] + jobs
            for j in jobs
            for m in machines
        }
        aggregated = aggregate_setup_max(table)
        for j in jobs:
            for m in machines:
                expected = max(table[(i, j, m)] for i in ["0"] + jobs)
                assert aggregated[(j, m)] == expected
        assert all(
            aggregated[(j, m)] >= v for (i, j, m), v in table.items()
        )


class TestModes:
    def test_integer_mode_integral(self):
        p = gen_processing(JOBS, MACHINES, config())
        s = gen_setup(JOBS, MACHINES, config())
        assert all(v == int(v) for v in p.values())
        assert all(v == int(v) for v in s.values())

    def test_real_mode_all_distinct(self):
        cfg = config(mode="real")
        values = list(gen_processing(JOBS, MACHINES, cfg).values())
        values += list(gen_setup(JOBS, MACHINES, cfg).values())
        assert len(set(values)) == len(values)

    def test_variation_fraction_bounds(self):
        with pytest.raises(ValueError):
            TimingConfig(seed=1, variation_fraction=1.0)
