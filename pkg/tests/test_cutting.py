"""Greedy width cutting and subjob expansion."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from milq_sched.core import Machine
from milq_sched.cutting import (
    CircuitSpec,
    ExpansionError,
    expand_subjobs,
    plan_cut,
    resize_batch,
)


class TestPlanCut:
    def test_fitting_circuit_stays_whole(self):
        plan = plan_cut(CircuitSpec("A", 3, 10), [5, 5])
        assert plan.fragments == (3,)
        assert plan.cut_count == 0

    def test_paper_split_five_two(self):
        plan = plan_cut(CircuitSpec("A", 7, 10), [5, 5])
        assert plan.fragments == (5, 2)
        assert plan.cut_count == 1

    def test_greedy_trace_width_13(self):
        # Greedy carves max-capacity pieces: 13 -> 6, 6, remainder 1.
        plan = plan_cut(CircuitSpec("A", 13, 10), [5, 6])
        assert plan.fragments == (6, 6, 1)
        assert plan.cut_count == 2

    def test_empty_capacities_rejected(self):
        with pytest.raises(ValueError):
            plan_cut(CircuitSpec("A", 3, 10), [])

    @given(
        width=st.integers(1, 200),
        caps=st.lists(st.integers(1, 30), min_size=1, max_size=4),
    )
    @settings(max_examples=200, deadline=None)
    def test_width_conservation_and_fit(self, width, caps):
        plan = plan_cut(CircuitSpec("C", width, 5), caps)
        assert sum(plan.fragments) == width
        assert all(f <= max(caps) for f in plan.fragments)
        assert plan.cut_count == len(plan.fragments) - 1

    @given(width=st.integers(1, 100), cap=st.integers(1, 20))
    @settings(max_examples=100, deadline=None)
    def test_larger_capacity_never_cuts_more(self, width, cap):
        small = plan_cut(CircuitSpec("C", width, 5), [cap])
        big = plan_cut(CircuitSpec("C", width, 5), [cap + 3])
        assert big.cut_count <= small.cut_count


class TestExpandSubjobs:
    def test_uncut_single_job(self):
        plan = plan_cut(CircuitSpec("A", 3, 10), [5], variants_per_cut=9)
        jobs = expand_subjobs(plan, depth=10)
        assert len(jobs) == 1
        assert jobs[0].id == "A"
        assert jobs[0].qubits == 3

    def test_paper_counts_one_cut_four_variants(self):
        plan = plan_cut(CircuitSpec("A", 7, 10), [5, 5], variants_per_cut=4)
        jobs = expand_subjobs(plan, depth=10)
        assert len(jobs) == 8
        assert sorted(j.qubits for j in jobs) == [2, 2, 2, 2, 5, 5, 5, 5]

    def test_expansion_formula_two_cuts(self):
        from milq_sched.cutting import CutPlan

        plan = CutPlan(
            circuit="A", fragments=(4, 4, 2), cut_count=2, variants_per_cut=2
        )
        jobs = expand_subjobs(plan, depth=7)
        assert len(jobs) == 3 * 2**2
        assert all(j.depth == 7 for j in jobs)

    def test_job_cap_guard(self):
        plan = plan_cut(CircuitSpec("A", 50, 10), [5], variants_per_cut=4)
        with pytest.raises(ExpansionError, match="cap"):
            expand_subjobs(plan, depth=10)

    def test_origin_bookkeeping(self):
        plan = plan_cut(CircuitSpec("A", 7, 10), [5, 5], variants_per_cut=2)
        jobs = expand_subjobs(plan, depth=10)
        assert {(j.origin.fragment, j.origin.variant) for j in jobs} == {
            (0, 0), (0, 1), (1, 0), (1, 1)
        }
        assert all(j.origin.parent == "A" for j in jobs)


class TestResizeBatch:
    def test_paper_batch_nine_jobs(self):
        machines = [Machine("QPU1", 5), Machine("QPU2", 5)]
        circuits = [CircuitSpec("A", 7, 20), CircuitSpec("B", 3, 20)]
        jobs, manifest = resize_batch(circuits, machines, variants_per_cut=4)
        assert len(jobs) == 9
        assert len(manifest["A"]) == 8
        assert len(manifest["B"]) == 1

    def test_empty_batch(self):
        jobs, manifest = resize_batch([], [Machine("M", 5)])
        assert jobs == []
        assert manifest == {}

    def test_identity_manifest_for_fitting_circuit(self):
        jobs, manifest = resize_batch(
            [CircuitSpec("B", 3, 20)], [Machine("M", 5)]
        )
        assert manifest == {
            "B": [
                {
                    "job_id": "B",
                    "fragment_index": 0,
                    "variant_index": 0,
                    "width": 3,
                }
            ]
        }

    def test_deterministic(self):
        machines = [Machine("QPU1", 5), Machine("QPU2", 6)]
        circuits = [CircuitSpec("A", 14, 20), CircuitSpec("B", 3, 10)]
        first = resize_batch(circuits, machines, variants_per_cut=3)
        second = resize_batch(circuits, machines, variants_per_cut=3)
        assert first == second

    def test_every_job_fits_some_machine(self):
        machines = [Machine("QPU1", 4), Machine("QPU2", 6)]
        circuits = [CircuitSpec(f"C{k}", 3 + 4 * k, 10) for k in range(5)]
        jobs, _ = resize_batch(circuits, machines, variants_per_cut=2)
        cap = max(m.capacity for m in machines)
        assert all(j.qubits <= cap for j in jobs)

    def test_manifest_matches_schema(self):
        import json
        from pathlib import Path

        import jsonschema

        machines = [Machine("QPU1", 5)]
        _, manifest = resize_batch(
            [CircuitSpec("A", 7, 10)], machines, variants_per_cut=2
        )
        schema = json.loads(
            (
                Path(__file__).resolve().parents[1]
                / "src/milq_sched/schemas/cut_manifest.schema.json"
            ).read_text()
        )
        jsonschema.validate({"schema_version": 1, **manifest}, schema)
