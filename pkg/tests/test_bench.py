"""Benchmark harness: batch generation, reporting, Gantt rendering."""

from __future__ import annotations

from dataclasses import replace

from milq_sched.bench import (
    BenchReport,
    BenchRow,
    builtin_scenarios,
    gen_batch,
    run_scenarios,
)
from milq_sched.core import validate_instance
from milq_sched.gantt import render_gantt
from milq_sched.solvers import solve_baseline, solve_greedy

from conftest import random_instance


class TestGenBatch:
    def test_widths_bounded_by_largest_device(self):
        scenario = builtin_scenarios(seed=5)["paper-three-qpu"]
        for batch in range(4):
            inst = gen_batch(scenario, batch)
            assert all(2 <= j.qubits <= 20 for j in inst.jobs)

    def test_batch_size_seven(self):
        scenario = builtin_scenarios(seed=5)["paper-two-qpu"]
        inst = gen_batch(scenario, 0)
        assert len(inst.jobs) == 7

    def test_same_seed_same_instance(self):
        scenario = builtin_scenarios(seed=5)["paper-two-qpu"]
        assert gen_batch(scenario, 3) == gen_batch(scenario, 3)
        assert gen_batch(scenario, 3) != gen_batch(scenario, 4)

    def test_generated_instances_are_valid(self):
        scenario = builtin_scenarios(seed=7)["paper-two-qpu"]
        for batch in range(3):
            assert validate_instance(gen_batch(scenario, batch)) == []

    def test_builtin_scenario_shapes(self):
        scenarios = builtin_scenarios(seed=1)
        two = scenarios["paper-two-qpu"]
        three = scenarios["paper-three-qpu"]
        assert [m.capacity for m in two.machines] == [5, 5]
        assert [m.capacity for m in three.machines] == [5, 6, 20]
        assert two.batches == three.batches == 10
        assert two.batch_size == three.batch_size == 7


class TestRunScenarios:
    def test_baseline_only_report(self):
        scenario = replace(
            builtin_scenarios(seed=3)["paper-two-qpu"], batches=3
        )
        report = run_scenarios([scenario], ["baseline"])
        assert len(report.rows) == 3
        assert all(r.status == "ok" for r in report.rows)
        summary = report.summaries[0]
        assert summary["mean_improvement_extended_vs_baseline"] is None
        assert summary["mean_improvement_simple_vs_baseline"] is None

    def test_csv_is_deterministic(self):
        scenario = replace(
            builtin_scenarios(seed=3)["paper-two-qpu"], batches=3
        )
        first = run_scenarios([scenario], ["baseline", "greedy"]).to_csv()
        second = run_scenarios([scenario], ["baseline", "greedy"]).to_csv()
        assert first == second
        assert first.splitlines()[0] == (
            "scenario,batch,seed,strategy,makespan,status,wall_time_s"
        )

    def test_worker_pool_order_independent(self):
        scenario = replace(
            builtin_scenarios(seed=3)["paper-two-qpu"], batches=4
        )
        serial = run_scenarios([scenario], ["baseline", "greedy"], workers=1)
        pooled = run_scenarios([scenario], ["baseline", "greedy"], workers=4)
        assert serial.to_csv() == pooled.to_csv()

    def test_oracle_size_guard_recorded_as_skip(self):
        scenario = replace(
            builtin_scenarios(seed=3)["paper-two-qpu"], batches=1
        )
        report = run_scenarios([scenario], ["oracle"], oracle_limit=3)
        assert report.rows[0].status == "skipped"
        assert report.rows[0].makespan is None

    def test_improvement_not_clamped(self):
        rows = (
            BenchRow("s", 0, 1, "baseline", 10.0, "ok", 0.0),
            BenchRow("s", 0, 1, "simple", 12.0, "gap_terminated", 0.0),
        )
        from milq_sched.bench import _summarize

        scenario = replace(
            builtin_scenarios(seed=3)["paper-two-qpu"], batches=1
        )
        summary = _summarize(scenario, list(rows))
        assert summary["mean_improvement_simple_vs_baseline"] == -0.2
        assert summary["batches_simple_underperforms_baseline"] == [0]

    def test_json_mirror_carries_errors(self):
        scenario = replace(
            builtin_scenarios(seed=3)["paper-two-qpu"], batches=1
        )
        report = run_scenarios([scenario], ["oracle"], oracle_limit=3)
        payload = report.to_json()
        assert payload["rows"][0]["error"]


class TestRenderGantt:
    def test_single_job_one_rect(self):
        inst = random_instance(0, n_jobs=1)
        schedule = solve_baseline(inst).schedule
        svg = render_gantt(schedule, inst)
        assert svg.count("<rect") == 1 + 1 + len(inst.machines)  # bg + lanes + job

    def test_nine_job_schedule_nine_rects_two_lanes(self, paper_example_sized):
        schedule = solve_baseline(paper_example_sized).schedule
        svg = render_gantt(schedule, paper_example_sized)
        job_rects = svg.count('fill-opacity="0.85"')
        assert job_rects == 9
        assert svg.count('fill="#f4f4f4"') == 2

    def test_rect_count_equals_job_count(self):
        for seed in range(8):
            inst = random_instance(seed)
            schedule = solve_greedy(inst).schedule
            svg = render_gantt(schedule, inst)
            assert svg.count('fill-opacity="0.85"') == len(inst.jobs)

    def test_deterministic_output(self):
        inst = random_instance(2)
        schedule = solve_baseline(inst).schedule
        assert render_gantt(schedule, inst) == render_gantt(schedule, inst)

    def test_escapes_job_ids(self):
        from milq_sched.core import (
            CircuitJob,
            Machine,
        )
        from conftest import manual_instance
        from milq_sched.core import evaluate_schedule

        jobs = (CircuitJob("a<b&c", 2, 5),)
        machines = (Machine("M1", 5),)
        inst = manual_instance(
            processing={("a<b&c", "M1"): 2.0},
            setup={("0", "a<b&c", "M1"): 1.0, ("a<b&c", "a<b&c", "M1"): 1.0},
            jobs=jobs,
            machines=machines,
        )
        schedule = evaluate_schedule([("a<b&c", "M1", 0.0)], inst)
        svg = render_gantt(schedule, inst)
        assert "a&lt;b&amp;c" in svg
        assert "a<b&c" not in svg
