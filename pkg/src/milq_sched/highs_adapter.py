"""Solver adapter: solve an LP-format MILP file with HiGHS via scipy.

Runs as a standalone executable so the scheduler can treat the solver as
an external process::

    python -m milq_sched.highs_adapter problem.lp solution.txt \
        --gap 0.2 --time-limit 60

The solution file carries three header lines (``status``, ``objective``,
``gap``) followed by one ``name value`` pair per variable.  Statuses:
optimal, gap_terminated, infeasible, timeout.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from .lp_format import INF, LpProblem, parse_lp


def _build_matrices(problem: LpProblem):
    names = problem.variable_names()
    index = {name: k for k, name in enumerate(names)}
    n = len(names)
    cost = np.zeros(n)
    for name, coef in problem.objective.items():
        cost[index[name]] = coef
    if problem.sense == "max":
        cost = -cost
    rows, cols, data = [], [], []
    lower, upper = [], []
    for r, con in enumerate(problem.constraints):
        for name, coef in con.terms.items():
            rows.append(r)
            cols.append(index[name])
            data.append(coef)
        if con.sense == "<=":
            lower.append(-INF)
            upper.append(con.rhs)
        elif con.sense == ">=":
            lower.append(con.rhs)
            upper.append(INF)
        else:
            lower.append(con.rhs)
            upper.append(con.rhs)
    matrix = sparse.csr_matrix(
        (data, (rows, cols)), shape=(len(problem.constraints), n)
    )
    lb = np.zeros(n)
    ub = np.full(n, INF)
    for k, name in enumerate(names):
        if name in problem.binaries:
            lb[k], ub[k] = 0.0, 1.0
        if name in problem.bounds:
            lb[k], ub[k] = problem.bounds[name]
    integrality = np.array(
        [1 if name in problem.binaries or name in problem.generals else 0
         for name in names]
    )
    return names, cost, matrix, np.array(lower), np.array(upper), lb, ub, integrality


def solve_lp_text(text: str, gap: float, time_limit: float | None) -> dict:
    """Solve LP text; returns a dict with status/objective/gap/values."""
    problem = parse_lp(text)
    names, cost, matrix, row_lb, row_ub, lb, ub, integrality = _build_matrices(
        problem
    )
    options: dict = {"mip_rel_gap": max(0.0, gap)}
    if time_limit is not None and time_limit > 0:
        options["time_limit"] = float(time_limit)
    constraints = (
        LinearConstraint(matrix, row_lb, row_ub) if matrix.shape[0] else ()
    )
    result = milp(
        c=cost,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lb, ub),
        options=options,
    )
    if result.status == 2:
        # Presolve occasionally misreports tightly bounded feasible models
        # as infeasible; a presolve-free solve is authoritative.
        result = milp(
            c=cost,
            constraints=constraints,
            integrality=integrality,
            bounds=Bounds(lb, ub),
            options={**options, "presolve": False},
        )
    mip_gap = getattr(result, "mip_gap", None)
    gap_value = float(mip_gap) if mip_gap is not None else 0.0
    if result.status == 0:
        status = "optimal" if gap_value <= 1e-9 else "gap_terminated"
    elif result.status == 1 and result.x is not None:
        status = "gap_terminated"
    elif result.status == 1:
        status = "timeout"
    elif result.status == 2:
        status = "infeasible"
    else:
        raise RuntimeError(f"solver failed: {result.message}")
    values = {}
    objective = float("nan")
    if result.x is not None:
        raw = result.x
        for k, name in enumerate(names):
            v = float(raw[k])
            if integrality[k]:
                v = float(round(v))
            elif abs(v - round(v)) < 1e-5:
                v = float(round(v))
            else:
                v = round(v, 9)
            values[name] = v
        objective = float(result.fun)
        if problem.sense == "max":
            objective = -objective
        if abs(objective - round(objective)) < 1e-5:
            objective = float(round(objective))
    return {
        "status": status,
        "objective": objective,
        "gap": gap_value,
        "values": values,
    }


def format_solution(solution: dict) -> str:
    lines = [
        f"status {solution['status']}",
        f"objective {solution['objective']!r}",
        f"gap {solution['gap']!r}",
    ]
    for name, value in solution["values"].items():
        lines.append(f"{name} {value!r}")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="Solve an LP-format MILP with HiGHS and write a solution file."
    )
    parser.add_argument("lp_path")
    parser.add_argument("solution_path")
    parser.add_argument("--gap", type=float, default=0.0,
                        help="relative MIP gap at which to stop")
    parser.add_argument("--time-limit", type=float, default=None,
                        help="wall clock limit in seconds")
    args = parser.parse_args(argv)
    with open(args.lp_path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        solution = solve_lp_text(text, args.gap, args.time_limit)
    except Exception as exc:  # surfaced as a solver failure by the caller
        print(f"solver error: {exc}", file=sys.stderr)
        return 1
    with open(args.solution_path, "w", encoding="utf-8") as handle:
        handle.write(format_solution(solution))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
