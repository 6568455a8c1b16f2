"""A small reader for the LP file format.

Covers the subset the model serializer emits plus the usual variations:
Minimize/Maximize, Subject To, Bounds, Binaries, Generals, End, comments
introduced by a backslash, named constraints, and expressions continued
across lines.  Intentionally free of package-internal imports so the
solver adapter can load it cheaply in a subprocess.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_SECTION_PATTERNS = (
    (re.compile(r"^\s*(minimize|minimum|min)\b", re.I), "objective_min"),
    (re.compile(r"^\s*(maximize|maximum|max)\b", re.I), "objective_max"),
    (re.compile(r"^\s*(subject\s+to|such\s+that|s\.?t\.?)\s*$", re.I), "constraints"),
    (re.compile(r"^\s*bounds?\s*$", re.I), "bounds"),
    (re.compile(r"^\s*(binaries|binary|bin)\s*$", re.I), "binaries"),
    (re.compile(r"^\s*(generals?|gen)\s*$", re.I), "generals"),
    (re.compile(r"^\s*end\s*$", re.I), "end"),
)

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")

INF = float("inf")


class LpParseError(ValueError):
    """Raised on LP text the reader cannot interpret."""


@dataclass(slots=True)
class LpConstraint:
    name: str
    terms: dict[str, float]
    sense: str
    rhs: float


@dataclass(slots=True)
class LpProblem:
    sense: str = "min"
    objective: dict[str, float] = field(default_factory=dict)
    objective_name: str = "obj"
    constraints: list[LpConstraint] = field(default_factory=list)
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    binaries: set[str] = field(default_factory=set)
    generals: set[str] = field(default_factory=set)

    def variable_names(self) -> list[str]:
        """All variables in first-appearance order."""
        seen: dict[str, None] = {}
        for name in self.objective:
            seen.setdefault(name)
        for con in self.constraints:
            for name in con.terms:
                seen.setdefault(name)
        for name in self.bounds:
            seen.setdefault(name)
        for name in self.binaries:
            seen.setdefault(name)
        for name in self.generals:
            seen.setdefault(name)
        return list(seen)


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("\\", 1)[0] for line in text.splitlines())


def _is_number(token: str) -> bool:
    return bool(_NUMBER.match(token))


def _parse_expression(tokens: list[str]) -> dict[str, float]:
    """Parse `[sign] [coef] name ...` token runs into a coefficient map."""
    terms: dict[str, float] = {}
    sign = 1.0
    coef: float | None = None
    for token in tokens:
        if token == "+":
            if coef is not None:
                raise LpParseError(f"dangling coefficient before {token!r}")
            sign = 1.0
        elif token == "-":
            if coef is not None:
                raise LpParseError(f"dangling coefficient before {token!r}")
            sign = -1.0
        elif _is_number(token):
            if coef is not None:
                raise LpParseError(f"two consecutive numbers near {token!r}")
            coef = float(token)
        else:
            value = sign * (coef if coef is not None else 1.0)
            terms[token] = terms.get(token, 0.0) + value
            sign, coef = 1.0, None
    if coef is not None:
        raise LpParseError("expression ends with a dangling coefficient")
    return terms


def _split_label(tokens: list[str]) -> tuple[str | None, list[str]]:
    if tokens and tokens[0].endswith(":"):
        return tokens[0][:-1], tokens[1:]
    if len(tokens) >= 2 and tokens[1] == ":":
        return tokens[0], tokens[2:]
    return None, tokens


def _parse_constraints(body: list[str], problem: LpProblem) -> None:
    tokens: list[str] = []
    for line in body:
        tokens.extend(line.replace("<=", " <= ").replace(">=", " >= ").split())
    # Normalize bare < and > (LP format treats them as <= / >=).
    tokens = ["<=" if t == "<" else ">=" if t == ">" else t for t in tokens]
    index = 0
    while index < len(tokens):
        # One constraint: [name:] expr sense rhs
        name = None
        label_len = 0
        if tokens[index].endswith(":") and len(tokens[index]) > 1:
            name = tokens[index][:-1]
            label_len = 1
        elif index + 1 < len(tokens) and tokens[index + 1] == ":":
            name = tokens[index]
            label_len = 2
        rest = tokens[index + label_len :]
        try:
            sense_pos = next(
                k for k, t in enumerate(rest) if t in ("<=", ">=", "=")
            )
        except StopIteration:
            raise LpParseError(
                f"constraint without comparison near {' '.join(rest[:5])!r}"
            ) from None
        terms = _parse_expression(rest[:sense_pos])
        sense = rest[sense_pos]
        if sense_pos + 1 >= len(rest) or not _is_number(rest[sense_pos + 1]):
            raise LpParseError(f"constraint {name or '?'} missing numeric rhs")
        rhs = float(rest[sense_pos + 1])
        problem.constraints.append(
            LpConstraint(
                name=name or f"R{len(problem.constraints) + 1}",
                terms=terms,
                sense=sense,
                rhs=rhs,
            )
        )
        index += label_len + sense_pos + 2


def _bound_value(token: str) -> float:
    lowered = token.lower()
    if lowered in ("inf", "+inf", "infinity", "+infinity", "1e30", "1e+30"):
        return INF
    if lowered in ("-inf", "-infinity", "-1e30", "-1e+30"):
        return -INF
    return float(token)


def _parse_bounds(body: list[str], problem: LpProblem) -> None:
    for line in body:
        tokens = line.replace("<=", " <= ").replace(">=", " >= ").split()
        tokens = ["<=" if t == "<" else ">=" if t == ">" else t for t in tokens]
        if not tokens:
            continue
        if len(tokens) == 2 and tokens[1].lower() == "free":
            problem.bounds[tokens[0]] = (-INF, INF)
        elif len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
            problem.bounds[tokens[2]] = (_bound_value(tokens[0]), _bound_value(tokens[4]))
        elif len(tokens) == 3 and tokens[1] == "<=":
            lb = problem.bounds.get(tokens[0], (0.0, INF))[0]
            problem.bounds[tokens[0]] = (lb, _bound_value(tokens[2]))
        elif len(tokens) == 3 and tokens[1] == ">=":
            ub = problem.bounds.get(tokens[0], (0.0, INF))[1]
            problem.bounds[tokens[0]] = (_bound_value(tokens[2]), ub)
        elif len(tokens) == 3 and tokens[1] == "=":
            value = _bound_value(tokens[2])
            problem.bounds[tokens[0]] = (value, value)
        else:
            raise LpParseError(f"unsupported bound line {line.strip()!r}")


def parse_lp(text: str) -> LpProblem:
    """Parse LP text into an :class:`LpProblem`."""
    problem = LpProblem()
    section: str | None = None
    bodies: dict[str, list[str]] = {
        "objective": [],
        "constraints": [],
        "bounds": [],
        "binaries": [],
        "generals": [],
    }
    for line in _strip_comments(text).splitlines():
        if not line.strip():
            continue
        matched = None
        for pattern, kind in _SECTION_PATTERNS:
            if pattern.match(line):
                matched = kind
                break
        if matched == "end":
            break
        if matched in ("objective_min", "objective_max"):
            problem.sense = "min" if matched == "objective_min" else "max"
            section = "objective"
            continue
        if matched in ("constraints", "bounds", "binaries", "generals"):
            section = matched
            continue
        if section is None:
            raise LpParseError(f"content before any section: {line.strip()!r}")
        bodies[section].append(line)

    objective_tokens: list[str] = []
    for line in bodies["objective"]:
        objective_tokens.extend(line.split())
    name, rest = _split_label(objective_tokens)
    if name:
        problem.objective_name = name
    problem.objective = _parse_expression(rest)
    _parse_constraints(bodies["constraints"], problem)
    _parse_bounds(bodies["bounds"], problem)
    for line in bodies["binaries"]:
        problem.binaries.update(line.split())
    for line in bodies["generals"]:
        problem.generals.update(line.split())
    return problem
