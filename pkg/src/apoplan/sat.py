"""Minimal DPLL solver with exhaustive model enumeration.

Input is clausal: an iterable of integer tuples in DIMACS convention (positive
literal = variable true).  Intended for the modest CNFs produced by the Clark
completion stage; correctness and determinism over raw speed.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence


class SatError(Exception):
    pass


def _unit_propagate(clauses: list[tuple[int, ...]], assignment: dict[int, bool],
                    ) -> list[tuple[int, ...]] | None:
    """Simplify under `assignment`, extending it with forced units.
    Returns the residual clause list, or None on conflict."""
    work = clauses
    while True:
        residual: list[tuple[int, ...]] = []
        unit: int | None = None
        for clause in work:
            lits = []
            satisfied = False
            for lit in clause:
                value = assignment.get(abs(lit))
                if value is None:
                    lits.append(lit)
                elif value == (lit > 0):
                    satisfied = True
                    break
            if satisfied:
                continue
            if not lits:
                return None
            if len(lits) == 1 and unit is None:
                unit = lits[0]
            residual.append(tuple(lits))
        if unit is None:
            return residual
        assignment[abs(unit)] = unit > 0
        work = residual


def _choose(clauses: Sequence[tuple[int, ...]]) -> int:
    # deterministic branching: lowest variable in the shortest clause
    best = min(clauses, key=lambda c: (len(c), tuple(abs(l) for l in c)))
    return min(abs(l) for l in best)


def enumerate_models(clauses: Iterable[tuple[int, ...]], nvars: int,
                     ) -> Iterator[dict[int, bool]]:
    """Yield every total model, deterministically ordered (variable 1 false
    branch explored before true, then 2, ...)."""
    initial = [tuple(c) for c in clauses]
    for clause in initial:
        for lit in clause:
            if lit == 0 or abs(lit) > nvars:
                raise SatError(f"literal {lit} out of range 1..{nvars}")

    def search(work: list[tuple[int, ...]], assignment: dict[int, bool],
               ) -> Iterator[dict[int, bool]]:
        residual = _unit_propagate(work, assignment)
        if residual is None:
            return
        if not residual:
            free = [v for v in range(1, nvars + 1) if v not in assignment]
            for mask in range(1 << len(free)):
                model = dict(assignment)
                for i, v in enumerate(free):
                    model[v] = bool((mask >> i) & 1)
                yield model
            return
        branch = _choose(residual)
        for value in (False, True):
            sub = dict(assignment)
            sub[branch] = value
            yield from search(residual, sub)

    yield from search(initial, {})


def solve(clauses: Iterable[tuple[int, ...]], nvars: int) -> dict[int, bool] | None:
    """First model, or None when unsatisfiable."""
    for model in enumerate_models(clauses, nvars):
        return model
    return None


def count_models(clauses: Iterable[tuple[int, ...]], nvars: int) -> int:
    return sum(1 for _ in enumerate_models(clauses, nvars))


def parse_dimacs(text: str) -> tuple[list[tuple[int, ...]], int]:
    nvars = None
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise SatError(f"malformed problem line: {line!r}")
            nvars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(lit)
    if pending:
        raise SatError("clause not terminated by 0")
    if nvars is None:
        raise SatError("missing problem line")
    return clauses, nvars
