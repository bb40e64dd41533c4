"""Shared test oracles and formula builders.

The brute-force helpers here are deliberately independent of the package
implementation: they enumerate assignments directly and evaluate clauses as
"violated when every literal is false".
"""

from __future__ import annotations

import random

import numpy as np

from groversat.dimacs import Cnf, cnf_from_clauses


def brute_force_sat_mask(cnf: Cnf) -> np.ndarray:
    """Boolean mask over all 2^n assignments; bit i of the index is var i+1."""
    n = cnf.num_vars
    idx = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(idx.size, dtype=bool)
    for clause in cnf.clauses:
        violated = np.ones(idx.size, dtype=bool)
        for lit in clause:
            bit = ((idx >> (abs(lit) - 1)) & 1).astype(bool)
            violated &= ~bit if lit > 0 else bit
        ok &= ~violated
    return ok


def brute_force_count(cnf: Cnf) -> int:
    return int(brute_force_sat_mask(cnf).sum())


def brute_force_status(cnf: Cnf) -> str:
    return "SAT" if brute_force_count(cnf) > 0 else "UNSAT"


def naive_eval(cnf: Cnf, assignment: list[bool]) -> tuple[bool, float]:
    """Direct per-clause evaluation used to cross-check eval_assignment."""
    if not cnf.clauses:
        return True, 0.0
    violated = sum(
        1
        for clause in cnf.clauses
        if not any(assignment[abs(l) - 1] == (l > 0) for l in clause)
    )
    return violated == 0, violated / len(cnf.clauses)


def random_3sat(n: int, m: int, rng: random.Random) -> Cnf:
    clauses = []
    for _ in range(m):
        variables = rng.sample(range(1, n + 1), 3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in variables))
    return cnf_from_clauses(n, clauses)


def random_cnf(rng: random.Random, max_vars: int = 8, max_clauses: int = 12) -> Cnf:
    """Arbitrary small formula (clause widths 1..4, duplicates possible)."""
    n = rng.randint(1, max_vars)
    m = rng.randint(0, max_clauses)
    clauses = []
    for _ in range(m):
        width = rng.randint(1, min(4, n))
        variables = rng.sample(range(1, n + 1), width)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in variables))
    return cnf_from_clauses(n, clauses)


def pigeonhole(pigeons: int, holes: int) -> Cnf:
    """PHP(p, h): p pigeons into h holes, one clause per pigeon plus
    at-most-one constraints per hole; UNSAT when p > h."""
    var = lambda p, h: p * holes + h + 1
    clauses = [tuple(var(p, h) for h in range(holes)) for p in range(pigeons)]
    for h in range(holes):
        for p1 in range(pigeons):
            for p2 in range(p1 + 1, pigeons):
                clauses.append((-var(p1, h), -var(p2, h)))
    return cnf_from_clauses(pigeons * holes, clauses)


# Seven binary clauses whose clause graph, grown breadth-first from the seed
# (-x2 v x4) under the trail {x1=1, x4=0} with size cap 8, reduces to
# (-x2) & (x3) & (x2 v -x6) & (-x5 v x6) over {x2, x3, x5, x6}.
BFS_DEMO_CLAUSES = [
    (-1, 3),  # C1
    (1, 2),   # C2
    (-2, 4),  # C3: seed
    (-4, 1),  # C4
    (3, 5),   # C5: reachable but cut by the cap
    (-5, 6),  # C6
    (2, -6),  # C7
]

BFS_DEMO_SEED_INDEX = 2
BFS_DEMO_BUDGET = 8
BFS_DEMO_EXPECTED_SUB = {(-2,), (3,), (2, -6), (-5, 6)}
BFS_DEMO_EXPECTED_VARS = (2, 3, 5, 6)


def bfs_demo_cnf() -> Cnf:
    return cnf_from_clauses(6, BFS_DEMO_CLAUSES)
