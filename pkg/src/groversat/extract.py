"""Conflict-local subformula extraction.

A call point selects an unsatisfied seed clause from a high-activity region,
collects nearby clauses under one of four strategies, simplifies them under
the current trail, trims the result to the size budget, and remaps the
surviving variables densely to 1..n_sub so the quantum subsolver sees a
self-contained formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .dimacs import Cnf

if TYPE_CHECKING:
    from .cdcl import Solver

STRATEGIES = ("activity_bfs", "activity_greedy", "random_sample", "variable_frontier")

# CLI short names
STRATEGY_ALIASES = {
    "abfs": "activity_bfs",
    "ag": "activity_greedy",
    "rand": "random_sample",
    "vf": "variable_frontier",
}


class ExtractionError(ValueError):
    """Simplification met a fully falsified clause: the trail was not a
    conflict-free fixpoint.  Callers skip the quantum call."""


@dataclass
class ExtractionConfig:
    budget: int = 20  # cap on n_sub + m_sub
    strategy: str = "activity_bfs"
    max_seed_candidates: int = 32  # learned clauses scanned for a seed

    def __post_init__(self) -> None:
        self.strategy = STRATEGY_ALIASES.get(self.strategy, self.strategy)
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown extraction strategy {self.strategy!r}")
        if self.budget < 3:
            raise ValueError("budget must be >= 3 (one clause plus two variables)")
        if self.max_seed_candidates < 1:
            raise ValueError("max_seed_candidates must be >= 1")


@dataclass
class SubFormula:
    """Extracted formula over dense variables with the map back to globals.

    `var_map[i-1]` is the global variable behind dense variable i;
    `seed_clause` is the clause index (in the solver database) the
    extraction grew from.
    """

    cnf: Cnf
    var_map: tuple[int, ...]
    seed_clause: int | None = None

    @property
    def n_sub(self) -> int:
        return self.cnf.num_vars

    @property
    def m_sub(self) -> int:
        return self.cnf.num_clauses


def simplify_under_trail(
    clauses: Sequence[Sequence[int]], assigns: Sequence[int]
) -> list[tuple[int, ...]]:
    """Reduce clauses under a partial assignment.

    `assigns[v]` is 1 / -1 / 0 for variable v true / false / unassigned.
    Satisfied clauses are dropped and false literals removed from the
    survivors.  Raises ExtractionError if a clause loses all its literals,
    which means the assignment falsifies it.
    """
    out: list[tuple[int, ...]] = []
    for clause in clauses:
        kept: list[int] = []
        satisfied = False
        for lit in clause:
            val = assigns[lit] if lit > 0 else -assigns[-lit]
            if val == 1:
                satisfied = True
                break
            if val == 0:
                kept.append(lit)
        if satisfied:
            continue
        if not kept:
            raise ExtractionError(f"clause {tuple(clause)} falsified by the trail")
        out.append(tuple(kept))
    return out


def _clause_satisfied(clause: Sequence[int], assigns: Sequence[int]) -> bool:
    for lit in clause:
        if (assigns[lit] if lit > 0 else -assigns[-lit]) == 1:
            return True
    return False


def _select_seed(solver: "Solver", unsat: list[int], config: ExtractionConfig) -> int:
    """Unsatisfied clause of maximal activity among recent learned clauses;
    falls back to a clause containing the highest-activity variable."""
    recent = range(
        max(solver.first_learned, len(solver.clauses) - config.max_seed_candidates),
        len(solver.clauses),
    )
    best = -1
    best_act = -1.0
    unsat_set = set(unsat)
    for ci in recent:
        if ci in unsat_set and solver.clause_act[ci] >= best_act:
            best = ci
            best_act = solver.clause_act[ci]
    if best >= 0:
        return best
    # fallback: highest-activity variable occurring in an unsatisfied clause
    acts = solver.activities
    best_var_act = -1.0
    for ci in unsat:
        for lit in solver.clauses[ci]:
            a = acts[abs(lit)]
            if a > best_var_act:
                best_var_act = a
                best = ci
    return best


def _bfs_order(
    solver: "Solver", seed: int, assigns: Sequence[int], collect_cap: int
) -> list[int]:
    """Level-order clause indices from the seed over shared-variable edges.

    Satisfied clauses participate as graph nodes (they are dropped later by
    simplification); expansion stops once `collect_cap` unsatisfied clauses
    have been gathered.  Neighbors are visited in ascending clause index.
    """
    clauses = solver.clauses
    occ: dict[int, list[int]] = {}
    for ci, cl in enumerate(clauses):
        for lit in cl:
            occ.setdefault(abs(lit), []).append(ci)

    visited = {seed}
    order = [seed]
    frontier = [seed]
    collected = 0 if _clause_satisfied(clauses[seed], assigns) else 1
    while frontier and collected < collect_cap:
        neighbors: set[int] = set()
        for ci in frontier:
            for lit in clauses[ci]:
                for cj in occ[abs(lit)]:
                    if cj not in visited:
                        neighbors.add(cj)
        frontier = sorted(neighbors)
        for cj in frontier:
            visited.add(cj)
            order.append(cj)
            if not _clause_satisfied(clauses[cj], assigns):
                collected += 1
                if collected >= collect_cap:
                    break
    return order


def _candidate_order(
    solver: "Solver", config: ExtractionConfig, unsat: list[int], seed: int
) -> list[int]:
    strategy = config.strategy
    cap = config.budget
    if strategy == "activity_bfs":
        return _bfs_order(solver, seed, solver.assigns, cap)
    if strategy == "activity_greedy":
        return sorted(unsat, key=lambda ci: (-solver.clause_act[ci], ci))[:cap]
    if strategy == "random_sample":
        pool = list(unsat)
        solver.rng.shuffle(pool)
        return pool[:cap]
    # variable_frontier: top-activity variables, then their clauses,
    # highest clause activity first
    acts = solver.activities
    var_occ: dict[int, list[int]] = {}
    for ci in unsat:
        for lit in solver.clauses[ci]:
            var_occ.setdefault(abs(lit), []).append(ci)
    frontier_vars = sorted(var_occ, key=lambda v: (-acts[v], v))
    order: list[int] = []
    chosen: set[int] = set()
    for v in frontier_vars:
        for ci in sorted(var_occ[v], key=lambda ci: (-solver.clause_act[ci], ci)):
            if ci not in chosen:
                chosen.add(ci)
                order.append(ci)
                if len(order) >= cap:
                    return order
    return order


def extract_subformula(
    solver: "Solver", config: ExtractionConfig, seed: int | None = None
) -> SubFormula | None:
    """Extract a trail-simplified, budget-trimmed, densely remapped subformula.

    Returns None when there is nothing useful to search: every clause is
    satisfied, the simplified candidates are trivial (fewer than two clauses,
    fewer than two distinct variables, or all unit), nothing fits the budget,
    or the trail turns out to falsify a candidate clause.
    """
    assigns = solver.assigns
    unsat = [
        ci
        for ci, cl in enumerate(solver.clauses)
        if cl and not _clause_satisfied(cl, assigns)
    ]
    if not unsat:
        return None
    if seed is None:
        seed = _select_seed(solver, unsat, config)

    order = _candidate_order(solver, config, unsat, seed)
    try:
        candidates = simplify_under_trail([solver.clauses[ci] for ci in order], assigns)
    except ExtractionError:
        return None
    kept_idx = [ci for ci in order if not _clause_satisfied(solver.clauses[ci], assigns)]

    # drop exact duplicates created by simplification, keeping the first
    seen: set[tuple[int, ...]] = set()
    uniq: list[tuple[int, tuple[int, ...]]] = []
    for ci, cl in zip(kept_idx, candidates):
        key = tuple(sorted(cl))
        if key not in seen:
            seen.add(key)
            uniq.append((ci, cl))

    all_vars = {abs(l) for _, cl in uniq for l in cl}
    if len(uniq) < 2 or len(all_vars) < 2 or all(len(cl) == 1 for _, cl in uniq):
        return None

    # greedy prefix under the budget: drop the most recently enqueued first
    sel: list[tuple[int, tuple[int, ...]]] = []
    sel_vars: set[int] = set()
    for ci, cl in uniq:
        new_vars = sel_vars | {abs(l) for l in cl}
        if len(new_vars) + len(sel) + 1 > config.budget:
            break
        sel.append((ci, cl))
        sel_vars = new_vars
    if not sel:
        return None

    var_map = tuple(sorted(sel_vars))
    dense = {g: i + 1 for i, g in enumerate(var_map)}
    remapped = tuple(
        tuple(dense[l] if l > 0 else -dense[-l] for l in cl) for _, cl in sel
    )
    sub_cnf = Cnf(len(var_map), remapped)
    return SubFormula(sub_cnf, var_map, seed_clause=seed)
