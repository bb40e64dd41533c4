"""Hybrid search controller: scheduled Grover calls feeding branching heuristics.

Every `grover_interval` conflicts (up to a global call budget) the controller
extracts a conflict-local subformula at the next conflict-free propagation
fixpoint, runs the simulated Grover search, and folds the best candidate back
into VSIDS activities and saved phases.  Feedback is heuristic-only: the
clause database, trail, and decision levels are never touched, so verdicts
always coincide with the plain solver.  The module also carries the analytic
runtime model used for budget planning.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .cdcl import SolveResult, Solver, SolverConfig
from .dimacs import Cnf
from .extract import ExtractionConfig, SubFormula, extract_subformula
from .grover import GroverConfig, bbht_search, success_probability, write_histogram_csv


@dataclass
class HybridConfig:
    grover_interval: int = 250  # conflicts between call points
    max_grover_calls: int = 15
    budget: int = 20  # cap on n_sub + m_sub, overrides extraction.budget
    eta0: float = 0.5  # base mixing strength for preference blending
    polarity_q_threshold: float = 0.1  # polarity hints only when q is this small
    solver: SolverConfig = field(default_factory=SolverConfig)
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    grover: GroverConfig = field(default_factory=GroverConfig)
    histogram_dir: str | None = None  # debug histogram dumps, one CSV per call
    check_heuristic_only: bool = False  # assert the clause DB hash around hints

    def __post_init__(self) -> None:
        if self.grover_interval < 1:
            raise ValueError("grover_interval must be >= 1")
        if self.max_grover_calls < 0:
            raise ValueError("max_grover_calls must be >= 0")
        if not 0.0 <= self.eta0 <= 1.0:
            raise ValueError("eta0 must lie in [0, 1]")
        if not 0.0 <= self.polarity_q_threshold <= 1.0:
            raise ValueError("polarity_q_threshold must lie in [0, 1]")
        self.extraction.budget = self.budget


@dataclass
class CallRecord:
    conflict_index: int
    n_sub: int
    m_sub: int
    q: float
    attempts_used: int
    total_iterations: int
    applied_polarity: bool


def mix_preferences(pi: float, pi_hat: float, eta: float) -> float:
    """Convex blend (1 - eta) * pi + eta * pi_hat of branching preferences."""
    for name, value in (("pi", pi), ("pi_hat", pi_hat), ("eta", eta)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return (1.0 - eta) * pi + eta * pi_hat


def guidance_strength(eta0: float, q: float) -> float:
    """Effective mixing weight eta0 * (1 - q): high violation weakens guidance."""
    return eta0 * (1.0 - q)


def apply_hints(
    solver: Solver, beta_q: str, q: float, sub: SubFormula, config: HybridConfig
) -> bool:
    """Translate a Grover candidate into heuristic updates.

    Every variable of the subformula gets its activity bumped by the solver's
    current increment, scaled by its occurrence count and by (1 + (1 - q)).
    When q is at most the polarity threshold, variables occurring at least
    twice additionally have their saved phase set from the candidate.
    Returns whether the polarity branch fired.
    """
    occ = [0] * (sub.n_sub + 1)
    for clause in sub.cnf.clauses:
        for lit in clause:
            occ[abs(lit)] += 1
    for i, global_var in enumerate(sub.var_map, start=1):
        solver.bump_var(global_var, mult=occ[i] * (2.0 - q))
    polarity = q <= config.polarity_q_threshold
    if polarity:
        for i, global_var in enumerate(sub.var_map, start=1):
            if occ[i] >= 2:
                solver.saved_phase[global_var] = beta_q[i - 1] == "1"
    return polarity


class HybridController:
    """Search hook owning the call schedule, Grover plumbing, and records."""

    def __init__(self, config: HybridConfig, solver: Solver):
        self.config = config
        self.pending = False
        self.last_call_conflicts = 0
        self.calls: list[CallRecord] = []
        self.skipped_calls = 0
        # all randomness descends from the solver's seeded generator
        self.np_rng = np.random.default_rng(solver.rng.getrandbits(64))

    @property
    def total_grover_iterations(self) -> int:
        return sum(rec.total_iterations for rec in self.calls)

    def should_call_grover(self, solver: Solver) -> bool:
        c = solver.stats.conflicts
        return (
            len(self.calls) < self.config.max_grover_calls
            and c > 0
            and c % self.config.grover_interval == 0
            and c > self.last_call_conflicts
        )

    def after_conflict(self, solver: Solver) -> None:
        if self.should_call_grover(solver):
            self.pending = True
            self.last_call_conflicts = solver.stats.conflicts

    def run_call(self, solver: Solver) -> None:
        self.pending = False
        sub = extract_subformula(solver, self.config.extraction)
        if sub is None:
            # nothing worth searching; does not count against the call budget
            self.skipped_calls += 1
            return
        outcome = bbht_search(sub, self.config.grover, rng=self.np_rng)
        solver.stats.grover_calls += 1
        db_hash = solver.clause_db_hash() if self.config.check_heuristic_only else None
        applied = apply_hints(solver, outcome.beta_q, outcome.q, sub, self.config)
        if db_hash is not None and solver.clause_db_hash() != db_hash:
            raise AssertionError("apply_hints modified the clause database")
        if self.config.histogram_dir is not None:
            path = os.path.join(
                self.config.histogram_dir, f"call_{len(self.calls):03d}.csv"
            )
            with open(path, "w", encoding="utf-8") as fh:
                write_histogram_csv(outcome.histogram, fh)
        self.calls.append(
            CallRecord(
                conflict_index=solver.stats.conflicts,
                n_sub=sub.n_sub,
                m_sub=sub.m_sub,
                q=outcome.q,
                attempts_used=outcome.attempts_used,
                total_iterations=outcome.total_iterations,
                applied_polarity=applied,
            )
        )


def solve_hybrid(cnf: Cnf, config: HybridConfig | None = None) -> tuple[SolveResult, list[CallRecord]]:
    """Run the hybrid loop; returns the classical result and per-call records.

    With max_grover_calls = 0 the run is step-for-step identical to the plain
    solver under the same seed.
    """
    config = config or HybridConfig()
    solver = Solver(cnf, config.solver)
    controller = HybridController(config, solver)
    result = solver.solve(hook=controller)
    return result, controller.calls


# ----------------------------------------------------------------------
# analytic cost model

@dataclass
class GroverCallCost:
    """Per-call quantities entering the runtime estimate."""

    n_vars: int  # subformula variables
    num_solutions: int  # satisfying assignments (0 allowed)
    mu: float  # heuristic mass on the productive subset before the call
    iterations: int  # amplification rounds credited to the call
    conflict_density: float  # expected future conflicts reachable locally
    extraction_cost: float = 0.0
    feedback_cost: float = 0.0
    iteration_cost: float = 0.0  # cost of one oracle + diffuser round


@dataclass
class CostModelParams:
    t_cdcl: float  # baseline classical runtime
    conflict_cost: float  # average cost per conflict
    sampling_overhead: float = 1.0  # multiplier absorbing shots and checking
    calls: tuple[GroverCallCost, ...] = ()

    def __post_init__(self) -> None:
        if min(self.t_cdcl, self.conflict_cost, self.sampling_overhead) < 0:
            raise ValueError("cost parameters must be nonnegative")


def estimate_hybrid_runtime(params: CostModelParams) -> float:
    """First-order planning estimate of hybrid runtime.

    Adds per-call extraction, search, and feedback costs to the baseline and
    credits back the expected conflict reduction, which is proportional to the
    local conflict density times the amplification gain.  A planning heuristic,
    not a measured quantity.
    """
    total = params.t_cdcl
    for call in params.calls:
        search = (
            params.sampling_overhead
            * call.iteration_cost
            * math.sqrt((1 << call.n_vars) / max(call.num_solutions, 1))
        )
        total += call.extraction_cost + search + call.feedback_cost
        gain = success_probability(call.mu, call.iterations) - call.mu
        total -= params.conflict_cost * call.conflict_density * gain
    return total


def crossover_size(m: int) -> float:
    """Subformula size beyond which quadratic search outpaces enumeration
    with an m-clause oracle: 2 * log2(m)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return 2.0 * math.log2(m)
