"""Conflict-driven clause learning solver.

Standard architecture: two-watched-literal unit propagation, first-UIP
conflict analysis with backjumping, VSIDS branching with phase saving,
Luby-scheduled restarts, and activity-based learned-clause deletion.
The solver doubles as the host for the hybrid loop: `solve` accepts an
optional hook that is notified after each conflict and may adjust
activities and saved phases at conflict-free propagation fixpoints.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from enum import Enum
from heapq import heappop, heappush
from typing import Optional, Protocol

from .dimacs import Cnf, eval_assignment, is_tautology, normalize_clause

ACTIVITY_RESCALE = 1e100


class Status(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass
class SolverConfig:
    var_decay: float = 0.95
    clause_activity_decay: float = 0.999
    restart_base: int = 100
    random_seed: int = 1
    initial_phase: bool = False
    # Optional conflict budget; exceeding it returns UNKNOWN.
    max_conflicts: int | None = None
    # Learned clauses are capped at this multiple of the original count.
    learned_cap_factor: float = 4.0
    # Tiny seed-dependent perturbation of initial activities so distinct
    # seeds explore distinct branching orders without touching the argmax
    # contract of pick_branch_literal.
    activity_jitter: float = 1e-6

    def __post_init__(self) -> None:
        if not 0.0 < self.var_decay < 1.0:
            raise ValueError("var_decay must lie strictly between 0 and 1")
        if not 0.0 < self.clause_activity_decay < 1.0:
            raise ValueError("clause_activity_decay must lie strictly between 0 and 1")
        if self.restart_base < 1:
            raise ValueError("restart_base must be >= 1")


@dataclass
class Stats:
    restarts: int = 0
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    grover_calls: int = 0
    wall_time: float = 0.0

    def counters(self) -> tuple[int, int, int, int, int]:
        return (
            self.restarts,
            self.conflicts,
            self.decisions,
            self.propagations,
            self.grover_calls,
        )


@dataclass
class SolveResult:
    status: Status
    model: list[bool] | None
    stats: Stats


class SearchHook(Protocol):
    """Callbacks the hybrid controller plugs into the search loop."""

    pending: bool

    def after_conflict(self, solver: "Solver") -> None: ...

    def run_call(self, solver: "Solver") -> None: ...


def luby(i: int) -> int:
    """i-th element (1-based) of the Luby restart sequence 1,1,2,1,1,2,4,..."""
    if i < 1:
        raise ValueError("luby index must be >= 1")
    while True:
        k = i.bit_length()
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1


def check_model(cnf: Cnf, model: list[bool]) -> bool:
    """True iff the full assignment satisfies the formula."""
    return eval_assignment(cnf, model)[0]


class Solver:
    """One single-threaded CDCL search over a fixed input formula.

    Clause references are indices into `self.clauses`; original clauses come
    first, learned clauses follow from `self.first_learned`.  The literal
    `lit`'s watch list lives at `self.watches[lit + num_vars]`.
    """

    def __init__(self, cnf: Cnf, config: SolverConfig | None = None):
        self.config = config or SolverConfig()
        self.cnf = cnf
        nv = cnf.num_vars
        self.num_vars = nv
        self.stats = Stats()
        self.rng = random.Random(self.config.random_seed)

        self.clauses: list[list[int]] = []
        self.clause_act: list[float] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * nv + 1)]

        self.assigns = [0] * (nv + 1)  # 0 unassigned, 1 true, -1 false
        self.var_level = [0] * (nv + 1)
        self.reason = [-1] * (nv + 1)  # clause index, -1 for decisions
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0

        self.saved_phase = [self.config.initial_phase] * (nv + 1)
        self.activities = [0.0] * (nv + 1)
        jitter = self.config.activity_jitter
        if jitter > 0.0:
            for v in range(1, nv + 1):
                self.activities[v] = self.rng.random() * jitter
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.order_heap: list[tuple[float, int]] = []
        self._rebuild_order_heap()

        self.seen = bytearray(nv + 1)
        self.ok = True
        self._load_conflict: int | None = None
        self._load(cnf)
        self.first_learned = len(self.clauses)

    # ------------------------------------------------------------------
    # construction

    def _load(self, cnf: Cnf) -> None:
        for clause in cnf.clauses:
            lits = list(normalize_clause(clause))
            if is_tautology(lits):
                continue
            ci = self._attach(lits)
            if not lits:
                self.ok = False
                self._load_conflict = ci
                return
            if len(lits) == 1:
                lit = lits[0]
                val = self._value(lit)
                if val == -1:
                    # contradictory unit; remember it so propagate() reports it
                    self.ok = False
                    self._load_conflict = ci
                    return
                if val == 0:
                    self._enqueue(lit, ci)

    def _attach(self, lits: list[int]) -> int:
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.clause_act.append(0.0)
        if len(lits) >= 2:
            nv = self.num_vars
            self.watches[lits[0] + nv].append(ci)
            self.watches[lits[1] + nv].append(ci)
        return ci

    # ------------------------------------------------------------------
    # assignment plumbing

    def _value(self, lit: int) -> int:
        return self.assigns[lit] if lit > 0 else -self.assigns[-lit]

    def level(self) -> int:
        return len(self.trail_lim)

    def _enqueue(self, lit: int, reason: int) -> None:
        v = abs(lit)
        self.assigns[v] = 1 if lit > 0 else -1
        self.var_level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)
        if reason >= 0:
            self.stats.propagations += 1

    def new_decision_level(self) -> None:
        self.trail_lim.append(len(self.trail))

    def assume(self, lit: int) -> None:
        """Open a decision level and assign `lit` (tests and decisions)."""
        self.new_decision_level()
        self._enqueue(lit, -1)

    def backjump(self, target_level: int) -> None:
        """Undo all assignments above `target_level`, saving phases."""
        if len(self.trail_lim) <= target_level:
            return
        lim = self.trail_lim[target_level]
        heap = self.order_heap
        acts = self.activities
        for lit in reversed(self.trail[lim:]):
            v = abs(lit)
            self.saved_phase[v] = lit > 0
            self.assigns[v] = 0
            self.reason[v] = -1
            heappush(heap, (-acts[v], v))
        del self.trail[lim:]
        del self.trail_lim[target_level:]
        self.qhead = lim

    # ------------------------------------------------------------------
    # activities

    def bump_var(self, v: int, mult: float = 1.0) -> None:
        acts = self.activities
        acts[v] += self.var_inc * mult
        if acts[v] > ACTIVITY_RESCALE:
            for u in range(1, self.num_vars + 1):
                acts[u] *= 1.0 / ACTIVITY_RESCALE
            self.var_inc *= 1.0 / ACTIVITY_RESCALE
            self._rebuild_order_heap()
        elif self.assigns[v] == 0:
            heappush(self.order_heap, (-acts[v], v))

    def _rebuild_order_heap(self) -> None:
        acts = self.activities
        self.order_heap = [
            (-acts[v], v) for v in range(1, self.num_vars + 1) if self.assigns[v] == 0
        ]
        self.order_heap.sort()

    def decay_var_activity(self) -> None:
        self.var_inc /= self.config.var_decay

    def bump_clause(self, ci: int) -> None:
        self.clause_act[ci] += self.cla_inc
        if self.clause_act[ci] > ACTIVITY_RESCALE:
            inv = 1.0 / ACTIVITY_RESCALE
            for i in range(len(self.clause_act)):
                self.clause_act[i] *= inv
            self.cla_inc *= inv

    def decay_clause_activity(self) -> None:
        self.cla_inc /= self.config.clause_activity_decay

    # ------------------------------------------------------------------
    # propagation

    def propagate(self) -> int | None:
        """Run unit propagation to fixpoint; return a falsified clause index or None."""
        if self._load_conflict is not None:
            ci = self._load_conflict
            self._load_conflict = None
            return ci
        trail = self.trail
        assigns = self.assigns
        watches = self.watches
        clauses = self.clauses
        var_level = self.var_level
        reason = self.reason
        level = len(self.trail_lim)
        nv = self.num_vars
        qhead = self.qhead
        props = 0
        confl: int | None = None
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            wl = watches[nv - p]  # clauses watching -p
            i = j = 0
            n_watch = len(wl)
            while i < n_watch:
                ci = wl[i]
                i += 1
                cl = clauses[ci]
                # keep the falsified watch in slot 1
                if cl[0] == -p:
                    cl[0] = cl[1]
                    cl[1] = -p
                first = cl[0]
                fv = assigns[first] if first > 0 else -assigns[-first]
                if fv == 1:
                    wl[j] = ci
                    j += 1
                    continue
                for k in range(2, len(cl)):
                    lk = cl[k]
                    if (assigns[lk] if lk > 0 else -assigns[-lk]) != -1:
                        cl[1] = lk
                        cl[k] = -p
                        watches[lk + nv].append(ci)
                        break
                else:
                    # no replacement watch: clause is unit or falsified
                    wl[j] = ci
                    j += 1
                    if fv == -1:
                        while i < n_watch:  # keep remaining watchers
                            wl[j] = wl[i]
                            j += 1
                            i += 1
                        confl = ci
                        break
                    v = first if first > 0 else -first
                    assigns[v] = 1 if first > 0 else -1
                    var_level[v] = level
                    reason[v] = ci
                    trail.append(first)
                    props += 1
            del wl[j:]
            if confl is not None:
                break
        self.qhead = qhead
        self.stats.propagations += props
        return confl

    def assert_no_falsified(self) -> None:
        """Debug sweep: at a conflict-free fixpoint no clause is fully false."""
        for ci, cl in enumerate(self.clauses):
            if cl and all(self._value(l) == -1 for l in cl):
                raise AssertionError(f"clause {ci} fully falsified: {cl}")

    # ------------------------------------------------------------------
    # conflict analysis

    def analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP conflict analysis.

        Returns (learned clause, backjump level); the asserting literal is the
        first element of the learned clause.  Requires the current decision
        level to be at least 1.
        """
        if not self.trail_lim:
            raise ValueError("conflict at decision level 0 means UNSAT")
        learned: list[int] = [0]
        seen = self.seen
        trail = self.trail
        var_level = self.var_level
        current = len(self.trail_lim)
        counter = 0
        p = 0
        index = len(trail)
        cl = self.clauses[confl]
        ci = confl
        while True:
            if ci >= self.first_learned:
                self.bump_clause(ci)
            for q in cl:
                if q == p:
                    continue
                v = abs(q)
                if not seen[v] and var_level[v] > 0:
                    seen[v] = 1
                    self.bump_var(v)
                    if var_level[v] >= current:
                        counter += 1
                    else:
                        learned.append(q)
            while not seen[abs(trail[index - 1])]:
                index -= 1
            index -= 1
            p = trail[index]
            v = abs(p)
            seen[v] = 0
            counter -= 1
            if counter == 0:
                break
            ci = self.reason[v]
            cl = self.clauses[ci]
        learned[0] = -p
        for q in learned[1:]:
            seen[abs(q)] = 0

        if len(learned) == 1:
            return learned, 0
        # move a max-level literal to slot 1 so it can be watched
        max_i = 1
        for i in range(2, len(learned)):
            if var_level[abs(learned[i])] > var_level[abs(learned[max_i])]:
                max_i = i
        learned[1], learned[max_i] = learned[max_i], learned[1]
        return learned, var_level[abs(learned[1])]

    def learn(self, learned: list[int]) -> int:
        """Attach a learned clause and return its index."""
        ci = self._attach(list(learned))
        self.bump_clause(ci)
        return ci

    # ------------------------------------------------------------------
    # branching

    def pick_branch_literal(self) -> int | None:
        """Unassigned variable of maximal activity (ties: lowest index),
        signed by its saved phase; None when every variable is assigned."""
        heap = self.order_heap
        acts = self.activities
        assigns = self.assigns
        while heap:
            negact, v = heap[0]
            if assigns[v] != 0:
                heappop(heap)  # re-pushed when the variable is unassigned
                continue
            if acts[v] != -negact:
                heappop(heap)  # stale score (external change): reinsert fresh
                heappush(heap, (-acts[v], v))
                continue
            return v if self.saved_phase[v] else -v
        return None

    # ------------------------------------------------------------------
    # learned-clause deletion (runs at restart points, decision level 0)

    def reduce_db(self) -> None:
        locked = {self.reason[abs(l)] for l in self.trail if self.reason[abs(l)] >= 0}
        removable = [
            ci
            for ci in range(self.first_learned, len(self.clauses))
            if ci not in locked and len(self.clauses[ci]) > 1
        ]
        removable.sort(key=lambda ci: self.clause_act[ci])
        drop = set(removable[: len(removable) // 2])
        if not drop:
            return
        keep = [ci for ci in range(len(self.clauses)) if ci not in drop]
        remap = {old: new for new, old in enumerate(keep)}
        self.clauses = [self.clauses[ci] for ci in keep]
        self.clause_act = [self.clause_act[ci] for ci in keep]
        nv = self.num_vars
        self.watches = [[] for _ in range(2 * nv + 1)]
        for ci, cl in enumerate(self.clauses):
            if len(cl) < 2:
                continue
            # rewatch two non-false literals; at a level-0 fixpoint a clause
            # with a single non-false literal is satisfied by it
            w = [k for k in range(len(cl)) if self._value(cl[k]) != -1]
            if w and w[0] != 0:
                cl[0], cl[w[0]] = cl[w[0]], cl[0]
            if len(w) > 1 and w[1] != 1:
                cl[1], cl[w[1]] = cl[w[1]], cl[1]
            self.watches[cl[0] + nv].append(ci)
            self.watches[cl[1] + nv].append(ci)
        for v in range(1, nv + 1):
            if self.reason[v] >= 0:
                self.reason[v] = remap[self.reason[v]]

    def clause_db_hash(self) -> int:
        """Order-sensitive structural hash of the clause database."""
        return hash(tuple(tuple(cl) for cl in self.clauses))

    # ------------------------------------------------------------------
    # main loop

    def _result(self, status: Status, model: list[bool] | None, t0: float) -> SolveResult:
        self.stats.wall_time = time.perf_counter() - t0
        return SolveResult(status, model, self.stats)

    def solve(self, hook: SearchHook | None = None) -> SolveResult:
        t0 = time.perf_counter()
        stats = self.stats
        cfg = self.config
        restart_threshold = cfg.restart_base * luby(stats.restarts + 1)
        conflicts_at_restart = 0
        learned_cap = int(cfg.learned_cap_factor * self.first_learned)

        while True:
            confl = self.propagate()
            if confl is not None:
                stats.conflicts += 1
                if not self.trail_lim:
                    return self._result(Status.UNSAT, None, t0)
                learned, blevel = self.analyze(confl)
                self.backjump(blevel)
                ci = self.learn(learned)
                self._enqueue(learned[0], ci)
                self.decay_var_activity()
                self.decay_clause_activity()
                if hook is not None:
                    hook.after_conflict(self)
                if cfg.max_conflicts is not None and stats.conflicts >= cfg.max_conflicts:
                    return self._result(Status.UNKNOWN, None, t0)
                if stats.conflicts - conflicts_at_restart >= restart_threshold:
                    stats.restarts += 1
                    conflicts_at_restart = stats.conflicts
                    restart_threshold = cfg.restart_base * luby(stats.restarts + 1)
                    self.backjump(0)
                    if len(self.clauses) - self.first_learned > learned_cap:
                        self.reduce_db()
            else:
                if hook is not None and hook.pending:
                    hook.run_call(self)
                if len(self.trail) == self.num_vars:
                    model = [self.assigns[v] == 1 for v in range(1, self.num_vars + 1)]
                    if not check_model(self.cnf, model):
                        raise AssertionError("internal error: model fails verification")
                    return self._result(Status.SAT, model, t0)
                lit = self.pick_branch_literal()
                if lit is None:  # unreachable given the trail check; defensive
                    model = [self.assigns[v] == 1 for v in range(1, self.num_vars + 1)]
                    if not check_model(self.cnf, model):
                        raise AssertionError("internal error: model fails verification")
                    return self._result(Status.SAT, model, t0)
                stats.decisions += 1
                self.assume(lit)


def solve(cnf: Cnf, config: SolverConfig | None = None) -> SolveResult:
    """Solve a formula with a fresh solver instance."""
    return Solver(cnf, config).solve()
