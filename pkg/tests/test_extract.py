import random

import pytest

from conftest import (
    BFS_DEMO_BUDGET,
    BFS_DEMO_EXPECTED_SUB,
    BFS_DEMO_EXPECTED_VARS,
    BFS_DEMO_SEED_INDEX,
    bfs_demo_cnf,
    random_3sat,
)
from groversat.cdcl import Solver, SolverConfig
from groversat.dimacs import cnf_from_clauses, eval_assignment
from groversat.extract import (
    ExtractionConfig,
    ExtractionError,
    extract_subformula,
    simplify_under_trail,
)


def assigns_from(n, true_vars=(), false_vars=()):
    out = [0] * (n + 1)
    for v in true_vars:
        out[v] = 1
    for v in false_vars:
        out[v] = -1
    return out


def demo_solver(true_vars=(1,), false_vars=(4,)):
    """Solver over the worked-example formula with the trail set directly
    (no propagation), to mirror the illustrated partial assignment."""
    s = Solver(bfs_demo_cnf(), SolverConfig(activity_jitter=0.0))
    for v in true_vars:
        s.assume(v)
    for v in false_vars:
        s.assume(-v)
    return s


def subformula_as_global_clauses(sub):
    back = lambda l: sub.var_map[l - 1] if l > 0 else -sub.var_map[-l - 1]
    return {tuple(back(l) for l in cl) for cl in sub.cnf.clauses}


def test_simplify_reduces_and_drops():
    clauses = [(-1, 3), (-1, 2), (-2, 4), (4, -5)]
    assigns = assigns_from(5, true_vars=(1,), false_vars=(4,))
    out = simplify_under_trail(clauses, assigns)
    assert out == [(3,), (2,), (-2,), (-5,)]


def test_simplify_bfs_demo_trail():
    assigns = assigns_from(6, true_vars=(1,), false_vars=(4,))
    out = simplify_under_trail(bfs_demo_cnf().clauses, assigns)
    # satisfied clauses C2 and C4 vanish; C3 and C1 shrink; C5, C6, C7 persist
    assert out == [(3,), (-2,), (3, 5), (-5, 6), (2, -6)]


def test_simplify_empty_trail_is_identity():
    clauses = [(-1, 3), (2, 4)]
    assert simplify_under_trail(clauses, assigns_from(4)) == [(-1, 3), (2, 4)]


def test_simplify_raises_on_falsified_clause():
    with pytest.raises(ExtractionError):
        simplify_under_trail([(1, 2)], assigns_from(2, false_vars=(1, 2)))


def test_extract_reproduces_worked_example():
    s = demo_solver()
    sub = extract_subformula(
        s, ExtractionConfig(budget=BFS_DEMO_BUDGET), seed=BFS_DEMO_SEED_INDEX
    )
    assert sub is not None
    assert sub.var_map == BFS_DEMO_EXPECTED_VARS
    assert subformula_as_global_clauses(sub) == BFS_DEMO_EXPECTED_SUB
    assert sub.n_sub == 4 and sub.m_sub == 4
    assert sub.seed_clause == BFS_DEMO_SEED_INDEX


def test_extract_none_when_everything_satisfied():
    s = Solver(cnf_from_clauses(2, [(1, 2)]), SolverConfig(activity_jitter=0.0))
    s.assume(1)
    assert extract_subformula(s, ExtractionConfig(budget=8)) is None


def test_extract_single_clause_at_minimal_budget():
    # budget 3 admits exactly one binary clause (2 vars + 1 clause)
    s = demo_solver()
    sub = extract_subformula(
        s, ExtractionConfig(budget=3), seed=BFS_DEMO_SEED_INDEX
    )
    assert sub is not None
    assert sub.m_sub == 1
    assert sub.n_sub <= 2
    # enumeration over candidate subsets: the only subsets respecting the
    # cap are single clauses; BFS order starts at the seed, which
    # simplifies to the unit (-x2): that alone has n+m = 2 <= 3, but the
    # next clause would push past the budget
    assert subformula_as_global_clauses(sub) == {(-2,)}


def test_extract_trivial_candidates_skipped():
    # single unsatisfied clause -> fewer than two candidates -> None
    s = Solver(cnf_from_clauses(3, [(1, 2), (3, 1)]), SolverConfig(activity_jitter=0.0))
    s.assume(3)
    assert extract_subformula(s, ExtractionConfig(budget=8)) is None


def test_extract_all_unit_candidates_skipped():
    s = Solver(cnf_from_clauses(3, [(1, 2), (2, 3)]), SolverConfig(activity_jitter=0.0))
    s.assume(-2)
    # both clauses simplify to units (1) and (3)
    assert extract_subformula(s, ExtractionConfig(budget=8)) is None


def test_extract_budget_always_respected():
    rng = random.Random(17)
    for trial in range(40):
        cnf = random_3sat(12, 40, rng)
        s = Solver(cnf, SolverConfig(random_seed=trial))
        budget = rng.randint(3, 15)
        strategy = rng.choice(["activity_bfs", "activity_greedy", "random_sample", "variable_frontier"])
        sub = extract_subformula(s, ExtractionConfig(budget=budget, strategy=strategy))
        if sub is None:
            continue
        assert sub.n_sub + sub.m_sub <= budget
        assert len(set(sub.var_map)) == sub.n_sub
        # every dense variable occurs in at least one clause
        used = {abs(l) for cl in sub.cnf.clauses for l in cl}
        assert used == set(range(1, sub.n_sub + 1))


def test_extract_remap_soundness():
    # satisfying assignments of the subformula satisfy the corresponding
    # simplified global clauses when mapped back through var_map
    rng = random.Random(23)
    for trial in range(20):
        cnf = random_3sat(10, 30, rng)
        s = Solver(cnf, SolverConfig(random_seed=trial))
        sub = extract_subformula(s, ExtractionConfig(budget=12))
        if sub is None:
            continue
        n = sub.n_sub
        for x in range(1 << n):
            dense = [(x >> i) & 1 == 1 for i in range(n)]
            sat, _ = eval_assignment(sub.cnf, dense)
            if not sat:
                continue
            global_clauses = subformula_as_global_clauses(sub)
            value = {g: dense[i] for i, g in enumerate(sub.var_map)}
            for cl in global_clauses:
                assert any(value[abs(l)] == (l > 0) for l in cl)


def test_extract_bfs_locality():
    # BFS order: every visited clause shares a variable with an earlier one
    # (satisfied clauses participate in the clause graph as connectors)
    from groversat.extract import _bfs_order

    rng = random.Random(31)
    for trial in range(20):
        cnf = random_3sat(10, 30, rng)
        s = Solver(cnf, SolverConfig(random_seed=trial))
        s.assume(1)
        s.propagate()
        order = _bfs_order(s, seed=0, assigns=s.assigns, collect_cap=12)
        assert order[0] == 0
        reached_vars = {abs(l) for l in s.clauses[0]}
        for ci in order[1:]:
            cl_vars = {abs(l) for l in s.clauses[ci]}
            assert cl_vars & reached_vars
            reached_vars |= cl_vars


def test_extract_deterministic():
    for strategy in ["activity_bfs", "activity_greedy", "random_sample", "variable_frontier"]:
        cnf = random_3sat(12, 45, random.Random(4))
        subs = []
        for _ in range(2):
            s = Solver(cnf, SolverConfig(random_seed=77))
            s.propagate()
            s.assume(-1)
            s.propagate()
            subs.append(extract_subformula(s, ExtractionConfig(budget=10, strategy=strategy)))
        a, b = subs
        assert (a is None) == (b is None)
        if a is not None:
            assert a.cnf == b.cnf and a.var_map == b.var_map


def test_strategy_aliases_accepted():
    cfg = ExtractionConfig(budget=5, strategy="vf")
    assert cfg.strategy == "variable_frontier"
    with pytest.raises(ValueError):
        ExtractionConfig(strategy="bogus")
    with pytest.raises(ValueError):
        ExtractionConfig(budget=2)
