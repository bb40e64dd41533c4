import math
import random
from io import StringIO

import numpy as np
import pytest

from conftest import brute_force_sat_mask, random_cnf
from groversat.dimacs import cnf_from_clauses
from groversat.extract import SubFormula
from groversat.grover import (
    ControlledPhaseFlip,
    GroverConfig,
    MultiControlledNot,
    NotGate,
    amplify,
    bbht_search,
    build_gadget_circuit,
    build_phase_marks,
    grover_run,
    index_to_bitstring,
    score_candidates,
    simulate_circuit,
    success_probability,
    write_histogram_csv,
)

# closed-form oracle value, frozen from a 30-digit evaluation of
# sin^2(5 * asin(sqrt(1/8))) = 121/128
AMPLIFIED_ONE_EIGHTH_TWICE = 0.9453125


def make_sub(n, clauses):
    return SubFormula(cnf_from_clauses(n, clauses), tuple(range(1, n + 1)))


def test_success_probability_identity_at_zero_rounds():
    for mu in (0.0, 0.1, 0.25, 0.5, 1.0):
        assert success_probability(mu, 0) == pytest.approx(mu, abs=1e-12)


def test_success_probability_quarter_exact():
    assert success_probability(0.25, 1) == 1.0


def test_success_probability_eighth_two_rounds():
    assert abs(success_probability(0.125, 2) - AMPLIFIED_ONE_EIGHTH_TWICE) < 1e-9


def test_success_probability_domain():
    with pytest.raises(ValueError):
        success_probability(-0.1, 1)
    with pytest.raises(ValueError):
        success_probability(1.1, 1)


def test_phase_marks_single_clause():
    sub = make_sub(2, [(1, -2)])
    # violated only when x1=0, x2=1, i.e. index 0b10 = 2
    assert set(build_phase_marks(sub).tolist()) == {0, 1, 3}


def test_phase_marks_unsat_and_units():
    assert build_phase_marks(make_sub(1, [(1,), (-1,)])).size == 0
    assert set(build_phase_marks(make_sub(2, [(1,), (2,)])).tolist()) == {3}


def test_phase_marks_respects_limit():
    sub = make_sub(5, [(1, 2, 3, 4, 5)])
    with pytest.raises(ValueError):
        build_phase_marks(sub, limit=4)


def test_phase_marks_matches_brute_force():
    rng = random.Random(1234)
    for _ in range(40):
        cnf = random_cnf(rng, max_vars=6, max_clauses=8)
        sub = SubFormula(cnf, tuple(range(1, cnf.num_vars + 1)))
        marks = set(build_phase_marks(sub).tolist())
        mask = brute_force_sat_mask(cnf)
        assert marks == set(np.flatnonzero(mask).tolist())


def test_gadget_single_clause_compute_half():
    sub = make_sub(2, [(1, -2)])
    circuit = build_gadget_circuit(sub)
    # compute half: X conjugation on the positive literal, controls on both
    # variable wires, target the clause ancilla (wire 2)
    assert circuit.gates[0] == NotGate(0)
    assert circuit.gates[1] == MultiControlledNot(((0, True), (1, True)), 2)
    assert circuit.gates[2] == NotGate(0)


def test_gadget_flag_uses_negative_controls():
    sub = make_sub(2, [(1,), (2,)])
    circuit = build_gadget_circuit(sub)
    flag_gate = MultiControlledNot(((2, False), (3, False)), 4)
    phase_at = [i for i, g in enumerate(circuit.gates) if isinstance(g, ControlledPhaseFlip)]
    assert len(phase_at) == 1
    mid = phase_at[0]
    assert circuit.gates[mid - 1] == flag_gate
    assert circuit.gates[mid] == ControlledPhaseFlip(4)


def test_gadget_mirror_symmetry():
    rng = random.Random(5)
    for _ in range(20):
        cnf = random_cnf(rng, max_vars=4, max_clauses=5)
        if cnf.num_vars + cnf.num_clauses + 1 > 12 or cnf.num_vars == 0:
            continue
        sub = SubFormula(cnf, tuple(range(1, cnf.num_vars + 1)))
        gates = build_gadget_circuit(sub).gates
        mid = len(gates) // 2
        assert isinstance(gates[mid], ControlledPhaseFlip)
        assert gates[:mid] == tuple(reversed(gates[mid + 1 :]))


def test_gadget_empty_formula_marks_everything():
    sub = SubFormula(cnf_from_clauses(2, []), (1, 2))
    circuit = build_gadget_circuit(sub)
    for x in range(4):
        assert simulate_circuit(circuit, x) == (-1, True)


def test_gadget_width_limit():
    sub = make_sub(6, [(1, 2), (3, 4), (5, 6), (1, 6), (2, 5), (3, 6)])
    with pytest.raises(ValueError):
        build_gadget_circuit(sub)  # 6 + 6 + 1 = 13 wires > 12


def test_simulate_circuit_conjunction():
    sub = make_sub(2, [(1,), (2,)])
    circuit = build_gadget_circuit(sub)
    assert simulate_circuit(circuit, 0b11) == (-1, True)
    assert simulate_circuit(circuit, 0b10) == (1, True)  # x1=0, x2=1
    assert simulate_circuit(circuit, 0b01) == (1, True)
    assert simulate_circuit(circuit, 0b00) == (1, True)


def test_oracle_equivalence_exhaustive_suite():
    rng = random.Random(314)
    checked = 0
    while checked < 40:
        cnf = random_cnf(rng, max_vars=5, max_clauses=6)
        if cnf.num_vars == 0 or cnf.num_vars + cnf.num_clauses + 1 > 12:
            continue
        sub = SubFormula(cnf, tuple(range(1, cnf.num_vars + 1)))
        marked = set(build_phase_marks(sub).tolist())
        circuit = build_gadget_circuit(sub)
        for x in range(1 << cnf.num_vars):
            phase, clean = simulate_circuit(circuit, x)
            assert clean
            assert phase == (-1 if x in marked else 1)
        checked += 1


def test_amplify_norm_and_analytic_agreement():
    for n in (2, 4, 6):
        size = 1 << n
        for k in (1, 2, size // 4):
            marked = np.arange(k)
            for r in (0, 1, 3, 7):
                state = amplify(n, marked, r)
                assert abs(np.dot(state, state) - 1.0) < 1e-9
                mass = float(np.sum(state[marked] ** 2))
                assert abs(mass - success_probability(k / size, r)) < 1e-9


def test_grover_run_certain_outcome():
    sub = make_sub(2, [(1,), (2,)])
    hist = grover_run(sub, 1, GroverConfig(shots=2000, rng_seed=7))
    assert hist == {"11": 2000}


def test_grover_run_uniform_without_amplification():
    sub = make_sub(3, [(1, 2, 3)])
    cfg = GroverConfig(shots=2000, rng_seed=11)
    hist = grover_run(sub, 0, cfg)
    assert sum(hist.values()) == 2000
    p = 1 / 8
    sigma = math.sqrt(2000 * p * (1 - p))
    for count in hist.values():
        assert abs(count - 2000 * p) <= 3 * sigma


def test_grover_run_unsat_remains_uniform():
    # fully blocked 2-variable formula: every assignment violated
    sub = make_sub(2, [(1, 2), (-1, 2), (1, -2), (-1, -2)])
    cfg = GroverConfig(shots=2000, rng_seed=13)
    for r in (1, 3, 5):
        hist = grover_run(sub, r, cfg)
        p = 1 / 4
        sigma = math.sqrt(2000 * p * (1 - p))
        for count in hist.values():
            assert abs(count - 2000 * p) <= 3 * sigma


def test_grover_run_full_noise_is_uniform():
    sub = make_sub(2, [(1,), (2,)])
    cfg = GroverConfig(shots=2000, rng_seed=3, noise_epsilon=1.0)
    hist = grover_run(sub, 1, cfg)  # amplification is washed out entirely
    p = 1 / 4
    sigma = math.sqrt(2000 * p * (1 - p))
    assert len(hist) == 4
    for count in hist.values():
        assert abs(count - 2000 * p) <= 3 * sigma


def test_score_candidates_basic():
    sub = make_sub(2, [(1,), (2,)])
    assert score_candidates({"11": 1500, "10": 500}, sub, 2) == ("11", 0.0)


def test_score_candidates_symmetric_unsat():
    sub = make_sub(1, [(1,), (-1,)])
    beta, q = score_candidates({"0": 1000, "1": 1000}, sub, 2)
    assert q == 0.5


def test_score_candidates_checker_overrides_frequency():
    sub = make_sub(2, [(1,), (2,)])
    hist = {"00": 900, "11": 600, "01": 400}
    beta, q = score_candidates(hist, sub, 3)
    assert (beta, q) == ("11", 0.0)
    # with top_k=1 the spurious peak wins and scores badly
    beta1, q1 = score_candidates(hist, sub, 1)
    assert beta1 == "00" and q1 == 1.0


def test_bbht_finds_unique_conjunction():
    sub = make_sub(2, [(1,), (2,)])
    out = bbht_search(sub, GroverConfig(rng_seed=21))
    assert out.beta_q == "11"
    assert out.q == 0.0
    assert out.attempts_used <= 12
    assert sum(out.histogram.values()) == 2000 * out.attempts_used


def test_bbht_unsat_pair_scores_half():
    sub = make_sub(1, [(1,), (-1,)])
    out = bbht_search(sub, GroverConfig(rng_seed=5, max_attempts=4))
    assert out.q == 0.5
    assert out.attempts_used == 4


def test_bbht_iteration_schedule(monkeypatch):
    import groversat.grover as grover_mod

    target = 0b10110101
    clauses = [(v,) if (target >> (v - 1)) & 1 else (-v,) for v in range(1, 9)]
    sub = make_sub(8, clauses)
    seen_r = []
    original = grover_mod.grover_run

    def recorder(sub_, r, config, rng=None):
        seen_r.append(r)
        return original(sub_, r, config, rng)

    monkeypatch.setattr(grover_mod, "grover_run", recorder)
    out = grover_mod.bbht_search(sub, GroverConfig(rng_seed=3))
    cap = math.ceil(math.sqrt(256))
    assert all(r <= cap - 1 for r in seen_r)
    assert out.total_iterations == sum(seen_r)
    assert out.beta_q == index_to_bitstring(target, 8)
    assert out.q == 0.0


def test_histogram_csv_format():
    buf = StringIO()
    write_histogram_csv({"01": 5, "11": 9}, buf)
    assert buf.getvalue() == "assignment,count\n11,9\n01,5\n"


def test_config_validation():
    with pytest.raises(ValueError):
        GroverConfig(shots=0)
    with pytest.raises(ValueError):
        GroverConfig(noise_epsilon=1.5)
    with pytest.raises(ValueError):
        GroverConfig(growth_factor=1.0)
