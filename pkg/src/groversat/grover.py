"""Simulated Grover subsolver for small CNF subformulas.

Two simulation paths back the same search:

* A fast path that amplifies a real statevector over the n_sub variable
  qubits using the diagonal phase oracle (the ancillas provably uncompute,
  so only the kickback on the variable register matters).
* An explicit gate-level oracle (clause ancillas, formula flag, phase flip,
  mirrored uncompute) built and verified exhaustively at small widths.

An assignment of the dense variables is written as a bitstring whose i-th
character is the value of variable i+1; histogram keys use this encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .dimacs import eval_assignment
from .extract import SubFormula

DEFAULT_MAX_SIM_VARS = 20
DEFAULT_MAX_GATE_WIRES = 12


@dataclass
class GroverConfig:
    shots: int = 2000
    growth_factor: float = 1.2  # multiplicative BBHT schedule (6/5)
    max_attempts: int = 12
    top_k: int = 5  # candidates handed to the classical checker
    noise_epsilon: float = 0.0  # histogram mixing with uniform
    rng_seed: int = 1
    max_sim_vars: int = DEFAULT_MAX_SIM_VARS

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.growth_factor <= 1.0:
            raise ValueError("growth_factor must exceed 1")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not 0.0 <= self.noise_epsilon <= 1.0:
            raise ValueError("noise_epsilon must lie in [0, 1]")


@dataclass
class GroverOutcome:
    histogram: dict[str, int]  # merged over attempts
    beta_q: str  # best candidate assignment
    q: float  # violated-clause fraction of beta_q
    attempts_used: int
    total_iterations: int  # oracle applications across attempts


# ----------------------------------------------------------------------
# gate-level oracle

@dataclass(frozen=True)
class Hadamard:
    wire: int


@dataclass(frozen=True)
class NotGate:
    wire: int


@dataclass(frozen=True)
class MultiControlledNot:
    # (wire, active value): the gate fires when every control wire carries
    # its active value; no controls means an unconditional NOT
    controls: tuple[tuple[int, bool], ...]
    target: int


@dataclass(frozen=True)
class ControlledPhaseFlip:
    wire: int


Gate = Hadamard | NotGate | MultiControlledNot | ControlledPhaseFlip


@dataclass(frozen=True)
class CircuitDescription:
    """Phase-oracle circuit: wires 0..n-1 are variables, n..n+m-1 clause
    ancillas, wire n+m the formula flag."""

    num_var_wires: int
    num_clause_wires: int
    gates: tuple[Gate, ...]

    @property
    def width(self) -> int:
        return self.num_var_wires + self.num_clause_wires + 1

    @property
    def flag_wire(self) -> int:
        return self.num_var_wires + self.num_clause_wires


def build_gadget_circuit(
    sub: SubFormula, max_wires: int = DEFAULT_MAX_GATE_WIRES
) -> CircuitDescription:
    """Explicit compute-phase-uncompute oracle for a subformula.

    Per clause, NOT conjugation on positive-literal wires retargets a
    multi-controlled NOT so the clause ancilla is set exactly when every
    literal is false; the flag aggregates the negated ancillas; a phase flip
    on the flag marks satisfying assignments; the mirror restores ancillas.
    """
    n, m = sub.n_sub, sub.m_sub
    width = n + m + 1
    if width > max_wires:
        raise ValueError(f"circuit width {width} exceeds the gate-level limit {max_wires}")
    compute: list[Gate] = []
    for j, clause in enumerate(sub.cnf.clauses):
        ancilla = n + j
        pos = [l - 1 for l in clause if l > 0]
        controls = tuple((abs(l) - 1, True) for l in clause)
        for w in pos:
            compute.append(NotGate(w))
        compute.append(MultiControlledNot(controls, ancilla))
        for w in reversed(pos):
            compute.append(NotGate(w))
    flag_controls = tuple((n + j, False) for j in range(m))
    compute.append(MultiControlledNot(flag_controls, n + m))
    gates = tuple(compute) + (ControlledPhaseFlip(n + m),) + tuple(reversed(compute))
    return CircuitDescription(n, m, gates)


def simulate_circuit(circuit: CircuitDescription, x: int) -> tuple[int, bool]:
    """Run the oracle on basis input x (bit i of x = variable wire i).

    All oracle gates map basis states to basis states, so classical
    reversible simulation with a tracked sign is exact.  Returns the phase
    (+1/-1) picked up by the input and whether every ancilla returned to 0.
    """
    bits = [(x >> i) & 1 for i in range(circuit.width)]
    phase = 1
    for gate in circuit.gates:
        if isinstance(gate, NotGate):
            bits[gate.wire] ^= 1
        elif isinstance(gate, MultiControlledNot):
            if all(bits[w] == int(active) for w, active in gate.controls):
                bits[gate.target] ^= 1
        elif isinstance(gate, ControlledPhaseFlip):
            if bits[gate.wire]:
                phase = -phase
        else:
            raise ValueError("basis-state simulation does not support Hadamard gates")
    ancillas_zero = all(bits[w] == 0 for w in range(circuit.num_var_wires, circuit.width))
    return phase, ancillas_zero


# ----------------------------------------------------------------------
# fast diagonal-oracle path

def build_phase_marks(sub: SubFormula, limit: int = DEFAULT_MAX_SIM_VARS) -> np.ndarray:
    """Indices of all satisfying assignments of the subformula.

    Exhaustive but vectorized: bit i of an index is the value of dense
    variable i+1.  Refuses formulas larger than `limit` variables.
    """
    n = sub.n_sub
    if n > limit:
        raise ValueError(f"subformula has {n} variables, above the simulation limit {limit}")
    idx = np.arange(1 << n, dtype=np.int64)
    sat = np.ones(1 << n, dtype=bool)
    for clause in sub.cnf.clauses:
        clause_sat = np.zeros(1 << n, dtype=bool)
        for lit in clause:
            bit = (idx >> (abs(lit) - 1)) & 1
            clause_sat |= bit == (1 if lit > 0 else 0)
        sat &= clause_sat
    return idx[sat]


def amplify(n: int, marked: np.ndarray, r: int) -> np.ndarray:
    """State of the n-qubit variable register after r Grover iterations
    (diagonal phase oracle + inversion about the mean) from uniform."""
    size = 1 << n
    state = np.full(size, 1.0 / math.sqrt(size))
    for _ in range(r):
        state[marked] = -state[marked]
        state = 2.0 * state.mean() - state
    return state


def success_probability(mu: float, r: int) -> float:
    """Marked-subspace mass after r amplification rounds from initial mass mu."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must lie in [0, 1]")
    if r < 0:
        raise ValueError("r must be nonnegative")
    return math.sin((2 * r + 1) * math.asin(math.sqrt(mu))) ** 2


def index_to_bitstring(index: int, n: int) -> str:
    return "".join("1" if (index >> i) & 1 else "0" for i in range(n))


def bitstring_to_assignment(bits: str) -> list[bool]:
    return [c == "1" for c in bits]


def grover_run(
    sub: SubFormula,
    r: int,
    config: GroverConfig,
    rng: np.random.Generator | None = None,
) -> dict[str, int]:
    """Sample `shots` measurement outcomes after r Grover iterations.

    With noise_epsilon > 0 the sampling distribution is mixed with uniform,
    mimicking a noisy backend washing out the amplified peaks.
    """
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    n = sub.n_sub
    marked = build_phase_marks(sub, config.max_sim_vars)
    state = amplify(n, marked, r)
    probs = state * state
    probs /= probs.sum()
    eps = config.noise_epsilon
    if eps > 0.0:
        probs = (1.0 - eps) * probs + eps / len(probs)
    counts = rng.multinomial(config.shots, probs)
    hist: dict[str, int] = {}
    for index in np.flatnonzero(counts):
        hist[index_to_bitstring(int(index), n)] = int(counts[index])
    return hist


def score_candidates(
    histogram: dict[str, int], sub: SubFormula, top_k: int
) -> tuple[str, float]:
    """Check the top_k most frequent outcomes classically; return the one
    with the lowest violated fraction (ties: higher count, then lexicographic)."""
    if not histogram:
        raise ValueError("empty histogram")
    ranked = sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    best_key = ""
    best_q = math.inf
    best_count = -1
    for key, count in ranked:
        _, q = eval_assignment(sub.cnf, bitstring_to_assignment(key))
        if q < best_q or (q == best_q and count > best_count):
            best_key, best_q, best_count = key, q, count
    return best_key, best_q


def bbht_search(
    sub: SubFormula,
    config: GroverConfig,
    rng: np.random.Generator | None = None,
) -> GroverOutcome:
    """Randomized-schedule search for an unknown solution count.

    Attempt i draws r uniformly from {0, .., M_i - 1} with M_1 = 1 and
    M_{i+1} = min(ceil(growth_factor * M_i), ceil(sqrt(N))), runs the
    sampler, and scores the most frequent outcomes.  Stops early on a
    zero-violation candidate.  An unsatisfiable subformula simply exhausts
    its attempts and reports the least-bad candidate with q > 0.
    """
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    n = sub.n_sub
    size = 1 << n
    m_cap = math.ceil(math.sqrt(size))
    m_cur = 1
    merged: dict[str, int] = {}
    best_key = ""
    best_q = math.inf
    best_count = -1
    attempts = 0
    total_iterations = 0
    for _ in range(config.max_attempts):
        r = int(rng.integers(0, m_cur))
        hist = grover_run(sub, r, config, rng)
        attempts += 1
        total_iterations += r
        for key, count in hist.items():
            merged[key] = merged.get(key, 0) + count
        key, q = score_candidates(hist, sub, config.top_k)
        count = hist[key]
        if q < best_q or (q == best_q and count > best_count):
            best_key, best_q, best_count = key, q, count
        if best_q == 0.0:
            break
        m_cur = min(math.ceil(config.growth_factor * m_cur), m_cap)
    return GroverOutcome(merged, best_key, best_q, attempts, total_iterations)


def write_histogram_csv(histogram: dict[str, int], out: IO[str]) -> None:
    """Debug dump, one `assignment,count` row per outcome, most frequent first."""
    out.write("assignment,count\n")
    for key, count in sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0])):
        out.write(f"{key},{count}\n")
