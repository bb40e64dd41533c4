"""Generator of power-analysis key-recovery proxy CNF instances.

Two symbolic executions share a fixed plaintext and evolve by
``S_t = phi(S_{t-1} xor rotl(K, t mod w))`` where ``rotl`` is a left
rotation and ``phi`` an optional chi-style substitution layer.  The keys
are constrained to differ while a Hamming-weight popcount of the states at
a chosen cycle is constrained equal or unequal, so a model is a pair of
distinct keys that the leakage model can or cannot distinguish.

Bit vectors are tuples indexed 0..w-1 with index 0 the leftmost bit of the
printed string; all circuit relations are Tseitin-encoded with XOR, AND,
and equivalence gadgets over fresh variables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Sequence

from .dimacs import Cnf

Bits = tuple[int, ...]


class LeakageRelation(str, Enum):
    EQUAL = "eq"
    NOT_EQUAL = "neq"


@dataclass
class ScaConfig:
    width: int = 8
    cycles: int = 2
    substitution_on: bool = True
    fixed_key_bits: dict[int, bool] | None = None  # applied to both keys
    leakage_relation: LeakageRelation = LeakageRelation.NOT_EQUAL
    check_cycle: int | None = None  # defaults to the last cycle
    plaintext: Bits | None = None  # defaults to all-ones

    def resolved_check_cycle(self) -> int:
        return self.cycles if self.check_cycle is None else self.check_cycle

    def resolved_plaintext(self) -> Bits:
        if self.plaintext is None:
            return (1,) * self.width
        return self.plaintext

    def validate(self) -> None:
        if self.width < 2:
            raise ValueError("width must be >= 2")
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        cc = self.resolved_check_cycle()
        if not 1 <= cc <= self.cycles:
            raise ValueError(f"check_cycle {cc} outside [1, {self.cycles}]")
        pt = self.resolved_plaintext()
        if len(pt) != self.width or any(b not in (0, 1) for b in pt):
            raise ValueError("plaintext must be a 0/1 vector of the key width")
        for idx in self.fixed_key_bits or {}:
            if not 0 <= idx < self.width:
                raise ValueError(f"fixed key bit index {idx} outside [0, {self.width})")


@dataclass
class GateContext:
    """Fresh-variable allocator plus the clause accumulator."""

    next_var: int
    clauses: list[tuple[int, ...]] = field(default_factory=list)

    def new_var(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v

    def add(self, clause: tuple[int, ...]) -> None:
        self.clauses.append(clause)


def encode_gate(kind: str, a: int, b: int, ctx: GateContext) -> int:
    """Tseitin gadget c = kind(a, b) over a fresh output variable c."""
    c = ctx.new_var()
    if kind == "xor":
        ctx.add((-a, -b, -c))
        ctx.add((a, b, -c))
        ctx.add((a, -b, c))
        ctx.add((-a, b, c))
    elif kind == "and":
        ctx.add((-a, -b, c))
        ctx.add((a, -c))
        ctx.add((b, -c))
    elif kind == "eq":
        ctx.add((-a, -b, c))
        ctx.add((a, b, c))
        ctx.add((-a, b, -c))
        ctx.add((a, -b, -c))
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    return c


def encode_neq(a: Sequence[int], b: Sequence[int], ctx: GateContext) -> None:
    """Force the two equal-width vectors to differ in at least one bit."""
    if len(a) != len(b):
        raise ValueError("encode_neq requires equal widths")
    diffs = [encode_gate("xor", ai, bi, ctx) for ai, bi in zip(a, b)]
    ctx.add(tuple(diffs))


def _half_adder(a: int, b: int, ctx: GateContext) -> tuple[int, int]:
    return encode_gate("xor", a, b, ctx), encode_gate("and", a, b, ctx)


def _full_adder(a: int, b: int, cin: int, ctx: GateContext) -> tuple[int, int]:
    s1 = encode_gate("xor", a, b, ctx)
    total = encode_gate("xor", s1, cin, ctx)
    c1 = encode_gate("and", a, b, ctx)
    c2 = encode_gate("and", s1, cin, ctx)
    # c1 and c2 are mutually exclusive, so XOR realizes their OR
    carry = encode_gate("xor", c1, c2, ctx)
    return total, carry


def encode_popcount(bits: Sequence[int], ctx: GateContext) -> list[int]:
    """Adder tree whose output bits (little-endian) equal the Hamming weight
    of the inputs in every model; width is ceil(log2(len(bits) + 1))."""
    if not bits:
        raise ValueError("popcount needs at least one input bit")
    columns: list[list[int]] = [list(bits)]
    i = 0
    while i < len(columns):
        col = columns[i]
        k = 0
        while len(col) - k >= 3:
            s, carry = _full_adder(col[k], col[k + 1], col[k + 2], ctx)
            k += 3
            col.append(s)  # sums re-enter the same column until one remains
            if i + 1 == len(columns):
                columns.append([])
            columns[i + 1].append(carry)
        if len(col) - k == 2:
            s, carry = _half_adder(col[k], col[k + 1], ctx)
            k += 2
            col.append(s)
            if i + 1 == len(columns):
                columns.append([])
            columns[i + 1].append(carry)
        columns[i] = [col[k]]
        i += 1
    count = [col[0] for col in columns]
    expected = (len(bits)).bit_length()
    assert len(count) == expected, "popcount column count drifted"
    return count


# ----------------------------------------------------------------------
# reference semantics

def rotl(bits: Bits, s: int) -> Bits:
    s %= len(bits)
    return bits[s:] + bits[:s]


def chi_layer(bits: Bits) -> Bits:
    w = len(bits)
    return tuple(bits[i] ^ (bits[(i + 1) % w] & bits[(i + 2) % w]) for i in range(w))


def _reference_trace(config: ScaConfig, key: Bits) -> list[Bits]:
    """States S_1..S_T of one execution under the update rule."""
    state = config.resolved_plaintext()
    states: list[Bits] = []
    for t in range(1, config.cycles + 1):
        rotated = rotl(key, t % config.width)
        state = tuple(s ^ k for s, k in zip(state, rotated))
        if config.substitution_on:
            state = chi_layer(state)
        states.append(state)
    return states


def simulate_reference(
    config: ScaConfig, key_a: Bits, key_b: Bits
) -> tuple[list[int], list[int]]:
    """Hamming-weight leakage per cycle for the two executions."""
    if len(key_a) != config.width or len(key_b) != config.width:
        raise ValueError("key widths must equal the configured width")
    leak_a = [sum(s) for s in _reference_trace(config, key_a)]
    leak_b = [sum(s) for s in _reference_trace(config, key_b)]
    return leak_a, leak_b


# ----------------------------------------------------------------------
# instance emission

@dataclass
class InstanceMeta:
    """Provenance sidecar: configuration echo plus named variable locations
    so models decode back to keys, states, and leakage counts."""

    config: dict
    ranges: dict[str, tuple[int, int]]  # contiguous [lo, hi] blocks
    leak_counts: dict[str, list[int]]  # little-endian count bits per execution
    num_vars: int
    num_clauses: int

    def to_json(self, out: IO[str]) -> None:
        json.dump(
            {
                "config": self.config,
                "ranges": {k: list(v) for k, v in self.ranges.items()},
                "leak_counts": self.leak_counts,
                "num_vars": self.num_vars,
                "num_clauses": self.num_clauses,
            },
            out,
            indent=2,
        )
        out.write("\n")

    @staticmethod
    def from_json(data: str) -> "InstanceMeta":
        raw = json.loads(data)
        return InstanceMeta(
            config=raw["config"],
            ranges={k: (v[0], v[1]) for k, v in raw["ranges"].items()},
            leak_counts=raw["leak_counts"],
            num_vars=raw["num_vars"],
            num_clauses=raw["num_clauses"],
        )


def _config_echo(config: ScaConfig) -> dict:
    return {
        "width": config.width,
        "cycles": config.cycles,
        "substitution_on": config.substitution_on,
        "fixed_key_bits": {str(k): v for k, v in (config.fixed_key_bits or {}).items()},
        "leakage_relation": config.leakage_relation.value,
        "check_cycle": config.resolved_check_cycle(),
        "plaintext": "".join(str(b) for b in config.resolved_plaintext()),
    }


def generate_instance(config: ScaConfig) -> tuple[Cnf, InstanceMeta]:
    """Emit the full instance: plaintext units, two symbolic executions,
    key disequality, and the popcount leakage relation at the check cycle."""
    config.validate()
    w = config.width
    cc = config.resolved_check_cycle()
    plaintext_vars = list(range(1, w + 1))
    key_vars = {"a": list(range(w + 1, 2 * w + 1)), "b": list(range(2 * w + 1, 3 * w + 1))}
    ctx = GateContext(next_var=3 * w + 1)
    ranges: dict[str, tuple[int, int]] = {
        "plaintext": (1, w),
        "key_a": (w + 1, 2 * w),
        "key_b": (2 * w + 1, 3 * w),
    }

    for var, bit in zip(plaintext_vars, config.resolved_plaintext()):
        ctx.add((var,) if bit else (-var,))
    for idx, value in sorted((config.fixed_key_bits or {}).items()):
        for exe in ("a", "b"):
            var = key_vars[exe][idx]
            ctx.add((var,) if value else (-var,))

    check_state: dict[str, list[int]] = {}
    prev = {"a": plaintext_vars, "b": plaintext_vars}
    for t in range(1, config.cycles + 1):
        s = t % w
        for exe in ("a", "b"):
            key = key_vars[exe]
            mixed = [
                encode_gate("xor", prev[exe][i], key[(i + s) % w], ctx) for i in range(w)
            ]
            if config.substitution_on:
                ands = [
                    encode_gate("and", mixed[(i + 1) % w], mixed[(i + 2) % w], ctx)
                    for i in range(w)
                ]
                state = [encode_gate("xor", mixed[i], ands[i], ctx) for i in range(w)]
            else:
                state = mixed
            ranges[f"state_{exe}_t{t}"] = (state[0], state[-1])
            prev[exe] = state
            if t == cc:
                check_state[exe] = state

    encode_neq(key_vars["a"], key_vars["b"], ctx)

    counts = {exe: encode_popcount(check_state[exe], ctx) for exe in ("a", "b")}
    if config.leakage_relation is LeakageRelation.EQUAL:
        for ca, cb in zip(counts["a"], counts["b"]):
            eq = encode_gate("eq", ca, cb, ctx)
            ctx.add((eq,))
    else:
        encode_neq(counts["a"], counts["b"], ctx)

    num_vars = ctx.next_var - 1
    cnf = Cnf(num_vars, tuple(ctx.clauses))
    meta = InstanceMeta(
        config=_config_echo(config),
        ranges=ranges,
        leak_counts={"a": counts["a"], "b": counts["b"]},
        num_vars=num_vars,
        num_clauses=cnf.num_clauses,
    )
    return cnf, meta


def decode_bits(model: Sequence[bool], lo: int, hi: int) -> Bits:
    """Read variables lo..hi (inclusive) out of a model as a bit vector."""
    return tuple(1 if model[v - 1] else 0 for v in range(lo, hi + 1))


def decode_model(model: Sequence[bool], meta: InstanceMeta) -> dict:
    """Recover keys, per-cycle states, and leakage counts from a model."""
    out: dict = {
        "key_a": decode_bits(model, *meta.ranges["key_a"]),
        "key_b": decode_bits(model, *meta.ranges["key_b"]),
        "states": {"a": {}, "b": {}},
    }
    for name, (lo, hi) in meta.ranges.items():
        if name.startswith("state_"):
            _, exe, cycle = name.split("_")
            out["states"][exe][int(cycle[1:])] = decode_bits(model, lo, hi)
    for exe in ("a", "b"):
        bits = [1 if model[v - 1] else 0 for v in meta.leak_counts[exe]]
        out[f"count_{exe}"] = sum(b << i for i, b in enumerate(bits))
    return out
