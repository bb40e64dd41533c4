"""CNF data model, DIMACS parsing/serialization, and assignment evaluation.

Literals are signed integers in DIMACS style: variable indices start at 1,
a negative integer denotes the negated variable.  Clauses are tuples of
literals; a formula is an immutable `Cnf` value shared by the solver, the
subformula extractor, and the instance generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class DimacsError(ValueError):
    """Malformed DIMACS input; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def normalize_clause(lits: Iterable[int]) -> tuple[int, ...]:
    """Drop duplicate literals, preserving first-occurrence order."""
    seen: set[int] = set()
    out: list[int] = []
    for lit in lits:
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def is_tautology(clause: Sequence[int]) -> bool:
    """A clause containing both a literal and its negation is always true."""
    lits = set(clause)
    return any(-lit in lits for lit in lits)


@dataclass(frozen=True)
class Cnf:
    """A CNF formula over variables 1..num_vars."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def max_var(self) -> int:
        return max((abs(l) for cl in self.clauses for l in cl), default=0)


def cnf_from_clauses(num_vars: int, clauses: Iterable[Iterable[int]]) -> Cnf:
    """Build a Cnf, deduplicating literals within each clause."""
    cls = tuple(normalize_clause(cl) for cl in clauses)
    cnf = Cnf(num_vars, cls)
    if cnf.max_var() > num_vars:
        raise ValueError(
            f"literal references variable {cnf.max_var()} > num_vars={num_vars}"
        )
    return cnf


def parse_dimacs(text: str) -> Cnf:
    """Parse DIMACS CNF text into a Cnf.

    Comment lines (`c ...`), blank lines, and the `%`/`0` footer used by some
    benchmark archives are tolerated.  Clauses may span lines; each clause is
    terminated by a 0.  Duplicate literals within a clause are dropped;
    tautological clauses are kept (query with `is_tautology`).
    """
    num_vars = -1
    num_clauses = -1
    header_line = 0
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    done = False
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            done = True  # classic SATLIB footer: "%" then a lone "0"
            continue
        if done:
            if line != "0":
                raise DimacsError("content after '%' footer", lineno)
            continue
        if line.startswith("p"):
            if num_vars >= 0:
                raise DimacsError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError("negative counts in header", lineno)
            header_line = lineno
            continue
        if num_vars < 0:
            raise DimacsError("clause data before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"non-integer token {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(normalize_clause(current))
                current.clear()
            else:
                if abs(lit) > num_vars:
                    raise DimacsError(
                        f"variable {abs(lit)} exceeds header count {num_vars}", lineno
                    )
                current.append(lit)

    if num_vars < 0:
        raise DimacsError("missing 'p cnf' header", last_line or 1)
    if current:
        raise DimacsError("unterminated clause at end of input", last_line)
    if len(clauses) != num_clauses:
        raise DimacsError(
            f"header promises {num_clauses} clauses, found {len(clauses)}",
            header_line,
        )
    return Cnf(num_vars, tuple(clauses))


def write_dimacs(cnf: Cnf) -> str:
    """Serialize deterministically: stored clause/literal order, `0` terminators."""
    lines = [f"p cnf {cnf.num_vars} {cnf.num_clauses}"]
    for clause in cnf.clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"


def eval_assignment(cnf: Cnf, assignment: Sequence[bool]) -> tuple[bool, float]:
    """Evaluate a full assignment; returns (satisfied, violated clause fraction).

    `assignment[i]` is the value of variable i+1.  A clause is violated when
    every literal is false; the empty formula evaluates to (True, 0.0).
    """
    if len(assignment) != cnf.num_vars:
        raise ValueError(
            f"assignment length {len(assignment)} != num_vars {cnf.num_vars}"
        )
    if not cnf.clauses:
        return True, 0.0
    violated = 0
    for clause in cnf.clauses:
        for lit in clause:
            if assignment[abs(lit) - 1] == (lit > 0):
                break
        else:
            violated += 1
    return violated == 0, violated / len(cnf.clauses)
