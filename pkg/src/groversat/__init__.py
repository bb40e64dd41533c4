"""CDCL SAT solving with simulated Grover guidance on conflict-local subformulas."""

from .dimacs import Cnf, cnf_from_clauses, eval_assignment, parse_dimacs, write_dimacs
from .cdcl import SolveResult, Solver, SolverConfig, Stats, Status, check_model, solve
from .extract import ExtractionConfig, SubFormula, extract_subformula, simplify_under_trail
from .grover import GroverConfig, GroverOutcome, bbht_search, success_probability
from .hybrid import CallRecord, HybridConfig, solve_hybrid
from .scagen import InstanceMeta, LeakageRelation, ScaConfig, generate_instance

__all__ = [
    "CallRecord",
    "Cnf",
    "ExtractionConfig",
    "GroverConfig",
    "GroverOutcome",
    "HybridConfig",
    "InstanceMeta",
    "LeakageRelation",
    "ScaConfig",
    "SolveResult",
    "Solver",
    "SolverConfig",
    "Stats",
    "Status",
    "SubFormula",
    "bbht_search",
    "check_model",
    "cnf_from_clauses",
    "eval_assignment",
    "extract_subformula",
    "generate_instance",
    "parse_dimacs",
    "simplify_under_trail",
    "solve",
    "solve_hybrid",
    "success_probability",
    "write_dimacs",
]
