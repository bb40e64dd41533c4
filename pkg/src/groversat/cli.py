"""Command-line surface: instance generation, solving, and parameter sweeps.

Exit codes follow the DIMACS solver convention: 10 for SAT, 20 for UNSAT,
0 for non-solve commands (and UNKNOWN results), 1 for errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import statistics
import sys
from dataclasses import dataclass

from .cdcl import SolverConfig, Status, solve as cdcl_solve
from .dimacs import DimacsError, parse_dimacs, write_dimacs
from .extract import STRATEGY_ALIASES, ExtractionConfig
from .grover import GroverConfig
from .hybrid import CallRecord, HybridConfig, solve_hybrid
from .scagen import LeakageRelation, ScaConfig, generate_instance

RUN_CSV_HEADER = (
    "instance,mode,seed,n,m,restarts,conflicts,decisions,propagations,"
    "grover_calls,grover_iters,wall_time_s,result"
)
CALL_CSV_HEADER = "call_idx,conflict_index,n_sub,m_sub,q,attempts,iterations,polarity_applied"


@dataclass
class RunRow:
    instance: str
    mode: str
    seed: int
    n: int
    m: int
    restarts: int
    conflicts: int
    decisions: int
    propagations: int
    grover_calls: int
    grover_iters: int
    wall_time_s: float
    result: str

    def to_csv(self) -> str:
        return (
            f"{self.instance},{self.mode},{self.seed},{self.n},{self.m},"
            f"{self.restarts},{self.conflicts},{self.decisions},{self.propagations},"
            f"{self.grover_calls},{self.grover_iters},{self.wall_time_s:.6f},{self.result}"
        )


def _append_csv(path: str, header: str, rows: list[str]) -> None:
    need_header = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8") as fh:
        if need_header:
            fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


# ----------------------------------------------------------------------
# generate

def _parse_plaintext(spec: str, width: int) -> tuple[int, ...]:
    if spec == "ones":
        return (1,) * width
    if spec == "one":
        return (0,) * (width - 1) + (1,)
    if len(spec) == width and set(spec) <= {"0", "1"}:
        return tuple(int(c) for c in spec)
    raise ValueError(f"plaintext must be 'ones', 'one', or a {width}-bit 0/1 string")


def _parse_fixed_bits(spec: str | None) -> dict[int, bool] | None:
    if not spec:
        return None
    out: dict[int, bool] = {}
    for part in spec.split(","):
        idx, _, val = part.partition(":")
        out[int(idx)] = val.strip() == "1"
    return out


def _sca_config(args: argparse.Namespace) -> ScaConfig:
    return ScaConfig(
        width=args.width,
        cycles=args.cycles,
        substitution_on=args.subst,
        fixed_key_bits=_parse_fixed_bits(args.fixed_key_bits),
        leakage_relation=LeakageRelation(args.relation),
        check_cycle=args.check_cycle,
        plaintext=_parse_plaintext(args.plaintext, args.width),
    )


def cmd_generate(args: argparse.Namespace) -> int:
    cnf, meta = generate_instance(_sca_config(args))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(write_dimacs(cnf))
    if args.meta:
        with open(args.meta, "w", encoding="utf-8") as fh:
            meta.to_json(fh)
    print(f"c wrote {args.out}: n={cnf.num_vars} m={cnf.num_clauses}")
    return 0


# ----------------------------------------------------------------------
# solve

def _hybrid_config(args: argparse.Namespace, seed: int) -> HybridConfig:
    return HybridConfig(
        grover_interval=args.interval,
        max_grover_calls=args.max_calls,
        budget=args.budget,
        eta0=args.eta0,
        polarity_q_threshold=args.polarity_threshold,
        solver=SolverConfig(random_seed=seed, max_conflicts=args.max_conflicts),
        extraction=ExtractionConfig(budget=args.budget, strategy=args.strategy),
        grover=GroverConfig(
            shots=args.shots,
            noise_epsilon=args.noise,
            top_k=args.top_k,
            rng_seed=seed,
        ),
        histogram_dir=args.dump_histograms,
    )


def run_one(path: str, mode: str, seed: int, args: argparse.Namespace) -> tuple[RunRow, list[CallRecord]]:
    with open(path, "r", encoding="utf-8") as fh:
        cnf = parse_dimacs(fh.read())
    calls: list[CallRecord] = []
    if mode == "cdcl":
        result = cdcl_solve(cnf, SolverConfig(random_seed=seed, max_conflicts=args.max_conflicts))
    else:
        result, calls = solve_hybrid(cnf, _hybrid_config(args, seed))
    stats = result.stats
    row = RunRow(
        instance=path,
        mode=mode,
        seed=seed,
        n=cnf.num_vars,
        m=cnf.num_clauses,
        restarts=stats.restarts,
        conflicts=stats.conflicts,
        decisions=stats.decisions,
        propagations=stats.propagations,
        grover_calls=stats.grover_calls,
        grover_iters=sum(rec.total_iterations for rec in calls),
        wall_time_s=stats.wall_time,
        result=result.status.value,
    )
    return row, calls


def cmd_solve(args: argparse.Namespace) -> int:
    row, calls = run_one(args.input, args.mode, args.seed, args)
    print(RUN_CSV_HEADER)
    print(row.to_csv())
    if args.stats_out:
        _append_csv(args.stats_out, RUN_CSV_HEADER, [row.to_csv()])
    if args.calls_out and args.mode == "qgcl":
        lines = [
            f"{i},{c.conflict_index},{c.n_sub},{c.m_sub},{c.q:.6f},"
            f"{c.attempts_used},{c.total_iterations},{int(c.applied_polarity)}"
            for i, c in enumerate(calls)
        ]
        _append_csv(args.calls_out, CALL_CSV_HEADER, lines)
    if row.result == "SAT":
        print("s SATISFIABLE")
        return 10
    if row.result == "UNSAT":
        print("s UNSATISFIABLE")
        return 20
    print("s UNKNOWN")
    return 0


# ----------------------------------------------------------------------
# sweep

def _sweep_worker(spec: tuple) -> RunRow:
    path, mode, seed, args = spec
    row, _ = run_one(path, mode, seed, args)
    return row


def _summary_stats(rows: list[RunRow]) -> dict[str, float | str]:
    def agg(values: list[float]) -> tuple[float, float | str]:
        mean = statistics.fmean(values)
        std = statistics.stdev(values) if len(values) > 1 else ""
        return mean, std

    out: dict[str, float | str] = {"runs": len(rows)}
    for name in ("restarts", "conflicts", "decisions", "propagations", "wall_time_s"):
        mean, std = agg([float(getattr(r, name)) for r in rows])
        key = "wall_time" if name == "wall_time_s" else name
        out[f"{key}_mean"] = mean
        out[f"{key}_std"] = std
    return out


SUMMARY_HEADER = (
    "param,value,mode,runs,restarts_mean,restarts_std,conflicts_mean,conflicts_std,"
    "decisions_mean,decisions_std,propagations_mean,propagations_std,"
    "wall_time_mean,wall_time_std"
)


def _summary_csv(param: str, value: str, mode: str, stats: dict) -> str:
    def fmt(x: float | str) -> str:
        return f"{x:.4f}" if isinstance(x, float) else str(x)

    cells = [param, value, mode, str(stats["runs"])]
    for name in ("restarts", "conflicts", "decisions", "propagations", "wall_time"):
        cells.append(fmt(stats[f"{name}_mean"]))
        cells.append(fmt(stats[f"{name}_std"]))
    return ",".join(cells)


def cmd_sweep(args: argparse.Namespace) -> int:
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ValueError("empty --values list")
    seeds = list(range(1, args.runs + 1))

    # Build the ordered run plan: (path, mode, seed, per-run args).
    plan: list[tuple] = []
    groups: list[tuple[str, str, str]] = []  # (value, mode, group key)
    if args.param == "cycles":
        os.makedirs(args.workdir, exist_ok=True)
        for value in values:
            gen_args = argparse.Namespace(**vars(args))
            gen_args.cycles = int(value)
            gen_args.check_cycle = None
            path = os.path.join(args.workdir, f"sweep_w{args.width}_t{value}.cnf")
            cnf, _ = generate_instance(_sca_config(gen_args))
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(write_dimacs(cnf))
            for mode in ("cdcl", "qgcl"):
                groups.append((value, mode, path))
                for seed in seeds:
                    plan.append((path, mode, seed, args))
    else:
        groups.append(("-", "cdcl", args.input))
        for seed in seeds:
            plan.append((args.input, "cdcl", seed, args))
        for value in values:
            run_args = argparse.Namespace(**vars(args))
            if args.param == "budget":
                run_args.budget = int(value)
            elif args.param == "max-calls":
                run_args.max_calls = int(value)
            else:  # strategy
                run_args.strategy = value
            groups.append((value, "qgcl", args.input))
            for seed in seeds:
                plan.append((args.input, "qgcl", seed, run_args))

    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_worker, plan))
    else:
        rows = [_sweep_worker(spec) for spec in plan]

    raw_lines = [row.to_csv() for row in rows]
    if args.out:
        _append_csv(args.out, RUN_CSV_HEADER, raw_lines)

    summary_lines = [SUMMARY_HEADER]
    offset = 0
    for value, mode, _path in groups:
        group_rows = rows[offset : offset + len(seeds)]
        offset += len(seeds)
        summary_lines.append(
            _summary_csv(args.param, value, mode, _summary_stats(group_rows))
        )
    for line in summary_lines:
        print(line)
    if args.summary_out:
        with open(args.summary_out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(summary_lines) + "\n")

    if args.gnuplot:
        print("# gnuplot data block: value conflicts_mean conflicts_std (qgcl rows)")
        for line in summary_lines[1:]:
            cells = line.split(",")
            if cells[2] == "qgcl":
                print(f"{cells[1]} {cells[6]} {cells[7] or 0}")
    return 0


# ----------------------------------------------------------------------
# argument wiring

def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--width", type=int, default=8, help="key/state bit width")
    p.add_argument("--cycles", type=int, default=2, help="update/leakage cycles")
    p.add_argument("--relation", choices=["eq", "neq"], default="neq")
    p.add_argument("--check-cycle", type=int, default=None, dest="check_cycle")
    p.add_argument("--subst", action=argparse.BooleanOptionalAction, default=True,
                   help="apply the nonlinear substitution layer")
    p.add_argument("--plaintext", default="ones",
                   help="'ones', 'one', or an explicit 0/1 string of the key width")
    p.add_argument("--fixed-key-bits", default=None, dest="fixed_key_bits",
                   help="comma list of index:value pairs fixed in both keys")


def _add_solve_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["cdcl", "qgcl"], default="cdcl")
    p.add_argument("--budget", type=int, default=20, help="cap on n_sub + m_sub")
    p.add_argument("--max-calls", type=int, default=15, dest="max_calls")
    p.add_argument("--interval", type=int, default=250,
                   help="conflicts between quantum call points")
    p.add_argument("--strategy", choices=sorted(STRATEGY_ALIASES), default="abfs")
    p.add_argument("--shots", type=int, default=2000)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--top-k", type=int, default=5, dest="top_k")
    p.add_argument("--eta0", type=float, default=0.5)
    p.add_argument("--polarity-threshold", type=float, default=0.1,
                   dest="polarity_threshold")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--max-conflicts", type=int, default=None, dest="max_conflicts")
    p.add_argument("--dump-histograms", default=None, dest="dump_histograms",
                   help="directory for per-call histogram CSV dumps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groversat",
        description="CDCL SAT solving with simulated Grover branching guidance",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a power-analysis proxy instance")
    _add_gen_flags(gen)
    gen.add_argument("--out", required=True, help="DIMACS output path")
    gen.add_argument("--meta", default=None, help="JSON metadata sidecar path")
    gen.set_defaults(func=cmd_generate)

    slv = sub.add_parser("solve", help="solve a DIMACS instance")
    slv.add_argument("input", help="DIMACS CNF path")
    _add_solve_flags(slv)
    slv.add_argument("--stats-out", default=None, dest="stats_out",
                     help="append the run row to this CSV")
    slv.add_argument("--calls-out", default=None, dest="calls_out",
                     help="append per-call records to this CSV (qgcl mode)")
    slv.set_defaults(func=cmd_solve)

    swp = sub.add_parser("sweep", help="repeat-seeded parameter sweep")
    swp.add_argument("--param", choices=["budget", "max-calls", "strategy", "cycles"],
                     required=True)
    swp.add_argument("--values", required=True, help="comma-separated values")
    swp.add_argument("--runs", type=int, default=10, help="seeds 1..R per setting")
    swp.add_argument("--input", default=None, help="instance (non-cycles sweeps)")
    swp.add_argument("--workdir", default="sweep_instances",
                     help="directory for generated instances (cycles sweep)")
    swp.add_argument("--out", default=None, help="raw per-run CSV path")
    swp.add_argument("--summary-out", default=None, dest="summary_out")
    swp.add_argument("--gnuplot", action="store_true",
                     help="print a plot-ready data block")
    swp.add_argument("--jobs", type=int, default=1, help="parallel workers")
    _add_gen_flags(swp)
    _add_solve_flags(swp)
    swp.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and args.param != "cycles" and not args.input:
        parser.error("--input is required unless sweeping cycles")
    try:
        return args.func(args)
    except (OSError, ValueError, DimacsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
