"""Command-line harness.

Exit codes: 0 success, 2 infeasible problem, 1 any other error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import cases, problem_io
from .oracle import grid_search, vertex_enumeration
from .power import InfeasibleError, InfeasibleInitialError, SolverFailureError


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for infeasibility
        raise CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="powergp",
                     description="Weighted-sum-rate power control experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the solver on a problem file")
    p_solve.add_argument("problem", help="path to a problem JSON file")
    p_solve.add_argument("--eps", type=float, default=1e-6,
                         help="power-move stopping threshold in watts")
    p_solve.add_argument("--out", default="powergp_out", help="output directory")

    p_c1 = sub.add_parser("case1", help="random-initialization benchmark")
    p_c1.add_argument("--inits", type=int, default=1000)
    p_c1.add_argument("--seed", type=int, default=0)
    p_c1.add_argument("--eps", type=float, default=1e-6)
    p_c1.add_argument("--workers", type=int, default=1)
    p_c1.add_argument("--points-per-dim", type=int, default=64)
    p_c1.add_argument("--out", default="powergp_out")

    p_c2 = sub.add_parser("case2", help="cellular aerial-user benchmark")
    p_c2.add_argument("--realizations", type=int, default=20)
    p_c2.add_argument("--mode", default="all",
                      choices=["all", "no-qos", "olpc-qos", "olpc-only"])
    p_c2.add_argument("--seed", type=int, default=0)
    p_c2.add_argument("--eps", type=float, default=1e-6)
    p_c2.add_argument("--workers", type=int, default=1)
    p_c2.add_argument("--config", help="scenario config JSON")
    p_c2.add_argument("--out", default="powergp_out")

    p_or = sub.add_parser("oracle", help="brute-force reference on a problem file")
    p_or.add_argument("problem")
    p_or.add_argument("--method", choices=["grid", "vertex"], default="grid")
    p_or.add_argument("--points", type=int, default=64, help="grid points per dim")
    p_or.add_argument("--out", default="powergp_out")

    p_sc = sub.add_parser("scenario", help="scenario utilities")
    sc_sub = p_sc.add_subparsers(dest="scenario_command", required=True)
    p_exp = sc_sub.add_parser("export", help="generate and export one drop")
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--config", help="scenario config JSON")
    p_exp.add_argument("--out", default="powergp_out")

    return parser


def _cmd_solve(args) -> int:
    report = cases.solve_file(args.problem, out_dir=args.out, eps=args.eps)
    final = report.trajectory[-1][1]
    print(f"converged={report.converged} iterations={report.iterations} "
          f"weighted_sum_rate={final:.6f} bit/s/Hz")
    print(f"wrote {args.out}/trajectory.csv and {args.out}/allocation.csv")
    return 0


def _cmd_case1(args) -> int:
    summary = cases.run_case1(inits=args.inits, seed=args.seed, eps=args.eps,
                              points_per_dim=args.points_per_dim,
                              workers=args.workers, out_dir=args.out)
    print(f"reference objective {summary.oracle.objective:.6f} bit/s/Hz "
          f"({summary.oracle.description})")
    print(f"best objective      {summary.best_objective:.6f} bit/s/Hz")
    print(f"success fraction    {summary.success_fraction:.3f} over {args.inits} runs")
    print(f"wrote {args.out}/case1_runs.csv and {args.out}/case1_summary.csv")
    return 0


def _cmd_case2(args) -> int:
    cfg = problem_io.load_config(args.config) if args.config else None
    summary = cases.run_case2(realizations=args.realizations, mode=args.mode,
                              seed=args.seed, eps=args.eps, workers=args.workers,
                              config=cfg, out_dir=args.out)
    for m in summary.modes:
        print(f"mean rate [{m}]: {summary.mean_rate(m):.6f} bit/s/Hz")
    if summary.skipped_count:
        print(f"skipped {summary.skipped_count} infeasible realization(s)")
    print(f"wrote {args.out}/case2_realizations.csv and {args.out}/case2_uav_rates.csv")
    if summary.skipped_count == len(summary.realizations):
        return 2
    return 0


def _cmd_oracle(args) -> int:
    prob = problem_io.load_problem(args.problem)
    if args.method == "grid":
        result = grid_search(prob, args.points)
    else:
        result = vertex_enumeration(prob)
    problem_io.write_csv(
        f"{args.out}/oracle.csv", "oracle-result",
        ["method", "objective_bit_s_hz", "evaluations"]
        + [f"p{i}_watts" for i in range(prob.n_links)],
        [[result.description, result.objective, result.evaluations]
         + [float(v) for v in result.p_best]],
    )
    print(f"{result.description}: objective {result.objective:.6f} bit/s/Hz "
          f"({result.evaluations} evaluations)")
    return 0


def _cmd_scenario(args) -> int:
    if args.scenario_command == "export":
        cfg = problem_io.load_config(args.config) if args.config else None
        scenario, _, path = cases.export_scenario(seed=args.seed, config=cfg,
                                                  out_dir=args.out)
        print(f"exported {scenario.cell_count}-link problem to {path}")
        return 0
    raise CliError(f"unknown scenario command {args.scenario_command!r}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handlers = {
            "solve": _cmd_solve,
            "case1": _cmd_case1,
            "case2": _cmd_case2,
            "oracle": _cmd_oracle,
            "scenario": _cmd_scenario,
        }
        return handlers[args.command](args)
    except (InfeasibleError, InfeasibleInitialError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except SolverFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except (CliError, problem_io.ProblemFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
