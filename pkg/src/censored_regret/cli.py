from __future__ import annotations

import argparse
import asyncio
import sys
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

from censored_regret.config import settings
from censored_regret.core import CostParameters, GridSpec
from censored_regret.design.exploration import solve_design
from censored_regret.errors import CensoredRegretError, InvalidParameterError
from censored_regret.experiments import (
    SweepConfig,
    assemble_sweep,
    evaluate_sample_complexity,
    evaluate_sweep_task,
    psi_table,
    sample_complexity_header,
    sample_complexity_target,
    sweep_header,
    sweep_tasks,
    write_csv,
    x_grid,
)
from censored_regret.literals import format_distribution, parse_design, parse_distribution, parse_samples
from censored_regret.oracle import exact_expected_regret, mc_expected_regret
from censored_regret.policies import Policy, bsaa_decide, km_cdf, km_decide
from censored_regret.regret.bsaa import worst_case_regret_bsaa
from censored_regret.regret.km import worst_case_regret_km
from censored_regret.telemetry import setup_telemetry

EXIT_IO = 4


def _costs(args: argparse.Namespace) -> CostParameters:
    if args.q is not None:
        if args.cu is not None or args.co is not None:
            raise InvalidParameterError("--q cannot be combined with --cu or --co")
        return CostParameters.normalized(args.q)
    if args.cu is None or args.co is None:
        raise InvalidParameterError("give either --q or both --cu and --co")
    return CostParameters(args.cu, args.co)


def _add_costs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cu", type=float, default=None, help="Underage cost per unit")
    p.add_argument("--co", type=float, default=None, help="Overage cost per unit")
    p.add_argument("--q", type=float, default=None, help="Critical fractile (sets c_u=q, c_o=1-q)")


def _ensure_writable(path: str) -> None:
    # fail fast before a long computation
    Path(path).open("a", encoding="utf-8").close()


def _num(value: float) -> str:
    return format(value, ".17g")


async def _gather(fn: Callable[..., Any], calls: Sequence[tuple], workers: int) -> list[Any]:
    loop = asyncio.get_running_loop()
    executor: Executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else ThreadPoolExecutor(max_workers=1)
    with executor:
        futures = [loop.run_in_executor(executor, fn, *call) for call in calls]
        return list(await asyncio.gather(*futures))


async def _cmd_regret(args: argparse.Namespace) -> int:
    design = parse_design(args.design)
    cp = _costs(args)
    if args.policy == Policy.BSAA:
        cert = worst_case_regret_bsaa(design, cp, args.tol)
    else:
        cert = worst_case_regret_km(design, cp, GridSpec.uniform(args.mesh))

    print("\n=== WORST-CASE REGRET ===\n")
    print(f"policy: {cert.policy}")
    print(f"value: {_num(cert.value)}")
    print(f"grid_error_bound: {_num(cert.grid_error_bound)}")
    if cert.piece_index is not None:
        print(f"piece_index: {cert.piece_index}")
        print(f"v_star: {_num(cert.v_star)}")
        print(f"w_star: {_num(cert.w_star)}")
    if cert.point is not None:
        print("monotone_point: " + ",".join(f"{c:.12g}" for c in cert.point.chain()))
    print(f"witness: {format_distribution(cert.witness)}")
    return 0


async def _cmd_sweep(args: argparse.Namespace) -> int:
    config = SweepConfig(
        policy=Policy(args.policy),
        xs=tuple(args.x),
        q=args.q,
        m_values=tuple(args.m),
        n_values=tuple(range(args.n_min, args.n_max + 1)),
        tol=args.tol,
        km_mesh=args.mesh,
        full_info=not args.no_full_info,
    )
    _ensure_writable(args.output)
    tasks = sweep_tasks(config)
    values = await _gather(evaluate_sweep_task, [(t,) for t in tasks], args.workers)
    write_csv(args.output, sweep_header(config), assemble_sweep(config, values))
    print(f"[csv] {args.output}")
    return 0


async def _cmd_sample_complexity(args: argparse.Namespace) -> int:
    target = sample_complexity_target(args.q, args.target_frac)
    xs = args.x if args.x else x_grid(args.x_min, args.x_max, args.x_step)
    if args.m < 0:
        raise InvalidParameterError(f"--m must be nonnegative, got {args.m!r}")
    if args.rtol < 0:
        raise InvalidParameterError(f"--rtol must be nonnegative, got {args.rtol!r}")
    _ensure_writable(args.output)
    calls = [(x, args.q, target, args.n_cap, args.mesh, args.m, args.rtol) for x in xs]
    values = await _gather(evaluate_sample_complexity, calls, args.workers)
    rows = [[x, v] for x, v in zip(xs, values)]
    write_csv(args.output, sample_complexity_header(args.q, args.target_frac), rows)
    print(f"[csv] {args.output}")
    return 0


async def _cmd_design_opt(args: argparse.Namespace) -> int:
    result = solve_design(args.budget, args.q, args.eps, n_max_cap=args.n_max_cap)
    print("\n=== EXPLORATORY DESIGN ===\n")
    print(f"budget: {result.budget}")
    print(f"n_star: {result.n_star}")
    print("levels: " + ",".join(f"{x:.12g}" for x in result.levels))
    print(f"value: {_num(result.value)}")
    print(f"u_bar: {_num(result.u_bar)}")
    print(f"n_max: {result.n_max}")
    return 0


async def _cmd_oracle(args: argparse.Namespace) -> int:
    design = parse_design(args.design)
    F = parse_distribution(args.dist)
    cp = _costs(args)
    if args.mode == "exact":
        est = exact_expected_regret(args.policy, design, F, cp)
    else:
        est = mc_expected_regret(args.policy, design, F, cp, args.trials, args.seed)
    print("\n=== EXPECTED REGRET ===\n")
    print(f"mean: {_num(est.mean)}")
    print(f"std_error: {_num(est.std_error)}")
    print(f"mode: {est.mode}")
    print(f"trials: {est.trials}")
    return 0


async def _cmd_decide(args: argparse.Namespace) -> int:
    samples = parse_samples(args.samples)
    if not 0.0 < args.q < 1.0:
        raise InvalidParameterError(f"critical fractile must lie in (0, 1), got {args.q!r}")
    print("\n=== DECISIONS ===\n")
    print(f"bsaa: {_num(bsaa_decide(samples, args.q))}")
    print(f"km: {_num(km_decide(samples, args.q))}")
    print(f"km_cdf: {format_distribution(km_cdf(samples).cdf)}")
    return 0


async def _cmd_psi(args: argparse.Namespace) -> int:
    design = parse_design(args.design)
    header, rows = psi_table(design, CostParameters.normalized(args.q).q, args.points)
    write_csv(args.output, header, rows)
    print(f"[csv] {args.output}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="censored-regret",
        description="Worst-case regret of offline newsvendor policies under demand censoring",
    )
    parser.add_argument("--log-level", default=None, help="Overrides CENSORED_REGRET_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)
    policies = [p.value for p in Policy]

    p = sub.add_parser("regret", help="Worst-case regret certificate for one design")
    p.add_argument("--design", required=True, help="Design literal, e.g. 0.7:90,1.0:10")
    p.add_argument("--policy", choices=policies, default=Policy.BSAA.value)
    _add_costs(p)
    p.add_argument("--tol", type=float, default=settings.bsaa_tol, help="BSAA grid tolerance")
    p.add_argument("--mesh", type=float, default=settings.km_mesh, help="KM lattice mesh")
    p.set_defaults(handler=_cmd_regret)

    p = sub.add_parser("sweep", help="Worst-case regret over n for (n-m at x, m at 1) designs")
    p.add_argument("--policy", choices=policies, default=Policy.KM.value)
    p.add_argument("--x", type=float, nargs="+", required=True)
    p.add_argument("--q", type=float, default=0.8)
    p.add_argument("--m", type=int, nargs="+", default=[0, 1, 2, 5, 10])
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--tol", type=float, default=settings.bsaa_tol)
    p.add_argument("--mesh", type=float, default=settings.km_mesh)
    p.add_argument("--no-full-info", action="store_true", help="Skip the uncensored benchmark column")
    p.add_argument("--workers", type=int, default=settings.workers)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("sample-complexity", help="Smallest n meeting a regret target, per level x")
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--target-frac", type=float, default=0.25, help="Fraction of q(1-q)")
    p.add_argument("--x", type=float, nargs="+", default=None)
    p.add_argument("--x-min", type=float, default=0.70)
    p.add_argument("--x-max", type=float, default=0.95)
    p.add_argument("--x-step", type=float, default=0.01)
    p.add_argument("--n-cap", type=int, default=1000)
    p.add_argument("--m", type=int, default=0, help="Uncensored samples at level 1 inside each n")
    p.add_argument("--rtol", type=float, default=settings.sample_complexity_rtol, help="Relative slack on the target")
    p.add_argument("--mesh", type=float, default=settings.km_mesh)
    p.add_argument("--workers", type=int, default=settings.workers)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=_cmd_sample_complexity)

    p = sub.add_parser("design-opt", help="eps-optimal exploratory design for BSAA under a budget")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.02)
    p.add_argument("--n-max-cap", type=int, default=settings.n_max_cap)
    p.set_defaults(handler=_cmd_design_opt)

    p = sub.add_parser("oracle", help="Expected regret of a policy under one distribution")
    p.add_argument("--policy", choices=policies, default=Policy.BSAA.value)
    p.add_argument("--design", required=True)
    p.add_argument("--dist", required=True, help="Distribution literal, e.g. 0:0.3,0.7:0.4,1:0.3")
    _add_costs(p)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser("decide", help="Run both policies on a censored sample set")
    p.add_argument("--samples", required=True, help="Sample literal, e.g. 0.7|0.3u,0.7;1.0|0.2u")
    p.add_argument("--q", type=float, required=True)
    p.set_defaults(handler=_cmd_decide)

    p = sub.add_parser("psi", help="Per-piece BSAA kernels Psi_k on a grid")
    p.add_argument("--design", required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=_cmd_psi)

    return parser


async def _main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    setup_telemetry(args.log_level)

    try:
        return await args.handler(args)
    except CensoredRegretError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(asyncio.run(_main()))


if __name__ == "__main__":
    main()
