"""Command-line driver.

Exit codes: 0 success, 1 check failure, 2 parameter error, 3 capacity error.
The BELLTENSOR_SEED environment variable overrides the default seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .errors import (
    BisectionError,
    CapacityError,
    NumericalIntegrityError,
    ParameterError,
    PostselectionError,
)
from .frames import (
    OptimizerConfig,
    maximize_criterion,
    maximize_sum_squares,
    result_to_json_dict,
)
from .functionals import (
    CorrelationTable,
    optimize_settings_full,
    result_to_json_dict as bell_json,
    wwzb,
)
from .oracle import enumerate_inequalities, lhv_member, write_catalog_csv
from .reproduce import CHECKS, format_results, run_reproduction
from .scan import ScanConfig, bisect_threshold, run_scan, scan_csv_lines, write_scan_csv
from .states import (
    GhzParams,
    analytic_ghz_tensor,
    correlation_tensor,
    density_of,
    index_to_digits,
    make_ghz,
    tensor_to_json_dict,
)
from .version import __version__

DEFAULT_SEED = 1


def _env_seed() -> int:
    raw = os.environ.get("BELLTENSOR_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ParameterError(f"BELLTENSOR_SEED must be an integer, got {raw!r}") from exc


def _add_optimizer_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="optimizer seed")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-9)


def _optimizer(args) -> OptimizerConfig:
    seed = args.seed if args.seed is not None else _env_seed()
    return OptimizerConfig(restarts=args.restarts, tolerance=args.tol, seed=seed)


def _add_alpha_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha", type=float, help="mixing angle in radians")
    g.add_argument("--alpha-deg", type=float, help="mixing angle in degrees")


def _alpha(args) -> float:
    if args.alpha is not None:
        return args.alpha
    return math.radians(args.alpha_deg)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_tensor(args) -> int:
    params = GhzParams(args.n, _alpha(args))
    if args.source == "analytic":
        t = analytic_ghz_tensor(params)
    else:
        t = correlation_tensor(density_of(make_ghz(params)))
    if args.format == "json":
        _emit(json.dumps(tensor_to_json_dict(t)), args.out)
    else:
        lines = ["index_base4,value"]
        for i, v in enumerate(t.entries):
            digits = "".join(str(d) for d in index_to_digits(i, t.n))
            lines.append(f"{digits},{v:.12g}")
        _emit("\n".join(lines), args.out)
    return 0


def cmd_criterion(args) -> int:
    t = analytic_ghz_tensor(GhzParams(args.n, _alpha(args)))
    run = maximize_criterion if args.mode == "criterion" else maximize_sum_squares
    res = run(t, _optimizer(args))
    payload = json.dumps(result_to_json_dict(res), indent=2)
    _emit(payload, args.out)
    if args.out:
        print(f"{args.mode}: value {res.value:.9f} violated={res.violated} "
              f"certified={res.certified}")
    return 0


def cmd_bell(args) -> int:
    state = make_ghz(GhzParams(args.n, _alpha(args)))
    res, agreeing = optimize_settings_full(state, args.mode, _optimizer(args))
    obj = bell_json(res)
    obj["restarts_agreeing"] = agreeing
    _emit(json.dumps(obj, indent=2), args.out)
    if args.out:
        print(f"{res.functional}: value {res.value:.9f} bound {res.local_bound:g} "
              f"violated={res.violated}")
    return 0


def cmd_oracle(args) -> int:
    if args.table:
        obj = json.loads(Path(args.table).read_text(encoding="utf-8"))
        table = CorrelationTable(int(obj["n"]), obj["values"])
        member = lhv_member(table)
        print(json.dumps({"n": table.n, "lhv_member": member, "wwzb": wwzb(table)}))
        return 0
    records = enumerate_inequalities(args.n)
    if args.out:
        write_catalog_csv(records, args.out)
        print(f"wrote {len(records)} inequalities to {args.out}")
    else:
        from .oracle import catalog_csv_lines

        print("\n".join(catalog_csv_lines(records)))
    return 0


def cmd_scan(args) -> int:
    config = ScanConfig(
        n=args.n,
        alpha_start=args.alpha_start,
        alpha_stop=args.alpha_stop,
        points=args.points,
        mode=args.mode,
        optimizer=_optimizer(args),
        output_path=args.out,
    )
    report = run_scan(config, jobs=args.jobs)
    if args.out:
        print(f"wrote {len(report.rows)} rows to {args.out}")
        if not args.no_plot:
            from .plotting import render_scan_figure

            fig_path = Path(args.out).with_suffix(".png")
            render_scan_figure(report, fig_path)
            print(f"wrote figure to {fig_path}")
    else:
        print("\n".join(scan_csv_lines(report, timestamp=False)))
    return 0


def cmd_bisect(args) -> int:
    alpha_star = bisect_threshold(args.n, _optimizer(args))
    payload = {
        "n": args.n,
        "alpha_star": alpha_star,
        "sin_2alpha_star": math.sin(2 * alpha_star),
    }
    _emit(json.dumps(payload, indent=2), args.out)
    if args.out:
        print(f"alpha* = {alpha_star:.6f} rad, sin 2a* = {math.sin(2*alpha_star):.4f}")
    return 0


def cmd_reproduce(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    code, results = run_reproduction(only=args.only or None, seed=seed,
                                     restarts=args.restarts)
    print(format_results(results))
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="belltensor",
        description="Two-setting full-correlation Bell inequality toolkit for "
                    "generalized GHZ states.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tensor", help="emit a correlation tensor")
    p.add_argument("--n", type=int, required=True)
    _add_alpha_args(p)
    p.add_argument("--source", choices=("analytic", "numeric"), default="analytic")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("criterion", help="maximize a plane-sector criterion")
    p.add_argument("--n", type=int, required=True)
    _add_alpha_args(p)
    p.add_argument("--mode", choices=("criterion", "sum-squares"), default="criterion")
    _add_optimizer_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_criterion)

    p = sub.add_parser("bell", help="optimize a Bell functional over settings")
    p.add_argument("--n", type=int, required=True)
    _add_alpha_args(p)
    p.add_argument("--mode", choices=("chsh", "mabk", "wwzb", "cond-chsh"),
                   default="mabk")
    _add_optimizer_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("oracle", help="export the inequality catalog or test a table")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--out")
    p.add_argument("--table", help="JSON file {n, values} to test for LHV membership")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("scan", help="sweep the mixing angle")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("criterion", "sum-squares", "mabk", "wwzb",
                                      "cond-chsh"), default="criterion")
    p.add_argument("--alpha-start", type=float, default=0.0)
    p.add_argument("--alpha-stop", type=float, default=math.pi / 4)
    p.add_argument("--points", type=int, default=20)
    _add_optimizer_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--no-plot", action="store_true",
                   help="skip the figure next to the CSV")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("bisect", help="locate the odd-n violation threshold")
    p.add_argument("--n", type=int, required=True)
    _add_optimizer_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bisect)

    p = sub.add_parser("reproduce", help="re-run the headline-claim checks")
    p.add_argument("--only", action="append", choices=sorted(CHECKS),
                   help="run a single named check (repeatable)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--restarts", type=int, default=16)
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except (BisectionError, NumericalIntegrityError, PostselectionError) as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
