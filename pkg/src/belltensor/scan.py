"""Parameter sweeps over the mixing angle and threshold bisection."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import BisectionError, ParameterError
from .frames import (
    VIOLATION_TOL,
    OptimizerConfig,
    maximize_criterion,
    maximize_sum_squares,
)
from .functionals import LOCAL_BOUNDS, optimize_settings_full
from .states import GhzParams, analytic_ghz_tensor, make_ghz
from .version import __version__

SCAN_MODES = ("criterion", "sum-squares", "mabk", "wwzb", "cond-chsh")


@dataclass(frozen=True)
class ScanConfig:
    n: int
    alpha_start: float
    alpha_stop: float
    points: int
    mode: str
    optimizer: OptimizerConfig
    output_path: str | None = None

    def __post_init__(self):
        if self.mode not in SCAN_MODES:
            raise ParameterError(f"mode must be one of {SCAN_MODES}, got {self.mode!r}")
        if not self.alpha_start < self.alpha_stop:
            raise ParameterError("alpha_start must be below alpha_stop")
        if self.points < 2:
            raise ParameterError("a scan needs at least 2 grid points")


@dataclass(frozen=True)
class ScanRow:
    alpha: float
    sin_2alpha: float
    value: float
    violated: bool
    certified: bool


@dataclass(frozen=True)
class ScanReport:
    mode: str
    n: int
    seed: int
    version: str
    rows: tuple[ScanRow, ...] = field(repr=False)


def _point_config(base: OptimizerConfig, index: int) -> OptimizerConfig:
    sub = int(np.random.SeedSequence([int(base.seed) & (2**63 - 1), index]).generate_state(1)[0])
    return OptimizerConfig(
        restarts=base.restarts,
        max_iterations=base.max_iterations,
        tolerance=base.tolerance,
        seed=sub,
    )


def _evaluate_point(config: ScanConfig, alpha: float, index: int) -> ScanRow:
    params = GhzParams(config.n, alpha)
    opt = _point_config(config.optimizer, index)
    if config.mode in ("criterion", "sum-squares"):
        t = analytic_ghz_tensor(params)
        run = maximize_criterion if config.mode == "criterion" else maximize_sum_squares
        res = run(t, opt)
        return ScanRow(alpha, params.sin_2alpha, res.value, res.violated, res.certified)
    state = make_ghz(params)
    label = {"mabk": "MABK", "wwzb": "WWZB", "cond-chsh": "COND-CHSH"}[config.mode]
    res, agreeing = optimize_settings_full(state, label, opt)
    violated = res.value > LOCAL_BOUNDS[label] + VIOLATION_TOL
    certified = agreeing >= math.ceil(0.9 * opt.restarts)
    return ScanRow(alpha, params.sin_2alpha, res.value, violated, certified)


def run_scan(config: ScanConfig, jobs: int = 1) -> ScanReport:
    """Evaluate the selected mode on an alpha grid; deterministic per seed.

    Grid points are independent; with jobs > 1 they run concurrently and the
    report rows keep grid order either way.
    """
    grid = np.linspace(config.alpha_start, config.alpha_stop, config.points)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(
                lambda i: _evaluate_point(config, float(grid[i]), i), range(config.points)
            ))
    else:
        rows = [_evaluate_point(config, float(grid[i]), i) for i in range(config.points)]
    report = ScanReport(
        mode=config.mode,
        n=config.n,
        seed=config.optimizer.seed,
        version=__version__,
        rows=tuple(rows),
    )
    if config.output_path:
        write_scan_csv(report, config.output_path)
    return report


def scan_csv_lines(report: ScanReport, timestamp: bool = True) -> list[str]:
    """CSV body is deterministic; the generated-at comment line is not."""
    lines = [
        f"# belltensor scan mode={report.mode} n={report.n} seed={report.seed} "
        f"version={report.version}",
    ]
    if timestamp:
        lines.append(f"# generated={datetime.now(timezone.utc).isoformat()}")
    lines.append("alpha_rad,sin_2alpha,value,violated,certified")
    for r in report.rows:
        lines.append(
            f"{r.alpha:.12g},{r.sin_2alpha:.12g},{r.value:.12g},"
            f"{int(r.violated)},{int(r.certified)}"
        )
    return lines


def write_scan_csv(report: ScanReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(scan_csv_lines(report)) + "\n")


def bisect_threshold(n: int, config: OptimizerConfig, angle_tol: float = 1e-4) -> float:
    """Mixing angle where the criterion maximum crosses 1, for odd n.

    Bisection on the violation predicate over [0, pi/4]; returns the crossing
    angle within angle_tol radians.
    """
    if n % 2 != 1 or not 3 <= n <= 7:
        raise ParameterError("threshold bisection is defined for odd n in 3..7")

    def violated(alpha: float) -> bool:
        t = analytic_ghz_tensor(GhzParams(n, alpha))
        return maximize_criterion(t, config).value > 1.0 + VIOLATION_TOL

    lo, hi = 0.0, math.pi / 4
    if violated(lo) or not violated(hi):
        raise BisectionError("no violation onset bracketed on [0, pi/4]")
    while hi - lo > angle_tol:
        mid = 0.5 * (lo + hi)
        if violated(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
