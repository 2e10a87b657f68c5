"""Headline-claim reproduction checks driven by the CLI.

Each check compares an achieved value against its expected one and reports
pass/fail.  One check is marked "xfail": the conditional CHSH with
spectators pinned to z cannot exceed its local bound for the generalized
GHZ family (every tensor component mixing the plane with z vanishes), so
the historically claimed violation is reproduced here through the primed
postselection route instead and the z-spectator variant is expected to sit
exactly at the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frames import (
    OptimizerConfig,
    even_violation_frames,
    maximize_criterion,
    maximize_sum_squares,
)
from .functionals import CorrelationTable, optimize_settings, wwzb
from .oracle import enumerate_inequalities, lhv_member
from .scan import bisect_threshold
from .states import (
    GhzParams,
    analytic_ghz_tensor,
    correlation_tensor,
    density_of,
    make_ghz,
    postselect_primed,
    reduce,
)

PASS, FAIL, XFAIL = "PASS", "FAIL", "XFAIL"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    achieved: str
    expected: str
    note: str = ""


def _cfg(seed: int, restarts: int, offset: int = 0) -> OptimizerConfig:
    return OptimizerConfig(restarts=restarts, seed=seed + offset)


def check_tensor_agreement(seed: int, restarts: int) -> CheckResult:
    worst = 0.0
    for n in range(2, 6):
        for alpha in np.linspace(0.0, math.pi / 4, 8):
            p = GhzParams(n, float(alpha))
            num = correlation_tensor(density_of(make_ghz(p)))
            ana = analytic_ghz_tensor(p)
            worst = max(worst, float(np.abs(num.entries - ana.entries).max()))
    ok = worst <= 1e-12
    return CheckResult("tensor-agreement", PASS if ok else FAIL,
                       f"max |diff| = {worst:.2e}", "<= 1e-12")


def check_even_witness(seed: int, restarts: int) -> CheckResult:
    worst = 0.0
    for n in (4, 6):
        for alpha in (math.pi / 32, math.pi / 16, math.pi / 8, math.pi / 4):
            w = even_violation_frames(GhzParams(n, alpha))
            expect = math.sqrt(1.0 + math.sin(2 * alpha) ** 2)
            worst = max(worst, abs(w.value - expect))
    t = analytic_ghz_tensor(GhzParams(4, math.pi / 8))
    res = maximize_criterion(t, _cfg(seed, restarts))
    target = math.sqrt(1.0 + math.sin(math.pi / 4) ** 2)
    ok = worst <= 1e-12 and res.value >= target - 1e-6
    return CheckResult("even-witness", PASS if ok else FAIL,
                       f"|value - formula| <= {worst:.2e}, search {res.value:.9f}",
                       f"formula within 1e-12, search >= {target:.9f} - 1e-6")


def check_odd_threshold(seed: int, restarts: int) -> CheckResult:
    a3 = bisect_threshold(3, _cfg(seed, restarts, 1))
    a5 = bisect_threshold(5, _cfg(seed, max(4, restarts // 2), 2))
    s3, s5 = math.sin(2 * a3), math.sin(2 * a5)
    ok = abs(s3 - 0.5) <= 1e-3 and abs(s5 - 0.25) <= 2e-3
    return CheckResult("odd-threshold", PASS if ok else FAIL,
                       f"sin 2a* = {s3:.4f} (n=3), {s5:.4f} (n=5)",
                       "0.500 +- 1e-3 and 0.250 +- 2e-3")


def check_gisin_curve(seed: int, restarts: int) -> CheckResult:
    worst = 0.0
    for alpha in np.linspace(0.02, math.pi / 4, 6):
        st = make_ghz(GhzParams(2, float(alpha)))
        res = optimize_settings(st, "CHSH", _cfg(seed, restarts, 3))
        expect = 2.0 * math.sqrt(1.0 + math.sin(2 * alpha) ** 2)
        worst = max(worst, abs(res.value - expect))
    ok = worst <= 1e-6
    return CheckResult("gisin-curve", PASS if ok else FAIL,
                       f"max |dev| = {worst:.2e}", "2 sqrt(1 + sin^2 2a) within 1e-6")


def check_mabk(seed: int, restarts: int) -> CheckResult:
    res_max = optimize_settings(make_ghz(GhzParams(3, math.pi / 4)), "MABK",
                                _cfg(seed, restarts, 4))
    below = optimize_settings(make_ghz(GhzParams(3, math.asin(0.45) / 2)), "MABK",
                              _cfg(seed, restarts, 5))
    crit = maximize_criterion(analytic_ghz_tensor(GhzParams(3, math.asin(0.45) / 2)),
                              _cfg(seed, restarts, 6))
    ok = abs(res_max.value - 4.0) <= 1e-6 and below.value <= 2.0 + 1e-6 \
        and crit.value <= 1.0 + 1e-6
    return CheckResult("mabk", PASS if ok else FAIL,
                       f"max {res_max.value:.9f}, below-threshold {below.value:.6f}, "
                       f"criterion {crit.value:.9f}",
                       "4 +- 1e-6, <= 2 + 1e-6, <= 1 + 1e-6")


def check_cond_chsh_z(seed: int, restarts: int) -> CheckResult:
    alpha = math.asin(0.1) / 2
    res = optimize_settings(make_ghz(GhzParams(4, alpha)), "COND-CHSH",
                            _cfg(seed, restarts, 7))
    claimed = 2.0 * math.sqrt(1.01)
    honest = abs(res.value - 2.0) <= 1e-6
    status = XFAIL if honest else FAIL
    return CheckResult("cond-chsh-z-spectators", status,
                       f"{res.value:.9f}",
                       f"claimed {claimed:.9f}; quantum value is exactly 2",
                       note="plane/z tensor components vanish, so z-spectator "
                            "CHSH cannot exceed its bound; see postselected-chsh")


def check_postselected_chsh(seed: int, restarts: int) -> CheckResult:
    alpha = math.asin(0.1) / 2
    pair = postselect_primed(make_ghz(GhzParams(4, alpha)), [3, 4], [0, 0])
    res = optimize_settings(pair, "CHSH", _cfg(seed, restarts, 8))
    mabk4 = optimize_settings(make_ghz(GhzParams(4, alpha)), "MABK",
                              _cfg(seed, restarts, 9))
    expect = 2.0 * math.sqrt(1.01)
    ok = abs(res.value - expect) <= 1e-6 and mabk4.value <= 2.0 + 1e-6
    return CheckResult("postselected-chsh", PASS if ok else FAIL,
                       f"pair CHSH {res.value:.9f}, MABK {mabk4.value:.6f}",
                       f"{expect:.9f} +- 1e-6 while MABK <= 2 + 1e-6")


def check_oracle(seed: int, restarts: int) -> CheckResult:
    counts_ok = len(enumerate_inequalities(2)) == 16 and len(enumerate_inequalities(3)) == 256
    rng = np.random.default_rng(seed + 10)
    disagree = 0
    for n in (2, 3):
        for _ in range(50):
            table = CorrelationTable(n, rng.uniform(-1.0, 1.0, size=(2,) * n))
            if lhv_member(table) != (wwzb(table) <= 1.0 + 1e-9):
                disagree += 1
    ok = counts_ok and disagree == 0
    return CheckResult("oracle-equivalence", PASS if ok else FAIL,
                       f"counts ok: {counts_ok}, disagreements: {disagree}",
                       "16/256 records, zero disagreements")


def check_postselection(seed: int, restarts: int) -> CheckResult:
    worst = 1.0
    for n in (3, 4, 5):
        alpha = 0.37
        st = make_ghz(GhzParams(n, alpha))
        pair = postselect_primed(st, range(3, n + 1), [0] * (n - 2))
        worst = min(worst, pair.fidelity(make_ghz(GhzParams(2, alpha))))
    ok = worst >= 1.0 - 1e-12
    return CheckResult("postselection", PASS if ok else FAIL,
                       f"min fidelity = {worst:.15f}", ">= 1 - 1e-12")


def check_separability(seed: int, restarts: int) -> CheckResult:
    worst = 0.0
    for n in (3, 4):
        rho = density_of(make_ghz(GhzParams(n, 0.31)))
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                pair = reduce(rho, {i, j})
                pt = pair.entries.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
                worst = min(worst, float(np.linalg.eigvalsh(pt)[0]))
    ok = worst >= -1e-12
    return CheckResult("separability", PASS if ok else FAIL,
                       f"min PT eigenvalue = {worst:.2e}", ">= -1e-12")


CHECKS = {
    "tensor-agreement": check_tensor_agreement,
    "even-witness": check_even_witness,
    "odd-threshold": check_odd_threshold,
    "gisin-curve": check_gisin_curve,
    "mabk": check_mabk,
    "cond-chsh-z-spectators": check_cond_chsh_z,
    "postselected-chsh": check_postselected_chsh,
    "oracle-equivalence": check_oracle,
    "postselection": check_postselection,
    "separability": check_separability,
}


def run_reproduction(only=None, seed: int = 1, restarts: int = 16):
    """Run the named checks (all by default); returns (exit_code, results)."""
    names = list(CHECKS) if not only else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        from .errors import ParameterError

        raise ParameterError(f"unknown checks {unknown}; choose from {sorted(CHECKS)}")
    results = [CHECKS[name](seed, restarts) for name in names]
    code = 1 if any(r.status == FAIL for r in results) else 0
    return code, results


def format_results(results) -> str:
    wname = max(len(r.name) for r in results)
    lines = []
    for r in results:
        lines.append(f"{r.name:<{wname}}  {r.status:<5}  achieved: {r.achieved}")
        lines.append(f"{'':<{wname}}         expected: {r.expected}")
        if r.note:
            lines.append(f"{'':<{wname}}         note: {r.note}")
    n_pass = sum(r.status == PASS for r in results)
    n_fail = sum(r.status == FAIL for r in results)
    n_xfail = sum(r.status == XFAIL for r in results)
    lines.append(f"{n_pass} passed, {n_fail} failed, {n_xfail} expected discrepancies")
    return "\n".join(lines)
