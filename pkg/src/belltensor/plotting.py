"""Figure rendering for scan reports (written next to the CSV output)."""

from __future__ import annotations

import math

from matplotlib.figure import Figure

from .scan import ScanReport

_BOUNDS = {"criterion": 1.0, "sum-squares": 1.0, "wwzb": 1.0, "mabk": 2.0, "cond-chsh": 2.0}

_YLABEL = {
    "criterion": "max modulus contraction",
    "sum-squares": "max xy-sector sum of squares",
    "mabk": "optimized MABK value",
    "wwzb": "optimized WWZB value",
    "cond-chsh": "optimized conditional CHSH value",
}


def render_scan_figure(report: ScanReport, path) -> None:
    """Value against sin(2 alpha) with the relevant classical bound."""
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.subplots()
    x = [r.sin_2alpha for r in report.rows]
    y = [r.value for r in report.rows]
    ax.plot(x, y, "o-", ms=3.5, lw=1.2, color="#1f4e79", label=f"n = {report.n}")

    bound = _BOUNDS[report.mode]
    ax.axhline(bound, color="0.35", lw=1.0, ls="--", label=f"classical bound {bound:g}")
    if report.mode in ("criterion", "sum-squares") and report.n % 2 == 1:
        thr = 1.0 / math.sqrt(2.0 ** (report.n - 1))
        ax.axvline(thr, color="#a33", lw=1.0, ls=":",
                   label=f"threshold sin 2a = {thr:.4g}")
    viol = [(xx, yy) for xx, yy, r in zip(x, y, report.rows) if r.violated]
    if viol:
        ax.plot([v[0] for v in viol], [v[1] for v in viol], "o", ms=5,
                mfc="none", mec="#a33", label="violation")

    ax.set_xlabel(r"$\sin 2\alpha$")
    ax.set_ylabel(_YLABEL[report.mode])
    ax.set_title(f"{report.mode} scan, n = {report.n} (seed {report.seed})")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
