"""Plain-text tables for terminal output."""

import numpy as np
from prettytable import PrettyTable

from syncgain.simulate import SyncSummary
from syncgain.synthesis import FeedbackGain
from syncgain.sysclass import ClassReport
from syncgain.verify import (
    Claim1Result,
    CounterexampleReport,
    EnsembleResult,
    SpectralVerdict,
)


def _c(z: complex) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-15:
        return f"{z.real:.6g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.6g}{sign}{abs(z.imag):.6g}j"


def _mark(ok: bool) -> str:
    return "✓" if ok else "x"


def _opt(value: float | None) -> str:
    return "-" if value is None else f"{value:.3e}"


# ----------------------------------------------------------------------
# Classification
# ----------------------------------------------------------------------


def render_class_report(report: ClassReport) -> str:
    flags = PrettyTable(["class", "member"])
    for name, member in report.flags().items():
        flags.add_row([name, _mark(member)])

    modes = PrettyTable(["eigenvalue", "alg", "geo", "PBH rank"])
    for m in report.modes:
        modes.add_row([_c(m.eigenvalue), m.algebraic, m.geometric, m.pbh_rank])
    return "\n".join(
        [
            flags.get_string(),
            modes.get_string(),
            f"rank C = {report.rank_C} (cutoff {report.rank_cutoff:.2e}), "
            f"eig tol = {report.eig_tol:.2e}",
        ]
    )


# ----------------------------------------------------------------------
# Gains
# ----------------------------------------------------------------------


def render_matrix(M: np.ndarray, name: str = "L") -> str:
    table = PrettyTable([name] + [str(j) for j in range(1, M.shape[1] + 1)])
    for i, row in enumerate(np.atleast_2d(M), start=1):
        table.add_row([str(i)] + [f"{v:.6g}" for v in row])
    return table.get_string()


def render_gain(gain: FeedbackGain) -> str:
    head = f"branch = {gain.branch}, guarantee = {gain.guarantee}"
    if gain.delta is not None:
        head += f", delta = {gain.delta:g}"
    return head + "\n" + render_matrix(gain.L)


# ----------------------------------------------------------------------
# Verification
# ----------------------------------------------------------------------


def render_verdict(verdict: SpectralVerdict) -> str:
    table = PrettyTable(["#", "λ", "abscissa", "Hurwitz", "note"])
    for r in verdict.records:
        note = "indeterminate" if r.indeterminate else ""
        if r.surplus_zero:
            note = (note + " repeated zero").strip()
        table.add_row(
            [
                r.index,
                _c(r.eigenvalue),
                f"{r.abscissa:.4e}",
                _mark(r.hurwitz),
                note,
            ]
        )
    return table.get_string() + (
        f"\nsynchronizes: {_mark(verdict.overall)} "
        f"(margin {_opt(verdict.margin)})"
    )


def render_summary(summary: SyncSummary) -> str:
    table = PrettyTable(["metric", "value"])
    table.align = "l"
    table.add_rows(
        [
            ["initial sync error", f"{summary.initial_sync_error:.4e}"],
            ["final sync error", f"{summary.final_sync_error:.4e}"],
            ["final tracking error", _opt(summary.final_tracking_error)],
            ["average drift", _opt(summary.average_drift)],
            ["decay exponent", _opt(summary.exponent)],
            [f"decayed (tol {summary.tol:g})", _mark(summary.decayed)],
        ]
    )
    return table.get_string()


def render_claim1(result: Claim1Result) -> str:
    return (
        f"A − σ(1+jω)PCᵀC Hurwitz on {result.samples} samples: "
        f"{_mark(result.holds)} (worst abscissa {result.worst_abscissa:.4e})"
    )


def render_counterexample(report: CounterexampleReport) -> str:
    lines = [f"=== Statement ({report.statement}) ===", ""]
    lines += [
        f"  {k} = {_c(v) if isinstance(v, complex) else v}"
        for k, v in report.witness.items()
    ]
    lines.append(render_verdict(report.verdict))
    lines.append(render_summary(report.summary))
    lines += [f"  note: {n}" for n in report.notes]
    return "\n".join(lines)


def render_ensemble(result: EnsembleResult) -> str:
    table = PrettyTable(
        ["case", "n", "p", "criterion", "decayed", "abscissa", "horizon"]
    )
    for c in result.cases:
        table.add_row(
            [
                c.index,
                c.n,
                c.p,
                _mark(c.overall),
                _mark(c.decayed),
                f"{c.abscissa:.3e}",
                f"{c.horizon:.1f}",
            ]
        )
    return table.get_string() + (
        f"\nagreement {result.agreements}/{len(result.cases)} "
        f"(margin {result.margin:g}, redrawn {result.rejected})"
    )
