"""Report serialization and rendering.

The text table mirrors the published results layout: one line per
system with columns CE, CU, PC, PQ and Gen. Success, means shown to two
decimals. JSON keeps full precision and round-trips exactly; CSV keeps
the rendered (two-decimal) values.
"""

from __future__ import annotations

import csv
import functools
import io
import json
from importlib import resources

from .harness_types import Aggregate, AestheticsScore, EvalReport, EvalRow

_FORMATS = ("table", "csv", "json")
_MEAN_COLUMNS = ("CE", "CU", "PC", "PQ")
_SUCCESS_COLUMN = "Gen. Success"


def canonical_json(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def score_to_json(score: AestheticsScore | None) -> dict | None:
    if score is None:
        return None
    return {"ce": score.ce, "cu": score.cu, "pc": score.pc, "pq": score.pq}


def report_to_json(report: EvalReport) -> dict:
    aggregate = None
    if report.aggregate is not None:
        aggregate = {
            "ce": report.aggregate.ce,
            "cu": report.aggregate.cu,
            "pc": report.aggregate.pc,
            "pq": report.aggregate.pq,
            "success_rate": report.aggregate.success_rate,
            "scored_rows": report.aggregate.scored_rows,
        }
    return {
        "system_label": report.system_label,
        "rows": [
            {
                "index": row.index,
                "success": row.success,
                "score": score_to_json(row.score),
                "failure_reason": row.failure_reason,
                "warnings": list(row.warnings),
                "artifacts": dict(row.artifacts),
            }
            for row in report.rows
        ],
        "aggregate": aggregate,
    }


def report_from_json(data: dict) -> EvalReport:
    rows = tuple(
        EvalRow(
            index=row["index"],
            success=row["success"],
            score=AestheticsScore(**row["score"]) if row["score"] else None,
            failure_reason=row["failure_reason"],
            warnings=tuple(row["warnings"]),
            artifacts=dict(row["artifacts"]),
        )
        for row in data["rows"]
    )
    aggregate = None
    if data["aggregate"] is not None:
        aggregate = Aggregate(**data["aggregate"])
    return EvalReport(system_label=data["system_label"], rows=rows, aggregate=aggregate)


def _mean_cell(value: float | None) -> str:
    return f"{value:.2f}" if value is not None else "-"


def _success_cell(rate: float | None) -> str:
    return f"{rate:.0f}%" if rate is not None else "-"


def _table(label_header: str, lines: list[tuple[str, Aggregate | None]]) -> str:
    widths = [max(len(label_header), *(len(label) for label, _ in lines), 6)]
    header = [label_header, *_MEAN_COLUMNS, _SUCCESS_COLUMN]
    widths += [6, 6, 6, 6, len(_SUCCESS_COLUMN)]
    rows = [header]
    for label, aggregate in lines:
        if aggregate is None:
            continue
        rows.append(
            [
                label,
                *(_mean_cell(v) for v in (aggregate.ce, aggregate.cu, aggregate.pc, aggregate.pq)),
                _success_cell(aggregate.success_rate),
            ]
        )
    out = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(width) for cell, width in zip(row[1:], widths[1:])]
        out.append("  ".join(cells).rstrip())
    return "\n".join(out) + "\n"


def render_report(report: EvalReport, format: str = "table") -> str:
    if format not in _FORMATS:
        raise ValueError(f"format must be one of {_FORMATS}, got {format!r}")
    if format == "json":
        return canonical_json(report_to_json(report))
    if format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["system", "ce", "cu", "pc", "pq", "gen_success_rate"])
        if report.aggregate is not None:
            a = report.aggregate
            writer.writerow(
                [
                    report.system_label,
                    *(_mean_cell(v) if v is not None else "" for v in (a.ce, a.cu, a.pc, a.pq)),
                    f"{a.success_rate:.0f}" if a.success_rate is not None else "",
                ]
            )
        return buffer.getvalue()
    return _table("System", [(report.system_label, report.aggregate)])


@functools.lru_cache(maxsize=1)
def load_reference_results() -> tuple[dict, ...]:
    """Published per-system aggregates, grouped by experiment."""
    raw = resources.files(__package__).joinpath("data/reference_results.json").read_text()
    return tuple(json.loads(raw)["experiments"])


def reference_report(system_label: str, experiment: int = 1) -> EvalReport:
    """An EvalReport carrying a published aggregate (no per-prompt rows)."""
    for group in load_reference_results():
        if group["experiment"] != experiment:
            continue
        for row in group["rows"]:
            if row["system_label"] == system_label:
                aggregate = Aggregate(
                    ce=row["ce"],
                    cu=row["cu"],
                    pc=row["pc"],
                    pq=row["pq"],
                    success_rate=row["success_rate"],
                    scored_rows=0,
                )
                return EvalReport(system_label=system_label, rows=(), aggregate=aggregate)
    raise KeyError(f"no stored row for {system_label!r} in experiment {experiment}")


def render_reference_table() -> str:
    """The full stored results table across all four experiments."""
    lines: list[tuple[str, Aggregate | None]] = []
    for group in load_reference_results():
        for i, row in enumerate(group["rows"]):
            prefix = f"Exper {group['experiment']}" if i == 0 else ""
            aggregate = Aggregate(
                ce=row["ce"],
                cu=row["cu"],
                pc=row["pc"],
                pq=row["pq"],
                success_rate=row["success_rate"],
                scored_rows=0,
            )
            lines.append((f"{prefix:<8} {row['system_label']}", aggregate))
    return _table("         System", lines)
