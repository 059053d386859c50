"""Batch evaluation harness: run the prompt set, score audio, report results."""

from .bridge import BridgeClient, BridgeError
from .harness import run_experiment, single_agent_baseline
from .harness_types import (
    AestheticsScore,
    Aggregate,
    EvalReport,
    EvalRow,
    EvalRunConfig,
    aggregate_rows,
)
from .report import (
    canonical_json,
    load_reference_results,
    reference_report,
    render_reference_table,
    render_report,
    report_from_json,
    report_to_json,
)

__all__ = [
    "AestheticsScore",
    "Aggregate",
    "BridgeClient",
    "BridgeError",
    "EvalReport",
    "EvalRow",
    "EvalRunConfig",
    "aggregate_rows",
    "canonical_json",
    "load_reference_results",
    "reference_report",
    "render_reference_table",
    "render_report",
    "report_from_json",
    "report_to_json",
    "run_experiment",
    "single_agent_baseline",
]
