"""Core result types shared by the harness, the report renderer, and the bridge."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..orchestrator import SessionConfig


@dataclass(frozen=True)
class AestheticsScore:
    """The four audio-aesthetics dimensions, each on a 1-10 scale."""

    ce: float
    cu: float
    pc: float
    pq: float

    def __post_init__(self) -> None:
        for name in ("ce", "cu", "pc", "pq"):
            value = getattr(self, name)
            if not 1.0 <= value <= 10.0:
                raise ValueError(f"{name} must be in [1, 10], got {value}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.ce, self.cu, self.pc, self.pq)


@dataclass(frozen=True)
class EvalRunConfig:
    system_label: str
    prompt_indices: tuple[int, ...]
    session_config: SessionConfig
    output_dir: Path
    synth_cmd: str | None = None
    bridge_cmd: str | None = None
    repeats: int = 1
    use_single_agent: bool = False

    def __post_init__(self) -> None:
        if not self.system_label:
            raise ValueError("system_label must be non-empty")
        if not self.prompt_indices:
            raise ValueError("prompt_indices must be non-empty")
        if any(not 1 <= i <= 20 for i in self.prompt_indices):
            raise ValueError("prompt indices must be within 1..20")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")


@dataclass(frozen=True)
class EvalRow:
    index: int
    success: bool
    score: AestheticsScore | None = None
    failure_reason: str | None = None
    warnings: tuple[str, ...] = ()
    artifacts: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Aggregate:
    """Means over scored rows plus the generation success rate.

    ``success_rate`` is None only for stored reference rows published
    without one; computed aggregates always carry it.
    """

    ce: float | None
    cu: float | None
    pc: float | None
    pq: float | None
    success_rate: float | None
    scored_rows: int


@dataclass(frozen=True)
class EvalReport:
    system_label: str
    rows: tuple[EvalRow, ...]
    aggregate: Aggregate | None


def aggregate_rows(rows: tuple[EvalRow, ...]) -> Aggregate | None:
    if not rows:
        return None
    scored = [row.score for row in rows if row.score is not None]
    success_rate = 100.0 * sum(1 for row in rows if row.success) / len(rows)
    if scored:
        means = [
            sum(dimension) / len(scored)
            for dimension in zip(*(score.as_tuple() for score in scored))
        ]
        return Aggregate(*means, success_rate=success_rate, scored_rows=len(scored))
    return Aggregate(None, None, None, None, success_rate=success_rate, scored_rows=0)
