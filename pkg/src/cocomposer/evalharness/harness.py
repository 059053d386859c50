"""Batch evaluation over the twenty-prompt set.

Each prompt runs one session (or ``repeats`` sessions, averaged), and
every run persists its artifacts under ``output_dir/prompt_NN/``:
transcript.json always, then score.abc / score.mid on success, score.wav
when a synthesizer is configured, and aesthetics scores when a bridge
command is configured. Row failures never abort the batch; the final
report is written canonically to ``output_dir/run.json``.
"""

from __future__ import annotations

import re
from pathlib import Path
from statistics import fmean

from ..llm import Backend, BackendError, ChatMessage
from ..midi import RenderError, SynthError, render_midi, render_wav
from ..notation import repair, serialize_abc
from ..notation.errors import RepairError, StructureError
from ..orchestrator import (
    USER_ROLE,
    CompositionBrief,
    DialoguePool,
    SessionConfig,
    SessionResult,
    dump_transcript,
    first_parseable_tune,
    run_session,
)
from ..prompts import load_prompt_set, load_role_prompt
from ..roles import AgentRole
from .bridge import BridgeClient, BridgeError
from .harness_types import AestheticsScore, EvalReport, EvalRow, EvalRunConfig, aggregate_rows
from .report import canonical_json, report_to_json

_SINGLE_AGENT_LABEL = "SingleAgent"


def _slug(label: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")
    return slug or "run"


def single_agent_baseline(
    brief: CompositionBrief, config: SessionConfig, backend: Backend
) -> SessionResult:
    """One-shot baseline: merged Leader+Melody+Accompaniment duties, one call."""
    merged = "\n\n".join(
        load_role_prompt(role).text
        for role in (AgentRole.LEADER, AgentRole.MELODY, AgentRole.ACCOMPANIMENT)
    )
    system = ChatMessage("system", merged, author_name=_SINGLE_AGENT_LABEL)
    pool = DialoguePool(fixed_time=config.fixed_time)
    pool.append(USER_ROLE, ChatMessage("user", brief.raw_request, author_name=USER_ROLE))
    try:
        reply = backend.complete(config.model, [system, *pool.messages()])
    except BackendError as err:
        err.pool = pool
        raise
    pool.append(
        _SINGLE_AGENT_LABEL,
        ChatMessage("assistant", reply.content, author_name=_SINGLE_AGENT_LABEL),
    )
    tune = first_parseable_tune(reply.content)
    if tune is None:
        return SessionResult(
            final_tune=None,
            transcript=pool,
            iterations_used=0,
            success=False,
            failure_reason="no parseable ABC",
        )
    repaired, actions = repair(tune)
    return SessionResult(
        final_tune=repaired,
        transcript=pool,
        iterations_used=0,
        success=True,
        failure_reason=None,
        repair_actions=tuple(actions),
    )


def _run_once(
    index: int,
    prompt_text: str,
    config: EvalRunConfig,
    backend: Backend,
    bridge: BridgeClient | None,
    bridge_warning: str | None,
    art_dir: Path,
    rel_prefix: str,
    session_id: str,
) -> EvalRow:
    art_dir.mkdir(parents=True, exist_ok=True)
    warnings: list[str] = []
    artifacts: dict[str, str] = {}
    brief = CompositionBrief(prompt_text, prompt_index=index)
    try:
        if config.use_single_agent:
            result = single_agent_baseline(brief, config.session_config, backend)
        else:
            result = run_session(brief, config.session_config, backend, session_id)
    except BackendError as err:
        pool = getattr(err, "pool", None) or DialoguePool()
        result = SessionResult(
            final_tune=None,
            transcript=pool,
            iterations_used=0,
            success=False,
            failure_reason=f"backend error: {err}",
        )
    except (RepairError, StructureError) as err:
        result = SessionResult(
            final_tune=None,
            transcript=DialoguePool(),
            iterations_used=0,
            success=False,
            failure_reason=f"unrepairable score: {err}",
        )
    (art_dir / "transcript.json").write_text(
        dump_transcript(result, session_id, config.session_config)
    )
    artifacts["transcript"] = f"{rel_prefix}transcript.json"
    if not result.success or result.final_tune is None:
        return EvalRow(
            index=index,
            success=False,
            failure_reason=result.failure_reason or "session failed",
            warnings=tuple(warnings),
            artifacts=artifacts,
        )

    (art_dir / "score.abc").write_text(serialize_abc(result.final_tune))
    artifacts["abc"] = f"{rel_prefix}score.abc"
    wav_path: Path | None = None
    try:
        (art_dir / "score.mid").write_bytes(render_midi(result.final_tune))
        artifacts["midi"] = f"{rel_prefix}score.mid"
    except RenderError as err:
        warnings.append(f"midi rendering failed: {err}")
    if "midi" in artifacts:
        if config.synth_cmd:
            try:
                wav_path = render_wav(
                    art_dir / "score.mid", art_dir / "score.wav", config.synth_cmd
                )
                artifacts["wav"] = f"{rel_prefix}score.wav"
            except SynthError as err:
                warnings.append(f"synthesis failed: {err}")
        else:
            warnings.append("no synthesizer configured; audio skipped")

    score: AestheticsScore | None = None
    if bridge is not None and wav_path is not None:
        try:
            score = bridge.score(wav_path)
        except BridgeError as err:
            warnings.append(f"scoring failed: {err}")
    elif bridge_warning is not None:
        warnings.append(bridge_warning)
    elif bridge is None:
        warnings.append("no bridge configured; scores absent")
    elif wav_path is None:
        warnings.append("no audio to score")
    return EvalRow(
        index=index,
        success=True,
        score=score,
        warnings=tuple(warnings),
        artifacts=artifacts,
    )


def _merge_repeats(index: int, runs: list[EvalRow]) -> EvalRow:
    if len(runs) == 1:
        return runs[0]
    success = all(run.success for run in runs)
    scores = [run.score for run in runs if run.score is not None]
    score = None
    if scores:
        score = AestheticsScore(
            *(fmean(dim) for dim in zip(*(s.as_tuple() for s in scores)))
        )
    failure_reason = next((r.failure_reason for r in runs if r.failure_reason), None)
    warnings: list[str] = []
    artifacts: dict[str, str] = {}
    for k, run in enumerate(runs, start=1):
        warnings.extend(w for w in run.warnings if w not in warnings)
        for name, path in run.artifacts.items():
            artifacts[f"r{k}:{name}"] = path
    return EvalRow(
        index=index,
        success=success,
        score=score,
        failure_reason=failure_reason,
        warnings=tuple(warnings),
        artifacts=artifacts,
    )


def run_experiment(config: EvalRunConfig, backend: Backend) -> EvalReport:
    prompt_set = load_prompt_set()
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    bridge: BridgeClient | None = None
    bridge_warning: str | None = None
    if config.bridge_cmd:
        try:
            bridge = BridgeClient(config.bridge_cmd)
        except BridgeError as err:
            bridge_warning = f"bridge unavailable: {err}"
    slug = _slug(config.system_label)
    rows: list[EvalRow] = []
    try:
        for index in sorted(set(config.prompt_indices)):
            prompt_text = prompt_set.text(index)
            runs: list[EvalRow] = []
            for k in range(config.repeats):
                if config.repeats > 1:
                    art_dir = output_dir / f"prompt_{index:02d}" / f"r{k + 1}"
                    rel_prefix = f"prompt_{index:02d}/r{k + 1}/"
                    session_id = f"{slug}-p{index:02d}-r{k + 1}"
                else:
                    art_dir = output_dir / f"prompt_{index:02d}"
                    rel_prefix = f"prompt_{index:02d}/"
                    session_id = f"{slug}-p{index:02d}"
                runs.append(
                    _run_once(
                        index,
                        prompt_text,
                        config,
                        backend,
                        bridge,
                        bridge_warning,
                        art_dir,
                        rel_prefix,
                        session_id,
                    )
                )
            rows.append(_merge_repeats(index, runs))
    finally:
        if bridge is not None:
            bridge.close()
    report = EvalReport(
        system_label=config.system_label,
        rows=tuple(rows),
        aggregate=aggregate_rows(tuple(rows)),
    )
    (output_dir / "run.json").write_text(canonical_json(report_to_json(report)))
    return report
