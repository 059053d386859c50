"""Five-agent session state machine.

A session runs an initialization phase (Leader, Melody, Accompaniment,
Revision, Review) and then up to ``max_iterations`` identical iterative
phases over a shared append-only dialogue pool, stopping early when the
Review agent approves. Every agent sees its own system prompt plus the
entire pool so far; the Revision step always applies the deterministic
repairer so the candidate after each phase is timing-valid.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field

from .llm import Backend, BackendError, ChatMessage, ModelConfig
from .notation import (
    RepairAction,
    Tune,
    extract_abc_blocks,
    parse_abc,
    repair,
    serialize_abc,
)
from .notation.errors import ParseError
from .prompts import load_role_prompt
from .roles import AgentRole

USER_ROLE = "User"

# Retry nudge sent once when an agent's reply yields no parseable score.
_REPROMPT_NUDGE = (
    "Note: Only output the sheet music in the specified ABC Notations format, "
    "with no other text."
)

_APPROVE_SENTINEL = "VERDICT: APPROVE"
_REVIEW_PROMPT_VERSION = "paper-v1+verdict"

_REVIEW_AXES = {
    "melodic_structure": "Melodic Structure",
    "harmony_counterpoint": "Harmony and Counterpoint",
    "rhythmic_complexity": "Rhythmic Complexity",
    "instrumentation_timbre": "Instrumentation and Timbre",
    "form_structure": "Form and Structure",
}


class MalformedOutput(Exception):
    """An agent's reply yielded no parseable score even after a re-prompt."""


# Session-level name for the same condition.
NoScoreExtractable = MalformedOutput


@dataclass(frozen=True)
class CompositionBrief:
    raw_request: str
    prompt_index: int | None = None

    def __post_init__(self) -> None:
        if not self.raw_request:
            raise ValueError("raw_request must be non-empty")


@dataclass(frozen=True)
class PoolEntry:
    seq: int
    role: str
    message: ChatMessage
    ts: float


@dataclass
class DialoguePool:
    """Append-only shared transcript; sequence numbers strictly increase."""

    fixed_time: float | None = None
    entries: list[PoolEntry] = field(default_factory=list)

    def append(self, role: str, message: ChatMessage) -> PoolEntry:
        ts = self.fixed_time if self.fixed_time is not None else time.time()
        entry = PoolEntry(seq=len(self.entries), role=role, message=message, ts=ts)
        self.entries.append(entry)
        return entry

    def messages(self) -> list[ChatMessage]:
        return [entry.message for entry in self.entries]

    def roles(self) -> list[str]:
        return [entry.role for entry in self.entries]


@dataclass(frozen=True)
class ReviewReport:
    melodic_structure: str
    harmony_counterpoint: str
    rhythmic_complexity: str
    instrumentation_timbre: str
    form_structure: str
    approve: bool


@dataclass(frozen=True)
class SessionConfig:
    model: ModelConfig
    max_iterations: int = 2
    run_llm_revision: bool = False
    seed_note: str = ""
    fixed_time: float | None = None  # pin pool timestamps for reproducible runs

    def __post_init__(self) -> None:
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")


@dataclass(frozen=True)
class SessionResult:
    final_tune: Tune | None
    transcript: DialoguePool
    iterations_used: int
    success: bool
    failure_reason: str | None
    repair_actions: tuple[RepairAction, ...] = ()


def _system_message(role: AgentRole, version: str = "paper-v1") -> ChatMessage:
    prompt = load_role_prompt(role, version)
    return ChatMessage("system", prompt.text, author_name=role.value)


def _context(role: AgentRole, pool: DialoguePool, version: str = "paper-v1") -> list[ChatMessage]:
    return [_system_message(role, version), *pool.messages()]


def first_parseable_tune(content: str) -> Tune | None:
    for block in extract_abc_blocks(content):
        try:
            return parse_abc(block)
        except ParseError:
            continue
    return None


def leader_turn(pool: DialoguePool, config: SessionConfig, backend: Backend) -> ChatMessage:
    reply = backend.complete(config.model, _context(AgentRole.LEADER, pool))
    message = ChatMessage("assistant", reply.content, author_name=AgentRole.LEADER.value)
    pool.append(AgentRole.LEADER.value, message)
    return message


def _composing_turn(
    role: AgentRole, pool: DialoguePool, config: SessionConfig, backend: Backend
) -> tuple[ChatMessage, Tune]:
    """Run a Melody or Accompaniment turn; re-prompt once on junk output."""
    context = _context(role, pool)
    reply = backend.complete(config.model, context)
    tune = first_parseable_tune(reply.content)
    if tune is None:
        retry_context = context + [
            ChatMessage("assistant", reply.content, author_name=role.value),
            ChatMessage("user", _REPROMPT_NUDGE, author_name=USER_ROLE),
        ]
        try:
            reply = backend.complete(config.model, retry_context)
        except BackendError as err:
            if err.kind != "exhausted_script":
                raise
        else:
            tune = first_parseable_tune(reply.content)
    message = ChatMessage("assistant", reply.content, author_name=role.value)
    pool.append(role.value, message)
    if tune is None:
        raise MalformedOutput(f"{role.value} produced no parseable ABC")
    return message, tune


def melody_turn(
    pool: DialoguePool, config: SessionConfig, backend: Backend
) -> tuple[ChatMessage, Tune]:
    return _composing_turn(AgentRole.MELODY, pool, config, backend)


def accompaniment_turn(
    pool: DialoguePool, config: SessionConfig, backend: Backend
) -> tuple[ChatMessage, Tune]:
    return _composing_turn(AgentRole.ACCOMPANIMENT, pool, config, backend)


def merge_candidate(candidate: Tune | None, new: Tune) -> Tune:
    """Fold an agent's tune into the working candidate.

    A multi-voice score supersedes the candidate outright; a single-voice
    score replaces the same-numbered voice (or joins as a new one) while
    the candidate's header stays authoritative.
    """
    if candidate is None or len(new.voices) >= 2:
        return new
    incoming = new.voices[0]
    voices = list(candidate.voices)
    for i, voice in enumerate(voices):
        if voice.voice_id == incoming.voice_id:
            voices[i] = incoming
            break
    else:
        voices.append(incoming)
    return Tune(header=candidate.header, voices=tuple(voices))


def _latest_candidate(pool: DialoguePool) -> Tune | None:
    for entry in reversed(pool.entries):
        tune = first_parseable_tune(entry.message.content)
        if tune is not None:
            return tune
    return None


def revision_turn(
    pool: DialoguePool,
    config: SessionConfig,
    backend: Backend,
    candidate: Tune | None = None,
    action_log: list[RepairAction] | None = None,
) -> tuple[Tune, ChatMessage]:
    """Repair the candidate and post the canonical score to the pool.

    With ``run_llm_revision`` the model proposes a revision first, which
    is then parsed and deterministically verified; an unusable proposal
    falls back to the original candidate.
    """
    if candidate is None:
        candidate = _latest_candidate(pool)
    if candidate is None:
        raise MalformedOutput("no candidate tune in pool to revise")
    if config.run_llm_revision:
        reply = backend.complete(config.model, _context(AgentRole.REVISION, pool))
        proposed = first_parseable_tune(reply.content)
        if proposed is not None:
            candidate = proposed
    repaired, actions = repair(candidate)
    if action_log is not None:
        action_log.extend(actions)
    message = ChatMessage(
        "assistant",
        "```\n" + serialize_abc(repaired) + "```",
        author_name=AgentRole.REVISION.value,
    )
    pool.append(AgentRole.REVISION.value, message)
    return repaired, message


def parse_review(content: str) -> ReviewReport:
    """Lenient extraction of the five commentary sections and the verdict."""
    headings = {}
    pattern = "|".join(re.escape(title) for title in _REVIEW_AXES.values())
    matches = list(
        re.finditer(
            rf"^[\s#*>-]*({pattern})\s*:?\s*", content, re.IGNORECASE | re.MULTILINE
        )
    )
    for i, match in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(content)
        title = match.group(1).lower()
        body = [
            line
            for line in content[match.end():end].splitlines()
            if not line.strip().startswith("VERDICT:")
        ]
        headings[title] = "\n".join(body).strip()
    approve = any(line.strip() == _APPROVE_SENTINEL for line in content.splitlines())
    fields = {
        key: headings.get(title.lower(), "") for key, title in _REVIEW_AXES.items()
    }
    return ReviewReport(approve=approve, **fields)


def review_turn(pool: DialoguePool, config: SessionConfig, backend: Backend) -> ReviewReport:
    reply = backend.complete(
        config.model, _context(AgentRole.REVIEW, pool, _REVIEW_PROMPT_VERSION)
    )
    message = ChatMessage("assistant", reply.content, author_name=AgentRole.REVIEW.value)
    pool.append(AgentRole.REVIEW.value, message)
    return parse_review(reply.content)


def _phase(
    pool: DialoguePool,
    config: SessionConfig,
    backend: Backend,
    candidate: Tune | None,
    action_log: list[RepairAction],
) -> tuple[Tune, ReviewReport]:
    leader_turn(pool, config, backend)
    _, melody = melody_turn(pool, config, backend)
    candidate = merge_candidate(candidate, melody)
    _, accompaniment = accompaniment_turn(pool, config, backend)
    candidate = merge_candidate(candidate, accompaniment)
    repaired, _ = revision_turn(pool, config, backend, candidate, action_log)
    report = review_turn(pool, config, backend)
    return repaired, report


def run_session(
    brief: CompositionBrief,
    config: SessionConfig,
    backend: Backend,
    session_id: str | None = None,
) -> SessionResult:
    pool = DialoguePool(fixed_time=config.fixed_time)
    pool.append(USER_ROLE, ChatMessage("user", brief.raw_request, author_name=USER_ROLE))
    action_log: list[RepairAction] = []
    iterations_used = 0
    try:
        candidate, report = _phase(pool, config, backend, None, action_log)
        while not report.approve and iterations_used < config.max_iterations:
            iterations_used += 1
            candidate, report = _phase(pool, config, backend, candidate, action_log)
    except MalformedOutput:
        return SessionResult(
            final_tune=None,
            transcript=pool,
            iterations_used=iterations_used,
            success=False,
            failure_reason="no parseable ABC",
            repair_actions=tuple(action_log),
        )
    except BackendError as err:
        err.pool = pool  # partial transcript for forensics
        raise
    return SessionResult(
        final_tune=candidate,
        transcript=pool,
        iterations_used=iterations_used,
        success=True,
        failure_reason=None,
        repair_actions=tuple(action_log),
    )


def config_to_json(config: SessionConfig) -> dict:
    return {
        "model_id": config.model.model_id,
        "endpoint_url": config.model.endpoint_url,
        "temperature": config.model.temperature,
        "max_output_tokens": config.model.max_output_tokens,
        "request_timeout": config.model.request_timeout,
        "max_retries": config.model.max_retries,
        "max_iterations": config.max_iterations,
        "run_llm_revision": config.run_llm_revision,
        "seed_note": config.seed_note,
    }


def session_to_json(
    result: SessionResult, session_id: str, config: SessionConfig
) -> dict:
    return {
        "session_id": session_id,
        "config": config_to_json(config),
        "entries": [
            {
                "seq": entry.seq,
                "role": entry.role,
                "content": entry.message.content,
                "ts": entry.ts,
            }
            for entry in result.transcript.entries
        ],
        "repair_actions": [action.to_json_dict() for action in result.repair_actions],
        "result": {
            "success": result.success,
            "failure_reason": result.failure_reason,
            "iterations_used": result.iterations_used,
            "final_abc": serialize_abc(result.final_tune) if result.final_tune else None,
        },
    }


def dump_transcript(result: SessionResult, session_id: str, config: SessionConfig) -> str:
    return json.dumps(session_to_json(result, session_id, config), sort_keys=True, indent=2) + "\n"
