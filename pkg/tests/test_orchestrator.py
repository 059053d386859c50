"""Five-agent session protocol: turn order, re-prompts, merging, reviews."""

import json

import pytest

from cocomposer.llm import BackendError, ChatMessage, ScriptedBackend
from cocomposer.notation import parse_abc, serialize_abc
from cocomposer.orchestrator import (
    CompositionBrief,
    DialoguePool,
    MalformedOutput,
    NoScoreExtractable,
    SessionConfig,
    dump_transcript,
    first_parseable_tune,
    merge_candidate,
    parse_review,
    revision_turn,
    run_session,
    session_to_json,
)

from conftest import APPROVE_REVIEW, FULL_ABC, MELODY_ABC, REVISE_REVIEW, fenced, make_backend

BRIEF = CompositionBrief("A cheerful reel for fiddle and guitar.")

PHASE = ["Leader", "Melody", "Accompaniment", "Revision", "Review"]


def expected_roles(phases: int) -> list[str]:
    return ["User"] + PHASE * phases


class TestSessionTraces:
    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_trace_shape_per_iteration_count(self, k, session_config):
        backend = make_backend(k)
        result = run_session(BRIEF, session_config, backend)
        assert result.success is True
        assert result.failure_reason is None
        assert result.iterations_used == k
        assert result.transcript.roles() == expected_roles(k + 1)

    def test_early_approval_stops_iteration(self, session_config):
        backend = make_backend(0)
        result = run_session(BRIEF, session_config, backend)
        assert result.iterations_used == 0
        assert len(result.transcript.entries) == 6

    def test_never_approving_review_hits_cap(self, session_config):
        backend = make_backend(2, approve_last=False)
        result = run_session(BRIEF, session_config, backend)
        assert result.success is True
        assert result.iterations_used == 2
        assert result.transcript.roles() == expected_roles(3)

    def test_zero_iteration_cap(self, model_config):
        config = SessionConfig(model=model_config, max_iterations=0, fixed_time=0.0)
        backend = make_backend(0, approve_last=False)
        result = run_session(BRIEF, config, backend)
        assert result.success is True
        assert result.transcript.roles() == expected_roles(1)

    def test_final_tune_is_merged_two_voice_score(self, session_config):
        result = run_session(BRIEF, session_config, make_backend(0))
        assert len(result.final_tune.voices) == 2
        assert serialize_abc(result.final_tune) == FULL_ABC

    def test_user_brief_opens_pool(self, session_config):
        result = run_session(BRIEF, session_config, make_backend(0))
        first = result.transcript.entries[0]
        assert first.role == "User"
        assert first.message.content == BRIEF.raw_request

    def test_fixed_time_pins_timestamps_and_seqs(self, session_config):
        result = run_session(BRIEF, session_config, make_backend(1))
        entries = result.transcript.entries
        assert [e.seq for e in entries] == list(range(len(entries)))
        assert all(e.ts == session_config.fixed_time for e in entries)

    def test_review_uses_verdict_prompt(self, session_config):
        backend = make_backend(0)
        run_session(BRIEF, session_config, backend)
        review_calls = [m for name, m in backend.calls if name == "Review"]
        assert review_calls
        system = review_calls[0][0]
        assert system.role == "system"
        assert 'VERDICT: APPROVE' in system.content

    def test_revision_posts_fenced_canonical_score(self, session_config):
        result = run_session(BRIEF, session_config, make_backend(0))
        revision_entry = result.transcript.entries[4]
        assert revision_entry.role == "Revision"
        content = revision_entry.message.content
        assert content.startswith("```\n") and content.endswith("```")
        assert serialize_abc(first_parseable_tune(content)) == FULL_ABC


class TestReprompt:
    def test_recovers_after_one_junk_reply(self, session_config):
        backend = make_backend(0)
        backend.replies["Melody"] = ["let me think about the melody first"]
        backend.replies["Melody"] = ["let me think about the melody first", fenced(MELODY_ABC)]
        result = run_session(BRIEF, session_config, backend)
        assert result.success is True
        melody_entries = [e for e in result.transcript.entries if e.role == "Melody"]
        assert len(melody_entries) == 1
        assert melody_entries[0].message.content == fenced(MELODY_ABC)

    def test_nudge_sent_in_retry_context(self, session_config):
        backend = make_backend(0)
        backend.replies["Melody"] = ["prose only", fenced(MELODY_ABC)]
        run_session(BRIEF, session_config, backend)
        melody_calls = [m for name, m in backend.calls if name == "Melody"]
        assert len(melody_calls) == 2
        retry = melody_calls[1]
        assert retry[-2].content == "prose only"
        assert retry[-1].role == "user"
        assert retry[-1].content == (
            "Note: Only output the sheet music in the specified ABC Notations "
            "format, with no other text."
        )

    def test_two_junk_replies_fail_session(self, session_config):
        backend = make_backend(0)
        backend.replies["Melody"] = ["nothing here", "still nothing"]
        result = run_session(BRIEF, session_config, backend)
        assert result.success is False
        assert result.failure_reason == "no parseable ABC"
        assert result.final_tune is None
        assert result.transcript.roles() == ["User", "Leader", "Melody"]

    def test_exhausted_retry_counts_as_malformed(self, session_config):
        backend = make_backend(0)
        backend.replies["Melody"] = ["only junk"]
        result = run_session(BRIEF, session_config, backend)
        assert result.success is False
        assert result.failure_reason == "no parseable ABC"

    def test_backend_error_carries_partial_pool(self, session_config):
        backend = make_backend(0)
        del backend.replies["Accompaniment"]
        backend._cursor.pop("Accompaniment")
        with pytest.raises(BackendError) as excinfo:
            run_session(BRIEF, session_config, backend)
        assert excinfo.value.pool.roles() == ["User", "Leader", "Melody"]


class TestMergeCandidate:
    def test_none_candidate_takes_new(self):
        melody = parse_abc(MELODY_ABC)
        assert merge_candidate(None, melody) is melody

    def test_multi_voice_supersedes(self):
        melody = parse_abc(MELODY_ABC)
        full = parse_abc(FULL_ABC)
        assert merge_candidate(melody, full) is full

    def test_single_voice_replaces_same_id(self):
        full = parse_abc(FULL_ABC)
        new_v2 = parse_abc("X:1\nM:6/8\nL:1/8\nK:A\nV:2\nE3 E3 | E3 E3\n")
        merged = merge_candidate(full, new_v2)
        assert merged.header == full.header
        assert [v.voice_id for v in merged.voices] == [1, 2]
        assert merged.voices[1] == new_v2.voices[0]
        assert merged.voices[0] == full.voices[0]

    def test_single_new_voice_appends(self):
        full = parse_abc(FULL_ABC)
        new_v3 = parse_abc("X:1\nM:6/8\nL:1/8\nK:A\nV:3\nA,3 A,3 | A,3 A,3\n")
        merged = merge_candidate(full, new_v3)
        assert [v.voice_id for v in merged.voices] == [1, 2, 3]
        assert merged.header == full.header


class TestParseReview:
    def test_plain_headings(self):
        report = parse_review(APPROVE_REVIEW)
        assert report.melodic_structure == "strong thematic arc."
        assert report.harmony_counterpoint == "supportive chords."
        assert report.rhythmic_complexity == "lively compound feel."
        assert report.instrumentation_timbre == "fitting leads."
        assert report.form_structure == "clean repeats."
        assert report.approve is True

    def test_revise_verdict(self):
        assert parse_review(REVISE_REVIEW).approve is False

    def test_markdown_decorated_headings(self):
        content = (
            "# Melodic Structure\nsoars nicely\n"
            "- Harmony and Counterpoint: dense\n"
            "> Rhythmic Complexity: syncopated\n"
            "VERDICT: APPROVE\n"
        )
        report = parse_review(content)
        assert report.melodic_structure == "soars nicely"
        assert report.harmony_counterpoint == "dense"
        assert report.rhythmic_complexity == "syncopated"
        assert report.instrumentation_timbre == ""
        assert report.approve is True

    def test_case_insensitive_headings(self):
        report = parse_review("melodic structure: fine\nVERDICT: REVISE")
        assert report.melodic_structure == "fine"

    def test_missing_sections_empty(self):
        report = parse_review("Nothing structured at all.")
        assert report.melodic_structure == ""
        assert report.approve is False

    def test_sentinel_must_be_alone_on_line(self):
        assert parse_review("I think VERDICT: APPROVE is right").approve is False
        assert parse_review("   VERDICT: APPROVE   ").approve is True
        assert parse_review("VERDICT: APPROVE.").approve is False

    def test_multiline_section_body(self):
        content = "Melodic Structure: first line\nsecond line\nHarmony and Counterpoint: x"
        report = parse_review(content)
        assert report.melodic_structure == "first line\nsecond line"


class TestRevisionTurn:
    def make_pool(self, abc_text: str) -> DialoguePool:
        pool = DialoguePool(fixed_time=0.0)
        pool.append("User", ChatMessage("user", "compose", author_name="User"))
        pool.append(
            "Melody", ChatMessage("assistant", fenced(abc_text), author_name="Melody")
        )
        return pool

    def test_repairs_latest_candidate(self, session_config):
        broken = "X:1\nM:4/4\nL:1/4\nK:C\nA B c d | A B c\n"
        pool = self.make_pool(broken)
        actions = []
        repaired, message = revision_turn(
            pool, session_config, ScriptedBackend({}), action_log=actions
        )
        assert [a.kind for a in actions] == ["append_rests"]
        assert "A B c z |]" in serialize_abc(repaired)
        assert pool.roles()[-1] == "Revision"
        assert message.content == "```\n" + serialize_abc(repaired) + "```"

    def test_explicit_candidate_wins_over_pool(self, session_config):
        pool = self.make_pool(MELODY_ABC)
        explicit = parse_abc(FULL_ABC)
        repaired, _ = revision_turn(pool, session_config, ScriptedBackend({}), explicit)
        assert serialize_abc(repaired) == FULL_ABC

    def test_empty_pool_raises(self, session_config):
        pool = DialoguePool(fixed_time=0.0)
        pool.append("User", ChatMessage("user", "compose", author_name="User"))
        with pytest.raises(NoScoreExtractable):
            revision_turn(pool, session_config, ScriptedBackend({}))

    def test_llm_revision_proposal_used(self, model_config):
        config = SessionConfig(model=model_config, run_llm_revision=True, fixed_time=0.0)
        pool = self.make_pool(MELODY_ABC)
        backend = ScriptedBackend({"Revision": [fenced(FULL_ABC)]})
        repaired, _ = revision_turn(pool, config, backend, action_log=None)
        assert serialize_abc(repaired) == FULL_ABC

    def test_llm_revision_junk_falls_back(self, model_config):
        config = SessionConfig(model=model_config, run_llm_revision=True, fixed_time=0.0)
        pool = self.make_pool(MELODY_ABC)
        backend = ScriptedBackend({"Revision": ["I suggest nothing concrete."]})
        repaired, _ = revision_turn(pool, config, backend)
        assert serialize_abc(repaired) == MELODY_ABC


class TestSerialization:
    def test_session_json_schema(self, session_config):
        result = run_session(BRIEF, session_config, make_backend(1))
        data = session_to_json(result, "sess-1", session_config)
        assert set(data) == {"session_id", "config", "entries", "repair_actions", "result"}
        assert data["session_id"] == "sess-1"
        assert data["config"]["model_id"] == "scripted-model"
        assert data["config"]["max_iterations"] == 2
        assert [e["seq"] for e in data["entries"]] == list(range(11))
        assert set(data["entries"][0]) == {"seq", "role", "content", "ts"}
        assert data["result"] == {
            "success": True,
            "failure_reason": None,
            "iterations_used": 1,
            "final_abc": FULL_ABC,
        }

    def test_dump_is_canonical_json(self, session_config):
        result = run_session(BRIEF, session_config, make_backend(0))
        text = dump_transcript(result, "sess-2", session_config)
        assert text.endswith("\n")
        parsed = json.loads(text)
        assert text == json.dumps(parsed, sort_keys=True, indent=2) + "\n"

    def test_failed_session_serializes(self, session_config):
        backend = make_backend(0)
        backend.replies["Melody"] = ["junk", "junk again"]
        result = run_session(BRIEF, session_config, backend)
        data = session_to_json(result, "sess-3", session_config)
        assert data["result"]["success"] is False
        assert data["result"]["final_abc"] is None


class TestBriefValidation:
    def test_empty_request_rejected(self):
        with pytest.raises(ValueError):
            CompositionBrief("")

    def test_prompt_index_optional(self):
        assert CompositionBrief("x", prompt_index=4).prompt_index == 4
