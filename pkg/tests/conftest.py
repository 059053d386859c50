"""Shared fixtures: golden tunes, scripted sessions, stub synth/bridge."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cocomposer.llm import ModelConfig, ScriptedBackend
from cocomposer.orchestrator import SessionConfig

TESTS_DIR = Path(__file__).parent

MELODY_ABC = """X:1
T:Journey Through the Highlands
M:6/8
L:1/8
Q:3/8=100
K:A
V:1 name="Bagpipe Lead" %%MIDI program 109
|: "A"A2e c2A | "D"dcd B2G | "E"EFE G2B | "A"A2A A3 :|
|: "A"ece a2f | "D"d2D F3 | "E"G2E B3 | "A"A2A A3 :|
"""

FULL_ABC = MELODY_ABC + """V:2 name="String Harmony" %%MIDI program 48
|: E2c A2F | F2D D2E | G2E F2D | E2E E3 :|
|: c2B A2c | B2A G2F | A2F E2D | C2C C3 :|
"""

APPROVE_REVIEW = (
    "Melodic Structure: strong thematic arc.\n"
    "Harmony and Counterpoint: supportive chords.\n"
    "Rhythmic Complexity: lively compound feel.\n"
    "Instrumentation and Timbre: fitting leads.\n"
    "Form and Structure: clean repeats.\n"
    "VERDICT: APPROVE"
)

REVISE_REVIEW = (
    "Melodic Structure: wanders.\n"
    "Harmony and Counterpoint: thin.\n"
    "Rhythmic Complexity: static.\n"
    "Instrumentation and Timbre: mismatched.\n"
    "Form and Structure: abrupt ending.\n"
    "VERDICT: REVISE"
)


def fenced(abc_text: str) -> str:
    return "```\n" + abc_text + "```"


def make_backend(iterations: int, approve_last: bool = True) -> ScriptedBackend:
    """A script driving `iterations` extra phases before (optionally) approving."""
    phases = iterations + 1
    reviews = [REVISE_REVIEW] * (phases - 1)
    reviews.append(APPROVE_REVIEW if approve_last else REVISE_REVIEW)
    return ScriptedBackend(
        {
            "Leader": ["Melody Agent: compose. Accompaniment Agent: support."] * phases,
            "Melody": [fenced(MELODY_ABC)] * phases,
            "Accompaniment": [fenced(FULL_ABC)] * phases,
            "Review": reviews,
        }
    )


@pytest.fixture
def model_config() -> ModelConfig:
    return ModelConfig("scripted-model", "http://localhost:9")


@pytest.fixture
def session_config(model_config) -> SessionConfig:
    return SessionConfig(model=model_config, max_iterations=2, fixed_time=1700000000.0)


@pytest.fixture
def melody_abc() -> str:
    return MELODY_ABC


@pytest.fixture
def full_abc() -> str:
    return FULL_ABC


@pytest.fixture
def synth_cmd() -> str:
    return f"{sys.executable} {TESTS_DIR / 'fake_synth.py'}"


@pytest.fixture
def bridge_cmd() -> str:
    return f"{sys.executable} {TESTS_DIR / 'stub_bridge.py'}"
