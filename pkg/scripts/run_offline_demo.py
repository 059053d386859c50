#!/usr/bin/env python3
"""Offline demo: one fully scripted five-agent composition session.

No network or credentials needed. A ScriptedBackend replays canned agent
replies, the orchestrator runs its usual Leader -> Melody ->
Accompaniment -> Revision -> Review turns, and the artifacts land in the
output directory: transcript.json, score.abc, and score.mid.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from cocomposer.llm import ModelConfig, ScriptedBackend
from cocomposer.midi import render_midi
from cocomposer.notation import serialize_abc
from cocomposer.orchestrator import (
    CompositionBrief,
    SessionConfig,
    dump_transcript,
    run_session,
)

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

REVIEW = (
    "Melodic Structure: clear four-bar phrases with a satisfying return.\n"
    "Harmony and Counterpoint: the string line supports the lead in sixths.\n"
    "Rhythmic Complexity: steady compound-meter lilt.\n"
    "Instrumentation and Timbre: bagpipe lead over strings reads well.\n"
    "Form and Structure: two repeated strains, AABB.\n"
    "VERDICT: APPROVE"
)


def scripted_backend(phases: int) -> ScriptedBackend:
    fenced = "```\n{}```".format
    return ScriptedBackend(
        {
            "Leader": ["Melody Agent: compose the lead. Accompaniment Agent: support it."] * phases,
            "Melody": [fenced(MELODY_ABC)] * phases,
            "Accompaniment": [fenced(FULL_ABC)] * phases,
            "Review": [REVIEW] * phases,
        }
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_output", help="artifact directory")
    parser.add_argument(
        "--iterations", type=int, default=2, help="review-driven revision cap"
    )
    args = parser.parse_args(argv)

    config = SessionConfig(
        model=ModelConfig("scripted-demo", "http://localhost:0"),
        max_iterations=args.iterations,
        fixed_time=0.0,
    )
    brief = CompositionBrief(
        "Journey Through the Highlands: A lively Scottish folk tune with a "
        "bagpipe lead, evoking rolling green hills."
    )
    result = run_session(brief, config, scripted_backend(args.iterations + 1), "demo")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "transcript.json").write_text(dump_transcript(result, "demo", config))
    print(f"session success={result.success} iterations={result.iterations_used}")
    print("turns:", " -> ".join(result.transcript.roles()))
    if not result.success or result.final_tune is None:
        print(f"failed: {result.failure_reason}", file=sys.stderr)
        return 1
    (out / "score.abc").write_text(serialize_abc(result.final_tune))
    (out / "score.mid").write_bytes(render_midi(result.final_tune))
    for name in ("transcript.json", "score.abc", "score.mid"):
        print(f"wrote {out / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
