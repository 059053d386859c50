"""Timing and format lint over parsed tunes.

Duration checks use exact rational arithmetic: a measure is flagged when
its event durations (times the unit note length) do not sum to the meter.
A strictly shorter first measure of a voice is treated as a pickup and not
flagged; every other measure must match exactly.
"""

from __future__ import annotations

from fractions import Fraction

from .model import (
    Measure,
    Rational,
    Tune,
    ValidationIssue,
    event_unit_duration,
    frac_text,
)


def measure_duration(measure: Measure, unit: Rational) -> Rational:
    """Exact duration of a measure in whole-note units, graces excluded."""
    total = sum((event_unit_duration(e) for e in measure.events), Fraction(0))
    return total * unit


def _format_issue(voice_id: int, measure_index: int, detail: str) -> ValidationIssue:
    return ValidationIssue(
        voice_id=voice_id, measure_index=measure_index, kind="format_error", detail=detail
    )


def validate(tune: Tune) -> list[ValidationIssue]:
    """Return all lint issues, in voice order then measure order."""
    issues: list[ValidationIssue] = []
    if not tune.voices:
        issues.append(_format_issue(0, -1, "tune has no voices"))
        return issues
    expected = tune.header.meter.fraction
    unit = tune.header.unit_note_length
    seen_ids: set[int] = set()
    for voice in tune.voices:
        if voice.voice_id <= 0:
            issues.append(
                _format_issue(voice.voice_id, -1, f"invalid voice id {voice.voice_id}")
            )
        elif voice.voice_id in seen_ids:
            issues.append(
                _format_issue(voice.voice_id, -1, f"duplicate voice id {voice.voice_id}")
            )
        seen_ids.add(voice.voice_id)
        if voice.midi_program is not None and not 0 <= voice.midi_program <= 127:
            issues.append(
                _format_issue(
                    voice.voice_id,
                    -1,
                    f"midi program {voice.midi_program} outside 0-127",
                )
            )
        for index, measure in enumerate(voice.measures):
            for symbol_index, text in measure.chord_symbols:
                if not text.strip() or '"' in text or "\n" in text:
                    issues.append(
                        _format_issue(
                            voice.voice_id, index, f"malformed chord symbol {text!r}"
                        )
                    )
                elif not 0 <= symbol_index <= len(measure.events):
                    issues.append(
                        _format_issue(
                            voice.voice_id,
                            index,
                            f"chord symbol index {symbol_index} out of range",
                        )
                    )
            actual = measure_duration(measure, unit)
            if actual == expected:
                continue
            if index == 0 and actual < expected:
                continue  # pickup measure
            issues.append(
                ValidationIssue(
                    voice_id=voice.voice_id,
                    measure_index=index,
                    kind="duration_mismatch",
                    detail=(
                        f"measure {index + 1} of voice {voice.voice_id} sums to "
                        f"{frac_text(actual)}, meter requires {frac_text(expected)}"
                    ),
                    expected=expected,
                    actual=actual,
                )
            )
    return issues


def issues_to_json(issues: list[ValidationIssue]) -> list[dict]:
    return [issue.to_json_dict() for issue in issues]
