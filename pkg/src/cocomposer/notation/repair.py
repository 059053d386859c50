"""Deterministic timing repair.

Only measures flagged by :func:`validate` as duration mismatches are
touched; everything else is preserved byte-for-byte under canonical
serialization. Fix order per measure:

- deficit: append rests, largest binary value first, with one exact
  non-dyadic remainder rest if needed (``7/3`` units becomes ``z2 z1/3``);
- excess: drop events starting at or past the bar, shorten the event that
  straddles it, and if the straddler is an unshortenable group, delete it
  and pad the gap with rests.

A measure whose very first event is an unshortenable group longer than the
whole meter cannot be repaired and raises :class:`RepairError`.
"""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

from .errors import RepairError
from .model import (
    Chord,
    Event,
    Grace,
    Measure,
    Note,
    RepairAction,
    Rest,
    Tune,
    Tuplet,
    event_unit_duration,
    frac_text,
)
from .validate import measure_duration


def _is_dyadic(value: Fraction) -> bool:
    return value.denominator & (value.denominator - 1) == 0


def _binary_rests(amount: Fraction) -> list[Fraction]:
    """Greedy powers-of-two decomposition; requires a dyadic amount."""
    out: list[Fraction] = []
    remaining = amount
    while remaining > 0:
        step = Fraction(1)
        while step * 2 <= remaining:
            step *= 2
        while step > remaining:
            step /= 2
        out.append(step)
        remaining -= step
    return out


def rest_decomposition(deficit: Fraction) -> list[Fraction]:
    """Rest lengths (in unit multiples) that exactly fill a deficit."""
    if deficit <= 0:
        return []
    if _is_dyadic(deficit):
        return _binary_rests(deficit)
    whole = deficit.numerator // deficit.denominator
    out = _binary_rests(Fraction(whole)) if whole else []
    remainder = deficit - whole
    if remainder:
        out.append(remainder)
    return out


def _rest_token(length: Fraction) -> str:
    if length == 1:
        return "z"
    if length.denominator == 1:
        return f"z{length.numerator}"
    if length.numerator == 1 and length.denominator == 2:
        return "z/"
    return f"z{length.numerator}/{length.denominator}"


def _pad_measure(measure: Measure, deficit_units: Fraction) -> tuple[Measure, str]:
    rests = tuple(Rest(length=l, space_after=True) for l in rest_decomposition(deficit_units))
    detail = "appended " + " ".join(_rest_token(r.length) for r in rests)
    return replace(measure, events=measure.events + rests), detail


def _shorten(event: Event, needed_units: Fraction) -> Event | None:
    """Shrink a single event to a target duration, or None if impossible."""
    if isinstance(event, (Note, Rest)):
        return replace(event, length=needed_units)
    if isinstance(event, Chord):
        inner = event.notes[0].length if event.notes else Fraction(1)
        return replace(event, length=needed_units / inner)
    return None  # tuplets and graces cannot be rescaled cleanly


def _trim_measure(
    measure: Measure, expected_units: Fraction, voice_id: int, index: int
) -> tuple[Measure, list[RepairAction]]:
    actions: list[RepairAction] = []
    kept: list[Event] = []
    onset = Fraction(0)
    pad_units = Fraction(0)
    dropped = 0
    for position, event in enumerate(measure.events):
        duration = event_unit_duration(event)
        end = onset + duration
        if onset >= expected_units:
            dropped = len(measure.events) - position
            break
        if end <= expected_units:
            kept.append(event)
            onset = end
            continue
        needed = expected_units - onset
        shortened = _shorten(event, needed)
        if shortened is not None:
            kept.append(replace(shortened, space_after=True))
            actions.append(
                RepairAction(
                    voice_id=voice_id,
                    measure_index=index,
                    kind="shorten_event",
                    detail=(
                        f"shortened event {position + 1} from {frac_text(duration)} to "
                        f"{frac_text(needed)} units"
                    ),
                )
            )
        elif onset > 0:
            pad_units = needed
            dropped = len(measure.events) - position
            break
        else:
            raise RepairError(
                f"measure {index + 1} of voice {voice_id}: indivisible group of "
                f"{frac_text(duration)} units exceeds the meter"
            )
        onset = expected_units
        dropped = len(measure.events) - position - 1
        break
    if dropped:
        actions.append(
            RepairAction(
                voice_id=voice_id,
                measure_index=index,
                kind="delete_events",
                detail=f"deleted {dropped} trailing event(s) past the bar",
            )
        )
    if kept:
        kept[-1] = replace(kept[-1], space_after=True)
    symbols = tuple((i, t) for i, t in measure.chord_symbols if i <= len(kept))
    trimmed = replace(measure, events=tuple(kept), chord_symbols=symbols)
    if pad_units:
        trimmed, detail = _pad_measure(trimmed, pad_units)
        actions.append(
            RepairAction(
                voice_id=voice_id, measure_index=index, kind="append_rests", detail=detail
            )
        )
    return trimmed, actions


def repair(tune: Tune) -> tuple[Tune, list[RepairAction]]:
    """Fix every duration mismatch; returns the new tune and the edit log."""
    expected = tune.header.meter.fraction
    unit = tune.header.unit_note_length
    expected_units = expected / unit
    actions: list[RepairAction] = []
    new_voices = []
    changed_any = False
    for voice in tune.voices:
        measures = list(voice.measures)
        changed = False
        for index, measure in enumerate(voice.measures):
            actual = measure_duration(measure, unit)
            if actual == expected:
                continue
            if index == 0 and actual < expected:
                continue  # pickup measure stays untouched
            if actual < expected:
                deficit_units = expected_units - actual / unit
                measures[index], detail = _pad_measure(measure, deficit_units)
                actions.append(
                    RepairAction(
                        voice_id=voice.voice_id,
                        measure_index=index,
                        kind="append_rests",
                        detail=detail,
                    )
                )
            else:
                measures[index], trim_actions = _trim_measure(
                    measure, expected_units, voice.voice_id, index
                )
                actions.extend(trim_actions)
            changed = True
        if changed:
            new_voices.append(replace(voice, measures=tuple(measures)))
            changed_any = True
        else:
            new_voices.append(voice)
    if not changed_any:
        return tune, []
    return replace(tune, voices=tuple(new_voices)), actions


def actions_to_json(actions: list[RepairAction]) -> list[dict]:
    return [action.to_json_dict() for action in actions]
