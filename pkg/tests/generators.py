"""Random tune generators for property and soundness testing.

Everything is driven by a seeded random.Random so hypothesis can shrink
on the seed. Generators build model objects directly (never via the
parser) so parser/serializer/validator can be cross-checked against the
constructed ground truth.
"""

from __future__ import annotations

import random
from fractions import Fraction

from cocomposer.notation.model import (
    Chord,
    KeySpec,
    Measure,
    Meter,
    Note,
    Pitch,
    Rest,
    TempoSpec,
    Tune,
    TuneHeader,
    Tuplet,
    Voice,
)

_LETTERS = "CDEFGAB"
_ACCIDENTALS = [None, None, None, None, "^", "_", "="]

METERS = (Meter(6, 8), Meter(4, 4), Meter(3, 4))


def rand_pitch(rng: random.Random) -> Pitch:
    return Pitch(
        letter=rng.choice(_LETTERS),
        accidental=rng.choice(_ACCIDENTALS),
        octave=rng.randint(-1, 1),
    )


def _split_amount(rng: random.Random, total: Fraction, max_parts: int) -> list[Fraction]:
    """Split a positive amount into 1..max_parts positive rational parts."""
    parts: list[Fraction] = []
    remaining = total
    while remaining > 0:
        if len(parts) == max_parts - 1 or rng.random() < 0.35:
            parts.append(remaining)
            break
        cut = remaining * Fraction(rng.randint(1, 3), rng.randint(4, 6))
        if cut == 0 or cut >= remaining:
            parts.append(remaining)
            break
        parts.append(cut)
        remaining -= cut
    rng.shuffle(parts)
    return parts


def _event_for(rng: random.Random, unit_amount: Fraction, allow_group: bool = True):
    """One event whose unit-duration is exactly unit_amount."""
    kind = rng.random()
    if kind < 0.55 or not allow_group:
        return Note(pitch=rand_pitch(rng), length=unit_amount)
    if kind < 0.7:
        return Rest(length=unit_amount)
    if kind < 0.85:
        inner_len = rng.choice([Fraction(1), Fraction(1, 2), Fraction(2)])
        outer = unit_amount / inner_len
        if outer <= 0:
            return Note(pitch=rand_pitch(rng), length=unit_amount)
        notes = tuple(
            Note(pitch=rand_pitch(rng), length=inner_len)
            for _ in range(rng.randint(2, 3))
        )
        return Chord(notes=notes, length=outer)
    p = rng.choice([2, 3, 4])
    q = {2: 3, 3: 2, 4: 3}[p]
    inner_each = unit_amount / q
    events = tuple(
        Note(pitch=rand_pitch(rng), length=inner_each) for _ in range(p)
    )
    return Tuplet(events=events, p=p, q=q, r=p)


def rand_measure(
    rng: random.Random, target_units: Fraction, max_events: int = 6
) -> Measure:
    """A measure whose unit-duration sum is exactly target_units."""
    parts = _split_amount(rng, target_units, max_events)
    events = tuple(_event_for(rng, part) for part in parts)
    return Measure(events=events)


def rand_header(rng: random.Random, meter: Meter) -> TuneHeader:
    return TuneHeader(
        reference_number=1,
        title="Generated",
        meter=meter,
        unit_note_length=Fraction(1, 8),
        tempo=TempoSpec(Fraction(1, 4), 120) if rng.random() < 0.5 else None,
        key=KeySpec(rng.choice(_LETTERS), rng.choice(["major", "minor"])),
    )


def rand_valid_tune(
    rng: random.Random, meter: Meter | None = None, n_measures: int = 8
) -> Tune:
    meter = meter or rng.choice(METERS)
    header = rand_header(rng, meter)
    target = meter.fraction / header.unit_note_length
    measures = tuple(rand_measure(rng, target) for _ in range(n_measures))
    voice = Voice(voice_id=1, name="Gen", midi_program=rng.randint(0, 127), measures=measures)
    return Tune(header=header, voices=(voice,))


def corrupt_measure(rng: random.Random, measure: Measure, target_units: Fraction) -> Measure:
    """Perturb a measure so its sum usually no longer matches the target."""
    choice = rng.random()
    events = list(measure.events)
    if choice < 0.4:
        # shorten: drop trailing events
        keep = rng.randint(0, max(0, len(events) - 1))
        events = events[:keep]
    elif choice < 0.8:
        # lengthen: append plain notes past the bar
        extra = _split_amount(rng, target_units * Fraction(rng.randint(1, 2), 3), 2)
        events.extend(Note(pitch=rand_pitch(rng), length=e) for e in extra)
    else:
        # double one event's length
        if events:
            i = rng.randrange(len(events))
            event = events[i]
            if isinstance(event, Note):
                events[i] = Note(pitch=event.pitch, length=event.length * 2)
            elif isinstance(event, Rest):
                events[i] = Rest(length=event.length * 2)
    return Measure(events=tuple(events), chord_symbols=measure.chord_symbols)


def rand_corrupt_tune(rng: random.Random, n_measures: int = 6) -> Tune:
    """A tune with a mix of exact and corrupted measures.

    The first measure stays exact (so no anacrusis exemption applies to
    the corruption sites) and every measure starts with a plain note, so
    repair can always shorten a straddler.
    """
    meter = rng.choice(METERS)
    header = rand_header(rng, meter)
    target = meter.fraction / header.unit_note_length
    measures = [rand_measure(rng, target)]
    for _ in range(n_measures - 1):
        base = rand_measure(rng, target)
        if rng.random() < 0.6:
            measures.append(corrupt_measure(rng, base, target))
        else:
            measures.append(base)
    voices = tuple(
        Voice(voice_id=i + 1, name=f"V{i + 1}", midi_program=rng.randint(0, 127),
              measures=tuple(measures))
        for i in range(rng.randint(1, 2))
    )
    return Tune(header=header, voices=voices)
