"""Canonical ABC emitter.

The output is a normal form: parsing it back yields a structurally equal
Tune, and serializing an already-canonical parse is byte-identical.
Layout rules: one header line per field, the one-line voice form
``V:1 name="..." %%MIDI program N``, measures joined with `` | ``, repeat
sections fenced by ``|: ... :|`` on their own lines, a plain line break
after every fourth measure otherwise, and ``|]`` closing each voice.
"""

from __future__ import annotations

from fractions import Fraction

from .model import (
    Chord,
    Event,
    Grace,
    Measure,
    Meter,
    Note,
    Pitch,
    Rest,
    Tune,
    Tuplet,
    Voice,
    frac_text,
)
from .parse import default_tuplet_q

_MEASURES_PER_LINE = 4


def _length_text(length: Fraction) -> str:
    if length == 1:
        return ""
    if length.denominator == 1:
        return str(length.numerator)
    if length.numerator == 1 and length.denominator == 2:
        return "/"
    return f"{length.numerator}/{length.denominator}"


def _pitch_text(pitch: Pitch) -> str:
    accidental = pitch.accidental or ""
    if pitch.octave >= 1:
        return accidental + pitch.letter.lower() + "'" * (pitch.octave - 1)
    return accidental + pitch.letter + "," * (-pitch.octave)


def _note_text(note: Note) -> str:
    return (
        "".join(note.decorations)
        + "(" * note.slur_open
        + _pitch_text(note.pitch)
        + _length_text(note.length)
        + ("-" if note.tie else "")
        + ")" * note.slur_close
    )


def _inner_note_text(note: Note) -> str:
    return _pitch_text(note.pitch) + _length_text(note.length) + ("-" if note.tie else "")


def event_text(event: Event, meter: Meter) -> str:
    if isinstance(event, Note):
        return _note_text(event)
    if isinstance(event, Rest):
        return "".join(event.decorations) + "z" + _length_text(event.length)
    if isinstance(event, Chord):
        return (
            "".join(event.decorations)
            + "(" * event.slur_open
            + "["
            + "".join(_inner_note_text(n) for n in event.notes)
            + "]"
            + _length_text(event.length)
            + ("-" if event.tie else "")
            + ")" * event.slur_close
        )
    if isinstance(event, Grace):
        return "{" + ("/" if event.slashed else "") + "".join(
            _inner_note_text(n) for n in event.notes
        ) + "}"
    if isinstance(event, Tuplet):
        if event.q == default_tuplet_q(event.p, meter) and event.r == event.p:
            marker = f"({event.p}"
        else:
            marker = f"({event.p}:{event.q}:{event.r}"
        parts = []
        for i, member in enumerate(event.events):
            parts.append(event_text(member, meter))
            if member.space_after and i < len(event.events) - 1:
                parts.append(" ")
        return marker + "".join(parts)
    raise TypeError(f"not an event: {event!r}")


def measure_text(measure: Measure, meter: Meter) -> str:
    symbols: dict[int, list[str]] = {}
    for index, text in measure.chord_symbols:
        symbols.setdefault(index, []).append(f'"{text}"')
    parts: list[str] = []
    end_symbols = symbols.get(len(measure.events), [])
    for i, event in enumerate(measure.events):
        parts.append("".join(symbols.get(i, [])))
        parts.append(event_text(event, meter))
        last = i == len(measure.events) - 1
        if event.space_after and (not last or end_symbols):
            parts.append(" ")
    parts.append("".join(end_symbols))
    return "".join(parts)


def _voice_lines(voice: Voice, meter: Meter) -> list[str]:
    lines: list[str] = []
    buf: list[str] = []
    buf_opens = False

    def flush(end_bar: str) -> None:
        nonlocal buf, buf_opens
        if not buf:
            return
        prefix = "|: " if buf_opens else ""
        lines.append(prefix + " | ".join(buf) + end_bar)
        buf = []
        buf_opens = False

    total = len(voice.measures)
    for i, measure in enumerate(voice.measures):
        if measure.open_repeat:
            flush(" |")
            buf_opens = True
        buf.append(measure_text(measure, meter))
        if measure.close_repeat:
            flush(" :|")
        elif i == total - 1:
            flush(" |]")
        elif len(buf) >= _MEASURES_PER_LINE:
            flush(" |")
    return lines


def _voice_header(voice: Voice) -> str:
    parts = [f"V:{voice.voice_id}"]
    if voice.name:
        parts.append(f'name="{voice.name}"')
    if voice.midi_program is not None:
        parts.append(f"%%MIDI program {voice.midi_program}")
    return " ".join(parts)


def serialize_abc(tune: Tune) -> str:
    """Emit a Tune as canonical ABC text (LF line endings, trailing newline)."""
    header = tune.header
    lines = [
        f"X:{header.reference_number}",
        f"T:{header.title}",
        f"M:{header.meter}",
        f"L:{frac_text(header.unit_note_length)}",
    ]
    if header.tempo is not None:
        lines.append(f"Q:{frac_text(header.tempo.beat_unit)}={header.tempo.beats_per_minute}")
    lines.append(f"K:{header.key}")
    for voice in tune.voices:
        lines.append(_voice_header(voice))
        lines.extend(_voice_lines(voice, header.meter))
    return "\n".join(lines) + "\n"
