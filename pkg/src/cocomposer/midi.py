"""Standard MIDI File (format 1) rendering.

Track 0 carries the time signature and tempo; each voice renders to its
own track with a program change, its chord symbols as text meta events,
and tie-merged notes. Repeats are expanded here (each ``|: ... :|``
section plays twice); the notation layer keeps them structural.

All timing runs through exact fractions of a whole note and must land on
integer ticks at the configured resolution, otherwise rendering fails
rather than rounding.
"""

from __future__ import annotations

import os
import shlex
import struct
import subprocess
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from .notation.errors import StructureError
from .notation.keys import key_signature
from .notation.model import (
    ACCIDENTAL_SEMITONES,
    Chord,
    Event,
    Grace,
    Measure,
    Note,
    Rest,
    Tune,
    Tuplet,
    Voice,
    event_unit_duration,
)
from .notation.validate import validate


class RenderError(Exception):
    """The tune cannot be rendered at the configured resolution."""


class SynthError(Exception):
    """The external synthesizer failed or produced no output."""


DEFAULT_TEMPO_US = 500_000  # 120 quarter notes per minute

_LETTER_SEMITONES = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

# Ordering of simultaneous events within a track.
_EVENT_CLASS = {
    "time_signature": 0,
    "program_change": 0,
    "tempo": 1,
    "text": 1,
    "note_off": 2,
    "note_on": 3,
    "end_of_track": 9,
}


@dataclass(frozen=True)
class MidiEvent:
    tick: int
    kind: str
    channel: int | None
    data: tuple

    def __post_init__(self) -> None:
        if self.tick < 0:
            raise ValueError("tick must be non-negative")
        if self.kind not in _EVENT_CLASS:
            raise ValueError(f"unknown event kind {self.kind!r}")


@dataclass(frozen=True)
class RenderConfig:
    ticks_per_quarter: int = 480
    default_velocity: int = 90
    channel_assignment: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.ticks_per_quarter <= 0 or self.ticks_per_quarter % 96 != 0:
            raise ValueError("ticks_per_quarter must be a positive multiple of 96")
        if not 0 <= self.default_velocity <= 127:
            raise ValueError("default_velocity must be in 0..127")

    def channels(self, voice_count: int) -> tuple[int, ...]:
        if self.channel_assignment is not None:
            chosen = self.channel_assignment[:voice_count]
        else:
            chosen = tuple(c for c in range(16) if c != 9)[:voice_count]
        if len(chosen) < voice_count:
            raise RenderError(f"not enough channels for {voice_count} voices")
        if any(not 0 <= c <= 15 for c in chosen):
            raise RenderError("channels must be in 0..15")
        return tuple(chosen)


def expand_repeats(voice: Voice) -> tuple[Measure, ...]:
    """Playback order of a voice's measures, each repeat section doubled."""
    expanded: list[Measure] = []
    section: list[Measure] = []
    open_seen = False
    for measure in voice.measures:
        if measure.open_repeat:
            if open_seen:
                raise StructureError(
                    f"voice {voice.voice_id}: nested repeat open"
                )
            expanded.extend(section)
            section = []
            open_seen = True
        section.append(replace(measure, open_repeat=False, close_repeat=False))
        if measure.close_repeat:
            expanded.extend(section)
            expanded.extend(section)
            section = []
            open_seen = False
    if open_seen:
        raise StructureError(f"voice {voice.voice_id}: repeat opened but never closed")
    expanded.extend(section)
    return tuple(expanded)


def _to_tick(position: Fraction, ticks_per_quarter: int) -> int:
    ticks = position * 4 * ticks_per_quarter
    if ticks.denominator != 1:
        raise RenderError(
            f"duration {position} not representable at {ticks_per_quarter} ticks per quarter"
        )
    return int(ticks)


class _PitchState:
    """Measure-local accidental tracking on top of the key signature."""

    def __init__(self, signature: dict[str, int]):
        self._signature = signature
        self._local: dict[tuple[str, int], int] = {}

    def reset(self) -> None:
        self._local = {}

    def midi_key(self, note: Note) -> int:
        pitch = note.pitch
        if pitch.accidental is not None:
            alteration = ACCIDENTAL_SEMITONES[pitch.accidental]
            self._local[(pitch.letter, pitch.octave)] = alteration
        else:
            alteration = self._local.get(
                (pitch.letter, pitch.octave), self._signature.get(pitch.letter, 0)
            )
        key = 60 + 12 * pitch.octave + _LETTER_SEMITONES[pitch.letter] + alteration
        if not 0 <= key <= 127:
            raise RenderError(f"pitch {key} outside the MIDI range")
        return key


def _sounding_units(
    events: tuple[Event, ...],
    start: Fraction,
    unit: Fraction,
    state: _PitchState,
) -> tuple[list[tuple[Fraction, Fraction, int, bool]], Fraction]:
    """Flatten events to (start, end, key, tied) units in whole notes."""
    units: list[tuple[Fraction, Fraction, int, bool]] = []
    position = start
    for event in events:
        if isinstance(event, Note):
            end = position + event.length * unit
            units.append((position, end, state.midi_key(event), event.tie))
            position = end
        elif isinstance(event, Rest):
            position += event.length * unit
        elif isinstance(event, Chord):
            end = position + event.unit_duration * unit
            for inner in event.notes:
                units.append(
                    (position, end, state.midi_key(inner), event.tie or inner.tie)
                )
            position = end
        elif isinstance(event, Grace):
            continue  # zero duration, not rendered
        elif isinstance(event, Tuplet):
            inner_units, position = _sounding_units(
                event.events, position, unit * Fraction(event.q, event.p), state
            )
            units.extend(inner_units)
        else:
            raise RenderError(f"cannot render event {event!r}")
    return units, position


def _merge_ties(
    units: list[tuple[Fraction, Fraction, int, bool]],
) -> list[tuple[Fraction, Fraction, int]]:
    merged: list[list] = []
    open_by_key: dict[int, int] = {}
    for start, end, key, tied in units:
        index = open_by_key.get(key)
        if index is not None and merged[index][1] == start:
            merged[index][1] = end
            if not tied:
                open_by_key.pop(key)
        else:
            merged.append([start, end, key])
            if tied:
                open_by_key[key] = len(merged) - 1
            else:
                open_by_key.pop(key, None)
    return [(s, e, k) for s, e, k in merged]


def _voice_track_events(
    tune: Tune, voice: Voice, channel: int, config: RenderConfig
) -> list[MidiEvent]:
    unit = tune.header.unit_note_length
    tpq = config.ticks_per_quarter
    state = _PitchState(key_signature(tune.header.key))
    events: list[MidiEvent] = [
        MidiEvent(0, "program_change", channel, (voice.midi_program or 0,))
    ]
    units: list[tuple[Fraction, Fraction, int, bool]] = []
    position = Fraction(0)
    for measure in expand_repeats(voice):
        state.reset()
        offsets = [Fraction(0)]
        for event in measure.events:
            offsets.append(offsets[-1] + event_unit_duration(event) * unit)
        for index, text in measure.chord_symbols:
            tick = _to_tick(position + offsets[min(index, len(measure.events))], tpq)
            events.append(MidiEvent(tick, "text", None, (text,)))
        measure_units, position = _sounding_units(measure.events, position, unit, state)
        units.extend(measure_units)
    for start, end, key in _merge_ties(units):
        events.append(
            MidiEvent(_to_tick(start, tpq), "note_on", channel, (key, config.default_velocity))
        )
        events.append(MidiEvent(_to_tick(end, tpq), "note_off", channel, (key, 0)))
    events.append(MidiEvent(_to_tick(position, tpq), "end_of_track", None, ()))
    return _sorted_events(events)


def _conductor_events(tune: Tune) -> list[MidiEvent]:
    meter = tune.header.meter
    dd = meter.denominator.bit_length() - 1
    if 2**dd != meter.denominator:
        raise RenderError(f"meter denominator {meter.denominator} is not a power of two")
    if meter.numerator > 255:
        raise RenderError("meter numerator too large for SMF")
    tempo_us = (
        tune.header.tempo.microseconds_per_quarter()
        if tune.header.tempo is not None
        else DEFAULT_TEMPO_US
    )
    return [
        MidiEvent(0, "time_signature", None, (meter.numerator, dd, 24, 8)),
        MidiEvent(0, "tempo", None, (tempo_us,)),
        MidiEvent(0, "end_of_track", None, ()),
    ]


def _sorted_events(events: list[MidiEvent]) -> list[MidiEvent]:
    return [
        event
        for _, _, _, event in sorted(
            (event.tick, _EVENT_CLASS[event.kind], seq, event)
            for seq, event in enumerate(events)
        )
    ]


def render_events(tune: Tune, config: RenderConfig | None = None) -> list[list[MidiEvent]]:
    """Per-track event lists (track 0 first), already time-ordered."""
    config = config or RenderConfig()
    issues = validate(tune)
    if issues:
        raise RenderError(f"tune fails validation: {issues[0].detail}")
    channels = config.channels(len(tune.voices))
    tracks = [_conductor_events(tune)]
    for voice, channel in zip(tune.voices, channels):
        tracks.append(_voice_track_events(tune, voice, channel, config))
    return tracks


def _vlq(value: int) -> bytes:
    if value < 0:
        raise RenderError("cannot encode negative delta")
    out = bytearray([value & 0x7F])
    value >>= 7
    while value:
        out.insert(0, 0x80 | (value & 0x7F))
        value >>= 7
    return bytes(out)


def _event_bytes(event: MidiEvent) -> bytes:
    kind, data = event.kind, event.data
    if kind == "note_on":
        return bytes([0x90 | event.channel, data[0], data[1]])
    if kind == "note_off":
        return bytes([0x80 | event.channel, data[0], data[1]])
    if kind == "program_change":
        program = data[0]
        if not 0 <= program <= 127:
            raise RenderError(f"midi program {program} outside 0-127")
        return bytes([0xC0 | event.channel, program])
    if kind == "tempo":
        return b"\xff\x51\x03" + data[0].to_bytes(3, "big")
    if kind == "time_signature":
        return b"\xff\x58\x04" + bytes(data)
    if kind == "text":
        payload = data[0].encode("utf-8")
        return b"\xff\x01" + _vlq(len(payload)) + payload
    if kind == "end_of_track":
        return b"\xff\x2f\x00"
    raise RenderError(f"unknown event kind {kind!r}")


def _track_chunk(events: list[MidiEvent]) -> bytes:
    payload = bytearray()
    last_tick = 0
    for event in events:
        payload += _vlq(event.tick - last_tick)
        payload += _event_bytes(event)
        last_tick = event.tick
    return b"MTrk" + struct.pack(">I", len(payload)) + bytes(payload)


def render_midi(tune: Tune, config: RenderConfig | None = None) -> bytes:
    """Render a validated tune to format-1 SMF bytes."""
    config = config or RenderConfig()
    tracks = render_events(tune, config)
    header = b"MThd" + struct.pack(">IHHH", 6, 1, len(tracks), config.ticks_per_quarter)
    return header + b"".join(_track_chunk(track) for track in tracks)


def render_wav(midi_path: str | Path, wav_path: str | Path, synth_cmd: str | None = None) -> Path:
    """Run the external synthesizer as ``<cmd> <in.mid> <out.wav>``."""
    cmd = synth_cmd if synth_cmd is not None else os.environ.get("COCOMPOSER_SYNTH_CMD", "")
    if not cmd:
        raise SynthError("no synthesizer configured (set COCOMPOSER_SYNTH_CMD)")
    argv = shlex.split(cmd) + [str(midi_path), str(wav_path)]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as err:
        raise SynthError(f"cannot run synthesizer {argv[0]!r}: {err}") from err
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout or "").strip()[-200:]
        raise SynthError(f"synthesizer exited with {proc.returncode}: {tail}")
    path = Path(wav_path)
    if not path.exists():
        raise SynthError("synthesizer reported success but wrote no output file")
    return path
