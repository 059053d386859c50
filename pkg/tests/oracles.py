"""Independent oracles the test suite checks production code against.

Everything here recomputes results from first principles: durations by a
direct recursive fold over the event model, MIDI by a strict from-scratch
SMF byte reader, note counts by a plain enumerator over expanded measures.
None of it calls the production validate/render paths.
"""

from __future__ import annotations

import struct
from fractions import Fraction

from cocomposer.notation.model import Chord, Grace, Measure, Note, Rest, Tuplet, Voice


def event_whole_notes(event, unit: Fraction) -> Fraction:
    """Duration of one event in whole notes, folded independently."""
    if isinstance(event, Note) or isinstance(event, Rest):
        return event.length * unit
    if isinstance(event, Chord):
        return event.notes[0].length * event.length * unit
    if isinstance(event, Grace):
        return Fraction(0)
    if isinstance(event, Tuplet):
        inner = sum((event_whole_notes(e, unit) for e in event.events), Fraction(0))
        return inner * Fraction(event.q, event.p)
    raise TypeError(f"unexpected event {event!r}")


def measure_whole_notes(measure: Measure, unit: Fraction) -> Fraction:
    return sum((event_whole_notes(e, unit) for e in measure.events), Fraction(0))


def count_note_units(measure: Measure) -> int:
    """Sounding note units in a measure (chord members counted singly)."""

    def count(events) -> int:
        total = 0
        for event in events:
            if isinstance(event, Note):
                total += 1
            elif isinstance(event, Chord):
                total += len(event.notes)
            elif isinstance(event, Tuplet):
                total += count(event.events)
        return total

    return count(measure.events)


def expand_repeats_oracle(voice: Voice) -> list[Measure]:
    """Playback order, implemented as an explicit index walk."""
    out: list[Measure] = []
    section_start = 0
    measures = voice.measures
    i = 0
    pending: list[Measure] = []
    for i, measure in enumerate(measures):
        if measure.open_repeat:
            out.extend(pending)
            pending = []
            section_start = i
        pending.append(measure)
        if measure.close_repeat:
            out.extend(pending)
            out.extend(pending)
            pending = []
            section_start = i + 1
    out.extend(pending)
    return out


# --- strict SMF reader -------------------------------------------------


class SmfError(Exception):
    pass


def _read_vlq(data: bytes, pos: int) -> tuple[int, int]:
    value = 0
    for _ in range(4):
        if pos >= len(data):
            raise SmfError("truncated VLQ")
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos
    raise SmfError("VLQ longer than four bytes")


def read_smf(blob: bytes) -> dict:
    """Parse an SMF strictly; raises on anything out of contract.

    Requires full status bytes (no running status) and exact chunk
    lengths. Returns {format, ntrks, division, tracks} where each track
    is a list of (abs_tick, kind, payload) tuples.
    """
    if blob[:4] != b"MThd":
        raise SmfError("missing MThd")
    header_len, fmt, ntrks, division = struct.unpack(">IHHH", blob[4:14])
    if header_len != 6:
        raise SmfError(f"MThd length {header_len} != 6")
    pos = 14
    tracks = []
    for _ in range(ntrks):
        if blob[pos : pos + 4] != b"MTrk":
            raise SmfError(f"missing MTrk at {pos}")
        (length,) = struct.unpack(">I", blob[pos + 4 : pos + 8])
        start = pos + 8
        end = start + length
        if end > len(blob):
            raise SmfError("track overruns file")
        tracks.append(_read_track(blob[start:end]))
        pos = end
    if pos != len(blob):
        raise SmfError(f"{len(blob) - pos} trailing bytes")
    return {"format": fmt, "ntrks": ntrks, "division": division, "tracks": tracks}


def _read_track(data: bytes) -> list[tuple[int, str, tuple]]:
    events: list[tuple[int, str, tuple]] = []
    pos = 0
    tick = 0
    ended = False
    while pos < len(data):
        if ended:
            raise SmfError("events after end_of_track")
        delta, pos = _read_vlq(data, pos)
        tick += delta
        status = data[pos]
        pos += 1
        if status == 0xFF:
            meta = data[pos]
            pos += 1
            length, pos = _read_vlq(data, pos)
            payload = data[pos : pos + length]
            pos += length
            if meta == 0x2F:
                if length != 0:
                    raise SmfError("end_of_track with payload")
                events.append((tick, "end_of_track", ()))
                ended = True
            elif meta == 0x51:
                if length != 3:
                    raise SmfError("tempo meta length != 3")
                events.append((tick, "tempo", (int.from_bytes(payload, "big"),)))
            elif meta == 0x58:
                if length != 4:
                    raise SmfError("time sig meta length != 4")
                events.append((tick, "time_signature", tuple(payload)))
            elif meta == 0x01:
                events.append((tick, "text", (payload.decode("utf-8"),)))
            else:
                events.append((tick, f"meta_{meta:02x}", (bytes(payload),)))
        elif status & 0xF0 == 0x90:
            key, velocity = data[pos], data[pos + 1]
            pos += 2
            events.append((tick, "note_on", (status & 0x0F, key, velocity)))
        elif status & 0xF0 == 0x80:
            key, velocity = data[pos], data[pos + 1]
            pos += 2
            events.append((tick, "note_off", (status & 0x0F, key, velocity)))
        elif status & 0xF0 == 0xC0:
            program = data[pos]
            pos += 1
            events.append((tick, "program_change", (status & 0x0F, program)))
        else:
            raise SmfError(f"unexpected status byte 0x{status:02x}")
    if not ended:
        raise SmfError("track missing end_of_track")
    if pos != len(data):
        raise SmfError("track length mismatch")
    return events
