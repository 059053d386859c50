"""Parser for the supported ABC subset.

The grammar covers: headers X, T, M, L, Q, K; voice declarations ``V:``
(including the one-line ``V:1 name="..." %%MIDI program N`` form); music
lines with notes, rests, chords ``[..]``, tuplets ``(p`` / ``(p:q:r``,
grace groups ``{..}``, ties, broken rhythm ``>`` ``<``, quoted chord
symbols, decorations, slurs, and the bar tokens ``|  |:  :|  ||  |]  ::``.

Anything outside the subset raises :class:`ParseError` rather than being
silently guessed at; benign informational header fields are skipped.
"""

from __future__ import annotations

import re
from dataclasses import replace
from fractions import Fraction

from .errors import ParseError
from .keys import parse_key
from .model import (
    Chord,
    Event,
    Grace,
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

# Informational fields that carry no musical meaning for playback.
_BENIGN_FIELDS = set("CORSNHBDFGA")

# Single-character decoration shorthands (never note letters).
_SHORTHAND_DECORATIONS = set(".~HLMOPSTuv")

# Bar tokens, longest first so the scanner can greedily match.
_BAR_TOKENS = (
    (":||:", True, True),
    (":|:", True, True),
    ("::", True, True),
    (":|", True, False),
    ("|:", False, True),
    ("||", False, False),
    ("|]", False, False),
    ("|", False, False),
)

_VOICE_ATTR_RE = re.compile(r'(\w+)=(?:"([^"]*)"|(\S+))')
_MIDI_PROGRAM_RE = re.compile(r"MIDI\s+program\s+(\d+)(?:\s+(\d+))?\s*$")
_TUPLET_RE = re.compile(r"(\d+)(?::(\d*))?(?::(\d*))?")

# Default "q" of a (p tuplet, per the ABC convention; values not listed
# depend on whether the meter is compound.
_TUPLET_DEFAULT_Q = {2: 3, 3: 2, 4: 3, 6: 2, 8: 3}


def default_tuplet_q(p: int, meter: Meter) -> int:
    fixed = _TUPLET_DEFAULT_Q.get(p)
    if fixed is not None:
        return fixed
    compound = meter.numerator > 3 and meter.numerator % 3 == 0
    return 3 if compound else 2


def _strip_comment(line: str) -> str:
    """Drop a trailing % comment; %% pairs and quoted text are preserved."""
    in_quote = False
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == '"':
            in_quote = not in_quote
        elif ch == "%" and not in_quote:
            if i + 1 < len(line) and line[i + 1] == "%":
                i += 2
                continue
            return line[:i]
        i += 1
    return line


class _VoiceBuilder:
    def __init__(self, voice_id: int):
        self.voice_id = voice_id
        self.name: str | None = None
        self.midi_program: int | None = None
        self.measures: list[Measure] = []
        self.events: list[Event] = []
        self.symbols: list[tuple[int, str]] = []
        self.pending_open = False
        self.pending_decorations: list[str] = []
        self.pending_slurs = 0
        self.pending_broken: str | None = None
        self.tuplet_spec: tuple[int, int, int] | None = None
        self.tuplet_remaining = 0
        self.tuplet_events: list[Event] = []
        # (container list, index) of the most recently appended event
        self.last_ref: tuple[list[Event], int] | None = None


class _Parser:
    def __init__(self, source: str):
        self._lines = source.lstrip("﻿").split("\n")
        self._lineno = 0
        self._ref_number: int | None = None
        self._title: str | None = None
        self._meter: Meter | None = None
        self._unit: Fraction | None = None
        self._tempo: TempoSpec | None = None
        self._key: KeySpec | None = None
        self._in_body = False
        self._voices: dict[int, _VoiceBuilder] = {}
        self._order: list[int] = []
        self._current: _VoiceBuilder | None = None
        self._pending_program: int | None = None

    def _fail(self, message: str, column: int | None = None) -> None:
        raise ParseError(message, self._lineno, column)

    # line dispatch

    def parse(self) -> Tune:
        for idx, raw in enumerate(self._lines):
            self._lineno = idx + 1
            line = raw.rstrip("\r").rstrip()
            if line.endswith("\\"):
                line = line[:-1].rstrip()
            if not line.strip():
                continue
            if line.startswith("%%"):
                self._directive_line(line)
                continue
            if line.lstrip().startswith("%"):
                continue
            line = _strip_comment(line).rstrip()
            if not line.strip():
                continue
            if len(line) >= 2 and line[1] == ":" and (line[0].isalpha()):
                self._field_line(line[0], line[2:])
                continue
            self._music_line(line)
        return self._finish()

    def _directive_line(self, line: str) -> None:
        body = line[2:].strip()
        match = _MIDI_PROGRAM_RE.match(body)
        if match is None:
            return  # unknown directives are skipped
        program = int(match.group(2) if match.group(2) is not None else match.group(1))
        if self._current is not None:
            self._current.midi_program = program
        else:
            self._pending_program = program

    def _field_line(self, letter: str, body: str) -> None:
        if letter == "V":
            self._voice_line(body)
            return
        if letter in ("w", "W"):
            self._fail("lyrics are not supported")
        if letter in _BENIGN_FIELDS and letter not in "XTMLQK":
            return
        if self._in_body and letter in "XTMLQK":
            self._fail(f"{letter}: field not allowed inside the tune body")
        if letter == "X":
            if self._ref_number is not None:
                self._fail("duplicate X: field")
            try:
                self._ref_number = int(body.strip())
            except ValueError:
                self._fail(f"bad reference number {body.strip()!r}")
        elif letter == "T":
            if self._title is None:
                self._title = body.strip()
        elif letter == "M":
            if self._meter is not None:
                self._fail("duplicate M: field")
            self._meter = self._parse_meter(body.strip())
        elif letter == "L":
            if self._unit is not None:
                self._fail("duplicate L: field")
            self._unit = self._parse_fraction_field(body.strip(), "unit note length")
        elif letter == "Q":
            if self._tempo is not None:
                self._fail("duplicate Q: field")
            self._tempo = self._parse_tempo(body.strip())
        elif letter == "K":
            if self._key is not None:
                self._fail("duplicate K: field")
            try:
                self._key = parse_key(body)
            except ParseError as err:
                self._fail(str(err))
            self._enter_body()
        else:
            self._fail(f"unsupported field {letter}:")

    def _parse_meter(self, body: str) -> Meter:
        if body == "C":
            return Meter(4, 4)
        if body == "C|":
            return Meter(2, 2)
        match = re.fullmatch(r"(\d+)\s*/\s*(\d+)", body)
        if match is None:
            self._fail(f"bad meter {body!r}")
        num, den = int(match.group(1)), int(match.group(2))
        if num <= 0 or den <= 0:
            self._fail(f"bad meter {body!r}")
        return Meter(num, den)

    def _parse_fraction_field(self, body: str, what: str) -> Fraction:
        match = re.fullmatch(r"(\d+)(?:\s*/\s*(\d+))?", body)
        if match is None:
            self._fail(f"bad {what} {body!r}")
        num = int(match.group(1))
        den = int(match.group(2)) if match.group(2) else 1
        if num <= 0 or den <= 0:
            self._fail(f"bad {what} {body!r}")
        return Fraction(num, den)

    def _parse_tempo(self, body: str) -> TempoSpec:
        match = re.fullmatch(r"(?:(\d+)\s*/\s*(\d+)\s*=\s*)?(\d+)", body)
        if match is None:
            self._fail(f"bad tempo {body!r}")
        bpm = int(match.group(3))
        if match.group(1) is not None:
            beat = Fraction(int(match.group(1)), int(match.group(2)))
        else:
            beat = Fraction(1, 4)
        if bpm <= 0 or beat <= 0:
            self._fail(f"bad tempo {body!r}")
        return TempoSpec(beat, bpm)

    def _enter_body(self) -> None:
        if self._meter is None:
            self._fail("missing M: header")
        if self._unit is None:
            self._unit = Fraction(1, 16) if self._meter.fraction < Fraction(3, 4) else Fraction(1, 8)
        self._in_body = True

    # voice lines

    def _voice_line(self, body: str) -> None:
        match = re.match(r"\s*(\d+)", body)
        if match is None:
            self._fail(f"voice id must be an integer, got {body.strip()!r}")
        voice_id = int(match.group(1))
        builder = self._voices.get(voice_id)
        if builder is None:
            builder = _VoiceBuilder(voice_id)
            if self._pending_program is not None:
                builder.midi_program = self._pending_program
                self._pending_program = None
            self._voices[voice_id] = builder
            self._order.append(voice_id)
        self._current = builder
        rest = body[match.end():]
        pos = 0
        while pos < len(rest):
            if rest[pos].isspace():
                pos += 1
                continue
            if rest.startswith("%%", pos):
                directive = rest[pos + 2 :].strip()
                midi = _MIDI_PROGRAM_RE.match(directive)
                if midi is not None:
                    builder.midi_program = int(
                        midi.group(2) if midi.group(2) is not None else midi.group(1)
                    )
                return  # directive consumes the rest of the line
            attr = _VOICE_ATTR_RE.match(rest, pos)
            if attr is None:
                self._fail(f"bad voice attribute near {rest[pos:].strip()!r}")
            key = attr.group(1).lower()
            value = attr.group(2) if attr.group(2) is not None else attr.group(3)
            if key == "name":
                builder.name = value
            # other attributes (clef, subname, ...) are layout hints; ignored
            pos = attr.end()

    # music lines

    def _music_line(self, line: str) -> None:
        if not self._in_body:
            self._fail("music before K: header")
        if self._current is None:
            builder = _VoiceBuilder(1)
            if self._pending_program is not None:
                builder.midi_program = self._pending_program
                self._pending_program = None
            self._voices[1] = builder
            self._order.append(1)
            self._current = builder
        self._scan(line)

    def _scan(self, line: str) -> None:
        v = self._current
        i = 0
        n = len(line)
        while i < n:
            ch = line[i]
            if ch in " \t":
                self._mark_space()
                i += 1
                continue
            bar = self._match_bar(line, i)
            if bar is not None:
                token, close_rep, open_next = bar
                self._bar(close_rep, open_next, i + 1)
                i += len(token)
                continue
            if ch == '"':
                end = line.find('"', i + 1)
                if end < 0:
                    self._fail("unterminated chord symbol", i + 1)
                self._add_symbol(line[i + 1 : end])
                i = end + 1
                continue
            if ch == "!":
                end = line.find("!", i + 1)
                if end < 0:
                    self._fail("unterminated decoration", i + 1)
                v.pending_decorations.append(line[i : end + 1])
                i = end + 1
                continue
            if ch in _SHORTHAND_DECORATIONS:
                v.pending_decorations.append(ch)
                i += 1
                continue
            if ch == "(":
                if i + 1 < n and line[i + 1].isdigit():
                    i = self._start_tuplet(line, i)
                else:
                    v.pending_slurs += 1
                    i += 1
                continue
            if ch == ")":
                self._close_slur(i + 1)
                i += 1
                continue
            if ch == "{":
                i = self._scan_grace(line, i)
                continue
            if ch == "[":
                i = self._left_bracket(line, i)
                continue
            if ch in "^_=" or ch in "ABCDEFGabcdefg":
                i = self._scan_note(line, i)
                continue
            if ch == "z":
                i = self._scan_rest(line, i)
                continue
            if ch in "ZxX":
                self._fail(f"unsupported rest type {ch!r}", i + 1)
            if ch in "><":
                self._start_broken(ch, i + 1)
                i += 1
                continue
            self._fail(f"unsupported character {ch!r}", i + 1)

    @staticmethod
    def _match_bar(line: str, i: int):
        for token, close_rep, open_next in _BAR_TOKENS:
            if line.startswith(token, i):
                return token, close_rep, open_next
        return None

    # event plumbing

    def _mark_space(self) -> None:
        v = self._current
        if v.last_ref is None:
            return
        container, idx = v.last_ref
        container[idx] = replace(container[idx], space_after=True)

    def _add_symbol(self, text: str) -> None:
        v = self._current
        index = len(v.events)
        v.symbols.append((index, text))

    def _close_slur(self, column: int) -> None:
        v = self._current
        if v.last_ref is None:
            self._fail("unmatched slur close", column)
        container, idx = v.last_ref
        event = container[idx]
        if isinstance(event, (Note, Chord)):
            container[idx] = replace(event, slur_close=event.slur_close + 1)
            return
        if isinstance(event, Tuplet) and event.events and isinstance(
            event.events[-1], (Note, Chord)
        ):
            last = event.events[-1]
            members = event.events[:-1] + (replace(last, slur_close=last.slur_close + 1),)
            container[idx] = replace(event, events=members)
            return
        self._fail("slur close must follow a note or chord", column)

    def _start_broken(self, ch: str, column: int) -> None:
        v = self._current
        if v.pending_broken is not None:
            self._fail("only a single broken-rhythm marker is supported", column)
        if v.last_ref is None:
            self._fail("broken rhythm needs a preceding note", column)
        container, idx = v.last_ref
        if not isinstance(container[idx], (Note, Rest, Chord)):
            self._fail("broken rhythm applies only to notes, rests and chords", column)
        v.pending_broken = ch

    def _append_event(self, event: Event, column: int) -> None:
        v = self._current
        if v.pending_broken is not None:
            if not isinstance(event, (Note, Rest, Chord)):
                self._fail("broken rhythm applies only to notes, rests and chords", column)
            container, idx = v.last_ref
            prev = container[idx]
            if v.pending_broken == ">":
                prev_factor, next_factor = Fraction(3, 2), Fraction(1, 2)
            else:
                prev_factor, next_factor = Fraction(1, 2), Fraction(3, 2)
            container[idx] = replace(prev, length=prev.length * prev_factor)
            event = replace(event, length=event.length * next_factor)
            v.pending_broken = None
        if v.tuplet_remaining:
            v.tuplet_events.append(event)
            v.last_ref = (v.tuplet_events, len(v.tuplet_events) - 1)
            v.tuplet_remaining -= 1
            if v.tuplet_remaining == 0:
                members = list(v.tuplet_events)
                members[-1] = replace(members[-1], space_after=True)
                p, q, r = v.tuplet_spec
                group = Tuplet(tuple(members), p, q, r, space_after=False)
                v.tuplet_events = []
                v.tuplet_spec = None
                v.events.append(group)
                v.last_ref = (v.events, len(v.events) - 1)
        else:
            v.events.append(event)
            v.last_ref = (v.events, len(v.events) - 1)

    def _take_decorations(self) -> tuple[str, ...]:
        v = self._current
        decorations = tuple(v.pending_decorations)
        v.pending_decorations = []
        return decorations

    def _take_slurs(self) -> int:
        v = self._current
        count = v.pending_slurs
        v.pending_slurs = 0
        return count

    # token scanners; each returns the index just past the token

    def _scan_length(self, line: str, i: int) -> tuple[Fraction, int]:
        n = len(line)
        start = i
        while i < n and line[i].isdigit():
            i += 1
        num = int(line[start:i]) if i > start else 1
        if num == 0:
            self._fail("zero length", start + 1)
        if i < n and line[i] == "/":
            slashes = 0
            while i < n and line[i] == "/":
                slashes += 1
                i += 1
            dstart = i
            while i < n and line[i].isdigit():
                i += 1
            if i > dstart:
                if slashes > 1:
                    self._fail("bad length syntax", dstart)
                den = int(line[dstart:i])
                if den == 0:
                    self._fail("zero denominator in length", dstart + 1)
                return Fraction(num, den), i
            return Fraction(num, 2**slashes), i
        return Fraction(num), i

    def _scan_pitch(self, line: str, i: int) -> tuple[Pitch, int]:
        n = len(line)
        accidental = None
        if i < n and line[i] in "^_=":
            if line[i] in "^_" and i + 1 < n and line[i + 1] == line[i]:
                accidental = line[i] * 2
                i += 2
            else:
                accidental = line[i]
                i += 1
        if i >= n or line[i] not in "ABCDEFGabcdefg":
            self._fail("accidental must be followed by a note letter", i + 1)
        letter = line[i]
        octave = 1 if letter.islower() else 0
        i += 1
        while i < n and line[i] in "',":
            octave += 1 if line[i] == "'" else -1
            i += 1
        return Pitch(letter.upper(), accidental, octave), i

    def _scan_note(self, line: str, i: int) -> int:
        column = i + 1
        pitch, i = self._scan_pitch(line, i)
        length, i = self._scan_length(line, i)
        tie = False
        if i < len(line) and line[i] == "-":
            tie = True
            i += 1
        note = Note(
            pitch=pitch,
            length=length,
            tie=tie,
            decorations=self._take_decorations(),
            slur_open=self._take_slurs(),
            space_after=False,
        )
        self._append_event(note, column)
        return i

    def _scan_rest(self, line: str, i: int) -> int:
        column = i + 1
        i += 1
        length, i = self._scan_length(line, i)
        rest = Rest(length=length, decorations=self._take_decorations(), space_after=False)
        self._append_event(rest, column)
        return i

    def _scan_inner_note(self, line: str, i: int, allow_tie: bool) -> tuple[Note, int]:
        pitch, i = self._scan_pitch(line, i)
        length, i = self._scan_length(line, i)
        tie = False
        if i < len(line) and line[i] == "-":
            if not allow_tie:
                self._fail("tie not allowed here", i + 1)
            tie = True
            i += 1
        return Note(pitch=pitch, length=length, tie=tie, space_after=True), i

    def _scan_grace(self, line: str, i: int) -> int:
        column = i + 1
        i += 1
        slashed = False
        if i < len(line) and line[i] == "/":
            slashed = True
            i += 1
        notes: list[Note] = []
        n = len(line)
        while i < n and line[i] != "}":
            if line[i] in " \t":
                i += 1
                continue
            if line[i] in "^_=" or line[i] in "ABCDEFGabcdefg":
                note, i = self._scan_inner_note(line, i, allow_tie=False)
                notes.append(note)
                continue
            self._fail(f"unsupported character {line[i]!r} in grace group", i + 1)
        if i >= n:
            self._fail("unterminated grace group", column)
        if not notes:
            self._fail("empty grace group", column)
        self._append_event(Grace(tuple(notes), slashed=slashed, space_after=False), column)
        return i + 1

    def _left_bracket(self, line: str, i: int) -> int:
        nxt = line[i + 1 : i + 3]
        if re.match(r"[A-Za-z]:", nxt):
            self._fail("inline fields are not supported", i + 1)
        if nxt[:1].isdigit():
            self._fail("variant endings are not supported", i + 1)
        if nxt[:1] == "|":
            self._fail("unsupported barline '[|'", i + 1)
        return self._scan_chord(line, i)

    def _scan_chord(self, line: str, i: int) -> int:
        column = i + 1
        i += 1
        notes: list[Note] = []
        n = len(line)
        while i < n and line[i] != "]":
            if line[i] in " \t":
                i += 1
                continue
            if line[i] in "^_=" or line[i] in "ABCDEFGabcdefg":
                note, i = self._scan_inner_note(line, i, allow_tie=True)
                notes.append(note)
                continue
            self._fail(f"unsupported character {line[i]!r} in chord", i + 1)
        if i >= n:
            self._fail("unterminated chord", column)
        if not notes:
            self._fail("empty chord", column)
        i += 1
        length, i = self._scan_length(line, i)
        tie = False
        if i < len(line) and line[i] == "-":
            tie = True
            i += 1
        chord = Chord(
            notes=tuple(notes),
            length=length,
            tie=tie,
            decorations=self._take_decorations(),
            slur_open=self._take_slurs(),
            space_after=False,
        )
        self._append_event(chord, column)
        return i

    def _start_tuplet(self, line: str, i: int) -> int:
        column = i + 1
        v = self._current
        if v.tuplet_remaining:
            self._fail("nested tuplets are not supported", column)
        match = _TUPLET_RE.match(line, i + 1)
        p = int(match.group(1))
        if p < 2:
            self._fail("tuplet needs at least two events", column)
        q_text, r_text = match.group(2), match.group(3)
        if q_text == "" or r_text == "":
            self._fail("incomplete tuplet marker", column)
        q = int(q_text) if q_text else default_tuplet_q(p, self._meter)
        r = int(r_text) if r_text else p
        if q < 1 or r < 1:
            self._fail("bad tuplet marker", column)
        v.tuplet_spec = (p, q, r)
        v.tuplet_remaining = r
        v.tuplet_events = []
        return match.end()

    # barlines and measure assembly

    def _bar(self, close_rep: bool, open_next: bool, column: int) -> None:
        v = self._current
        if v is None:
            self._fail("barline before any music", column)
        if v.tuplet_remaining:
            self._fail("tuplet crosses a barline", column)
        if v.pending_broken is not None:
            self._fail("broken rhythm crosses a barline", column)
        if v.pending_decorations or v.pending_slurs:
            self._fail("dangling annotation before barline", column)
        if v.events or v.symbols:
            self._emit_measure(close_rep)
        elif close_rep:
            if (
                v.measures
                and not v.measures[-1].close_repeat
                and not v.pending_open
            ):
                v.measures[-1] = replace(v.measures[-1], close_repeat=True)
            else:
                self._fail("misplaced repeat close", column)
        if open_next:
            if v.pending_open:
                self._fail("nested repeat open", column)
            v.pending_open = True

    def _emit_measure(self, close_rep: bool) -> None:
        v = self._current
        if v.events:
            v.events[-1] = replace(v.events[-1], space_after=True)
        v.measures.append(
            Measure(
                events=tuple(v.events),
                open_repeat=v.pending_open,
                close_repeat=close_rep,
                chord_symbols=tuple(v.symbols),
            )
        )
        v.events = []
        v.symbols = []
        v.pending_open = False
        v.last_ref = None

    # finalization

    def _finish(self) -> Tune:
        if self._key is None:
            self._fail("missing K: header")
        for voice_id in self._order:
            builder = self._voices[voice_id]
            self._current = builder
            if builder.tuplet_remaining:
                self._fail(f"unterminated tuplet in voice {voice_id}")
            if builder.pending_broken is not None:
                self._fail(f"dangling broken rhythm in voice {voice_id}")
            if builder.pending_decorations or builder.pending_slurs:
                self._fail(f"dangling annotation in voice {voice_id}")
            if builder.events or builder.symbols:
                self._emit_measure(close_rep=False)
            elif builder.pending_open:
                self._fail(f"dangling repeat open in voice {voice_id}")
        if not self._order:
            self._fail("tune has no music")
        header = TuneHeader(
            reference_number=self._ref_number if self._ref_number is not None else 1,
            title=self._title or "",
            meter=self._meter,
            unit_note_length=self._unit,
            tempo=self._tempo,
            key=self._key,
        )
        voices = tuple(
            Voice(
                voice_id=vid,
                name=self._voices[vid].name,
                midi_program=self._voices[vid].midi_program,
                measures=tuple(self._voices[vid].measures),
            )
            for vid in self._order
        )
        return Tune(header=header, voices=voices)


def parse_abc(source: str) -> Tune:
    """Parse ABC text into a :class:`Tune`, raising :class:`ParseError`."""
    if not isinstance(source, str):
        raise ParseError("source must be text")
    return _Parser(source).parse()
