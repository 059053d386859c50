"""Value types for the supported ABC subset.

Everything here is an immutable value: parsing builds these, serialization
reads them back out, and the validator/repairer work on them with exact
rational arithmetic (``fractions.Fraction``, no floats anywhere).

Octave convention: octave 0 is the uppercase ABC octave, so ``C`` is
MIDI 60 and ``c`` (octave 1) is MIDI 72.  Event lengths are multipliers of
the tune's unit note length (``L:``), stored as exact fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

# The exact-arithmetic duration type used throughout. Fraction already
# guarantees lowest terms and a positive denominator.
Rational = Fraction

ACCIDENTALS = ("^", "^^", "_", "__", "=")

# Semitone offset of each explicit accidental marker.
ACCIDENTAL_SEMITONES = {"^": 1, "^^": 2, "_": -1, "__": -2, "=": 0}


@dataclass(frozen=True)
class Pitch:
    """A notated pitch: letter, optional explicit accidental, octave offset."""

    letter: str  # 'A'..'G'
    accidental: str | None = None  # one of ACCIDENTALS, or None
    octave: int = 0

    def __post_init__(self) -> None:
        if self.letter not in "ABCDEFG":
            raise ValueError(f"bad pitch letter {self.letter!r}")
        if self.accidental is not None and self.accidental not in ACCIDENTALS:
            raise ValueError(f"bad accidental {self.accidental!r}")


@dataclass(frozen=True)
class Note:
    pitch: Pitch
    length: Fraction = Fraction(1)  # multiplier of the unit note length
    tie: bool = False
    decorations: tuple[str, ...] = ()
    slur_open: int = 0
    slur_close: int = 0
    space_after: bool = True  # layout only; False means beamed to the next event

    kind = "note"


@dataclass(frozen=True)
class Rest:
    length: Fraction = Fraction(1)
    decorations: tuple[str, ...] = ()
    space_after: bool = True

    kind = "rest"


@dataclass(frozen=True)
class Chord:
    """Bracketed simultaneous notes, e.g. ``[CEG]2``.

    The group sounds as one event: its duration is the first inner note's
    multiplier times the outer multiplier.  Inner multipliers beyond the
    first are preserved for serialization but do not affect timing.
    """

    notes: tuple[Note, ...]
    length: Fraction = Fraction(1)  # outer multiplier
    tie: bool = False
    decorations: tuple[str, ...] = ()
    slur_open: int = 0
    slur_close: int = 0
    space_after: bool = True

    kind = "chord_group"

    @property
    def unit_duration(self) -> Fraction:
        inner = self.notes[0].length if self.notes else Fraction(1)
        return inner * self.length


@dataclass(frozen=True)
class Grace:
    """Grace-note group ``{...}``; contributes zero duration."""

    notes: tuple[Note, ...]
    slashed: bool = False  # acciaccatura marker {/...}
    space_after: bool = True

    kind = "grace_group"


@dataclass(frozen=True)
class Tuplet:
    """``(p:q:r`` group: r events played in the time of q, scaling by q/p."""

    events: tuple["Event", ...]
    p: int
    q: int
    r: int
    space_after: bool = True

    kind = "tuplet_group"


Event = Note | Rest | Chord | Grace | Tuplet


def event_unit_duration(event: Event) -> Fraction:
    """Duration of an event in unit-note-length multiples (graces are 0)."""
    if isinstance(event, (Note, Rest)):
        return event.length
    if isinstance(event, Chord):
        return event.unit_duration
    if isinstance(event, Grace):
        return Fraction(0)
    if isinstance(event, Tuplet):
        inner = sum((event_unit_duration(e) for e in event.events), Fraction(0))
        return inner * Fraction(event.q, event.p)
    raise TypeError(f"not an event: {event!r}")


@dataclass(frozen=True)
class Measure:
    events: tuple[Event, ...] = ()
    open_repeat: bool = False
    close_repeat: bool = False
    # (event index, text); index == len(events) anchors at the end of the bar
    chord_symbols: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class Voice:
    voice_id: int
    name: str = ""
    midi_program: int | None = None  # None = unspecified (renders as 0)
    measures: tuple[Measure, ...] = ()


@dataclass(frozen=True)
class Meter:
    """Time signature as written (``6/8`` is kept distinct from ``3/4``)."""

    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if self.numerator <= 0 or self.denominator <= 0:
            raise ValueError("meter must be positive")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class TempoSpec:
    beat_unit: Fraction  # fraction of a whole note, e.g. 3/8 for "Q:3/8=100"
    beats_per_minute: int

    def __post_init__(self) -> None:
        if self.beat_unit <= 0 or self.beats_per_minute <= 0:
            raise ValueError("tempo must be positive")

    def microseconds_per_quarter(self) -> int:
        quarters_per_minute = self.beats_per_minute * self.beat_unit * 4
        return round(Fraction(60_000_000) / quarters_per_minute)


@dataclass(frozen=True)
class KeySpec:
    tonic: str  # 'A'..'G' with optional '#' or 'b'
    mode: str = "major"  # "major" | "minor"

    def __post_init__(self) -> None:
        if not self.tonic or self.tonic[0] not in "ABCDEFG":
            raise ValueError(f"bad tonic {self.tonic!r}")
        if self.tonic[1:] not in ("", "#", "b"):
            raise ValueError(f"bad tonic {self.tonic!r}")
        if self.mode not in ("major", "minor"):
            raise ValueError(f"bad mode {self.mode!r}")

    def __str__(self) -> str:
        return self.tonic + ("m" if self.mode == "minor" else "")


@dataclass(frozen=True)
class TuneHeader:
    reference_number: int = 1
    title: str = ""
    meter: Meter = field(default_factory=lambda: Meter(4, 4))
    unit_note_length: Fraction = Fraction(1, 8)
    tempo: TempoSpec | None = None
    key: KeySpec = field(default_factory=lambda: KeySpec("C"))


@dataclass(frozen=True)
class Tune:
    header: TuneHeader
    voices: tuple[Voice, ...] = ()


def frac_text(value: Fraction) -> str:
    """Render a fraction as ABC text: ``6`` for 6/1, else ``p/q``."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class ValidationIssue:
    """One lint finding; ``duration_mismatch`` carries the exact sums."""

    voice_id: int
    measure_index: int  # 0-based; -1 for voice-level format issues
    kind: str  # "duration_mismatch" | "format_error"
    detail: str
    expected: Fraction | None = None
    actual: Fraction | None = None

    def to_json_dict(self) -> dict:
        out: dict = {
            "voice_id": self.voice_id,
            "measure_index": self.measure_index,
            "kind": self.kind,
            "detail": self.detail,
        }
        if self.kind == "duration_mismatch":
            out["expected"] = frac_text(self.expected)
            out["actual"] = frac_text(self.actual)
        return out


@dataclass(frozen=True)
class RepairAction:
    """One edit the repairer applied to a specific measure."""

    voice_id: int
    measure_index: int
    kind: str  # "append_rests" | "shorten_event" | "delete_events"
    detail: str

    def to_json_dict(self) -> dict:
        return {
            "voice_id": self.voice_id,
            "measure_index": self.measure_index,
            "kind": self.kind,
            "detail": self.detail,
        }
