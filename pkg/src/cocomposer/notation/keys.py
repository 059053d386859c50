"""Key signatures via the circle of fifths.

A key resolves to a signed count of sharps (positive) or flats (negative),
which in turn fixes the set of altered letters.  Only major and minor modes
are supported; anything else is a parse error at the ``K:`` field.
"""

from __future__ import annotations

from .errors import ParseError
from .model import KeySpec

# Position of each natural letter on the line of fifths, with C at 0.
_FIFTHS_BASE = {"F": -1, "C": 0, "G": 1, "D": 2, "A": 3, "E": 4, "B": 5}

_SHARPS_ORDER = "FCGDAEB"
_FLATS_ORDER = "BEADGCF"

_MODE_ALIASES = {
    "": "major",
    "maj": "major",
    "major": "major",
    "m": "minor",
    "min": "minor",
    "minor": "minor",
}


def parse_key(text: str) -> KeySpec:
    """Parse the body of a ``K:`` field into a :class:`KeySpec`."""
    body = text.strip()
    if not body:
        raise ParseError("empty key field")
    letter = body[0].upper()
    if letter not in "ABCDEFG":
        raise ParseError(f"bad key tonic {body!r}")
    rest = body[1:]
    alter = ""
    if rest[:1] in ("#", "b"):
        alter = rest[0]
        rest = rest[1:]
    mode_text = rest.strip().lower()
    mode = _MODE_ALIASES.get(mode_text)
    if mode is None:
        raise ParseError(f"unsupported key mode {mode_text!r}")
    spec = KeySpec(letter + alter, mode)
    key_fifths(spec)  # reject keys beyond 7 accidentals early
    return spec


def key_fifths(key: KeySpec) -> int:
    """Signed accidental count: positive sharps, negative flats."""
    count = _FIFTHS_BASE[key.tonic[0]]
    if key.tonic[1:] == "#":
        count += 7
    elif key.tonic[1:] == "b":
        count -= 7
    if key.mode == "minor":
        count -= 3
    if abs(count) > 7:
        raise ParseError(f"key {key} needs {abs(count)} accidentals")
    return count


def key_signature(key: KeySpec) -> dict[str, int]:
    """Map of altered letters to semitone offsets (+1 sharp, -1 flat)."""
    fifths = key_fifths(key)
    if fifths >= 0:
        return {letter: 1 for letter in _SHARPS_ORDER[:fifths]}
    return {letter: -1 for letter in _FLATS_ORDER[:-fifths]}
