"""ABC notation subset: parse, serialize, validate, repair, extract."""

from .blocks import extract_abc_blocks
from .errors import NotationError, ParseError, RepairError, StructureError
from .keys import key_fifths, key_signature, parse_key
from .model import (
    Chord,
    Event,
    Grace,
    KeySpec,
    Measure,
    Meter,
    Note,
    Pitch,
    Rational,
    RepairAction,
    Rest,
    TempoSpec,
    Tune,
    TuneHeader,
    Tuplet,
    ValidationIssue,
    Voice,
    event_unit_duration,
    frac_text,
)
from .parse import parse_abc
from .repair import actions_to_json, repair, rest_decomposition
from .serialize import serialize_abc
from .validate import issues_to_json, measure_duration, validate

__all__ = [
    "Chord",
    "Event",
    "Grace",
    "KeySpec",
    "Measure",
    "Meter",
    "NotationError",
    "Note",
    "ParseError",
    "Pitch",
    "Rational",
    "RepairAction",
    "RepairError",
    "Rest",
    "StructureError",
    "TempoSpec",
    "Tune",
    "TuneHeader",
    "Tuplet",
    "ValidationIssue",
    "Voice",
    "actions_to_json",
    "event_unit_duration",
    "extract_abc_blocks",
    "frac_text",
    "issues_to_json",
    "key_fifths",
    "key_signature",
    "measure_duration",
    "parse_abc",
    "parse_key",
    "repair",
    "rest_decomposition",
    "serialize_abc",
    "validate",
]
