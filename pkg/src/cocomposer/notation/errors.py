"""Exception hierarchy for notation handling."""

from __future__ import annotations


class NotationError(Exception):
    """Base class for all notation-level failures."""


class ParseError(NotationError):
    """Input text is outside the supported ABC subset or malformed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class RepairError(NotationError):
    """A measure cannot be repaired without violating repair guarantees."""


class StructureError(NotationError):
    """Repeat barlines are inconsistent (nested or dangling opens, etc.)."""
