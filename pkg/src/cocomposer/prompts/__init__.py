"""Versioned prompt data.

Role prompts and the twenty-entry evaluation prompt set live as UTF-8
data files under ``data/``, pinned by a JSON index of sha256 digests so
accidental edits surface as load failures rather than silent drift.
"""

from __future__ import annotations

import functools
import hashlib
import json
import string
from dataclasses import dataclass
from importlib import resources

from ..roles import AgentRole

DEFAULT_PROMPT_VERSION = "paper-v1"


class PromptDataError(Exception):
    """Prompt data files are missing, corrupted, or inconsistent."""


class UnknownVersionError(KeyError):
    """No prompt is stored for the requested role and version."""


@dataclass(frozen=True)
class RolePrompt:
    role: AgentRole
    text: str
    version: str


@dataclass(frozen=True)
class PromptSet:
    entries: tuple[tuple[int, str], ...]

    def text(self, index: int) -> str:
        for entry_index, entry_text in self.entries:
            if entry_index == index:
                return entry_text
        raise KeyError(f"no prompt with index {index}")


def _data_bytes(name: str) -> bytes:
    path = resources.files(__package__) / "data" / name
    try:
        return path.read_bytes()
    except (FileNotFoundError, OSError) as err:
        raise PromptDataError(f"prompt data file {name!r} unreadable: {err}") from err


@functools.lru_cache(maxsize=1)
def _index() -> tuple[dict, ...]:
    try:
        rows = json.loads(_data_bytes("index.json"))
    except ValueError as err:
        raise PromptDataError(f"prompt index is not valid JSON: {err}") from err
    return tuple(rows)


def _verified_text(row: dict) -> str:
    raw = _data_bytes(row["path"])
    digest = hashlib.sha256(raw).hexdigest()
    if digest != row["sha256"]:
        raise PromptDataError(
            f"prompt data {row['path']!r} fails checksum "
            f"(expected {row['sha256'][:12]}..., got {digest[:12]}...)"
        )
    return raw.decode("utf-8")


@functools.lru_cache(maxsize=None)
def load_role_prompt(role: AgentRole, version: str = DEFAULT_PROMPT_VERSION) -> RolePrompt:
    """The stored prompt for a role; unknown versions raise."""
    for row in _index():
        if row["role"] == role.value and row["version"] == version:
            return RolePrompt(role=role, text=_verified_text(row), version=version)
    raise UnknownVersionError(f"no prompt for role {role.value!r} version {version!r}")


@functools.lru_cache(maxsize=1)
def load_prompt_set() -> PromptSet:
    """The twenty evaluation prompts, index-ordered and checksum-verified."""
    for row in _index():
        if row["role"] == "EvalPromptSet" and row["version"] == DEFAULT_PROMPT_VERSION:
            data = json.loads(_verified_text(row))
            entries = tuple((e["index"], e["text"]) for e in data["entries"])
            if len(entries) != 20 or [i for i, _ in entries] != list(range(1, 21)):
                raise PromptDataError(
                    f"evaluation prompt set must hold indices 1-20, got {len(entries)} entries"
                )
            return PromptSet(entries=entries)
    raise PromptDataError("evaluation prompt set missing from index")


def fill_template(text: str, values: dict[str, str]) -> str:
    """Substitute ``$name`` placeholders; unknown names pass through."""
    return string.Template(text).safe_substitute(values)


__all__ = [
    "DEFAULT_PROMPT_VERSION",
    "PromptDataError",
    "PromptSet",
    "RolePrompt",
    "UnknownVersionError",
    "fill_template",
    "load_prompt_set",
    "load_role_prompt",
]
