"""Agent role identifiers shared by the prompt library and orchestrator."""

from __future__ import annotations

import enum


class AgentRole(enum.Enum):
    LEADER = "Leader"
    MELODY = "Melody"
    ACCOMPANIMENT = "Accompaniment"
    REVISION = "Revision"
    REVIEW = "Review"


__all__ = ["AgentRole"]
