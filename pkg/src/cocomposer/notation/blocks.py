"""Extraction of fenced code blocks from agent chat messages."""

from __future__ import annotations


def extract_abc_blocks(message: str) -> list[str]:
    """Return the contents of all triple-backtick fenced blocks, in order.

    Robustness fallbacks: an unterminated fence yields everything after it,
    and a fence-free message that itself starts with ``X:`` is returned
    whole, since models sometimes skip the requested markdown fencing.
    """
    blocks: list[str] = []
    buffer: list[str] = []
    in_block = False
    for line in message.split("\n"):
        if line.strip().startswith("```"):
            if in_block:
                if buffer:
                    blocks.append("\n".join(buffer))
                buffer = []
                in_block = False
            else:
                in_block = True
            continue
        if in_block:
            buffer.append(line)
    if in_block and buffer:
        blocks.append("\n".join(buffer))
    if not blocks:
        stripped = message.strip()
        if stripped.startswith("X:"):
            return [stripped]
    return blocks
