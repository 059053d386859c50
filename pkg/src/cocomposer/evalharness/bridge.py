"""Client for the external aesthetics-scoring subprocess.

The scorer is any command speaking one JSON object per line on stdio:
requests are ``{"path": "<wav>"}`` and responses either carry the four
scores ``CE``, ``CU``, ``PC``, ``PQ`` or an ``error`` field. The process
is spawned once and reused across a whole evaluation batch.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from pathlib import Path

from .harness_types import AestheticsScore


class BridgeError(Exception):
    """The scoring subprocess failed, closed, or replied out of protocol."""


class BridgeClient:
    def __init__(self, command: str):
        if not command:
            raise ValueError("bridge command must be non-empty")
        self._command = command
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as err:
            raise BridgeError(f"cannot start bridge {command!r}: {err}") from err

    def score(self, wav_path: str | Path) -> AestheticsScore:
        request = json.dumps({"path": str(wav_path)})
        try:
            assert self._proc.stdin is not None and self._proc.stdout is not None
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (OSError, ValueError, AssertionError) as err:
            raise BridgeError(f"bridge pipe failure: {err}") from err
        if not line:
            raise BridgeError("bridge closed its output stream")
        try:
            response = json.loads(line)
        except ValueError as err:
            raise BridgeError(f"bridge sent invalid JSON: {line!r}") from err
        if "error" in response:
            raise BridgeError(f"bridge error for {wav_path}: {response['error']}")
        try:
            return AestheticsScore(
                ce=float(response["CE"]),
                cu=float(response["CU"]),
                pc=float(response["PC"]),
                pq=float(response["PQ"]),
            )
        except (KeyError, TypeError, ValueError) as err:
            raise BridgeError(f"bridge response missing scores: {line!r}") from err

    def close(self) -> None:
        proc = self._proc
        if proc.poll() is None:
            if proc.stdin is not None:
                try:
                    proc.stdin.close()
                except OSError:
                    pass
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    def __enter__(self) -> "BridgeClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
