"""On-disk workspace: content-addressed blobs, journal, state snapshot.

Blobs are immutable and named by their SHA-256. The journal is an
append-only jsonl file of operation events; every event references its
inputs and outputs by blob hash, so replaying the journal reconstructs
the workspace state exactly. Timestamps ride along for humans but stay
out of the state hash.
"""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone


class WorkspaceError(Exception):
    pass


class Workspace:
    MARKER = "workspace.json"

    def __init__(self, root: str):
        self.root = os.path.abspath(root)

    # -- lifecycle -----------------------------------------------------------

    @classmethod
    def create(cls, root: str) -> "Workspace":
        ws = cls(root)
        if os.path.exists(ws._path(cls.MARKER)):
            raise WorkspaceError(f"workspace already exists at {ws.root}")
        os.makedirs(ws._path("blobs"), exist_ok=True)
        os.makedirs(ws._path("runs"), exist_ok=True)
        os.makedirs(ws._path("cache"), exist_ok=True)
        with open(ws._path(cls.MARKER), "w", encoding="utf-8") as fh:
            json.dump({"format": 1}, fh)
        return ws

    @classmethod
    def open(cls, root: str) -> "Workspace":
        ws = cls(root)
        if not os.path.exists(ws._path(cls.MARKER)):
            raise WorkspaceError(f"no workspace at {ws.root}")
        return ws

    def _path(self, *parts) -> str:
        return os.path.join(self.root, *parts)

    @property
    def cache_file(self) -> str:
        return self._path("cache", "verdicts.json")

    @property
    def runs_dir(self) -> str:
        return self._path("runs")

    # -- blobs ----------------------------------------------------------------

    def put_blob(self, data: bytes) -> str:
        sha = hashlib.sha256(data).hexdigest()
        path = self._path("blobs", sha)
        if not os.path.exists(path):
            tmp = path + ".tmp"
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        return sha

    def put_text(self, text: str) -> str:
        return self.put_blob(text.encode("utf-8"))

    def get_blob(self, sha: str) -> bytes:
        path = self._path("blobs", sha)
        if not os.path.exists(path):
            raise WorkspaceError(f"missing blob {sha}")
        with open(path, "rb") as fh:
            return fh.read()

    def get_text(self, sha: str) -> str:
        return self.get_blob(sha).decode("utf-8")

    # -- journal ----------------------------------------------------------------

    def append_event(self, op: str, **fields) -> dict:
        event = {"op": op, "at": datetime.now(timezone.utc).isoformat()}
        event.update(fields)
        with open(self._path("journal.jsonl"), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
        return event

    def events(self) -> list[dict]:
        path = self._path("journal.jsonl")
        if not os.path.exists(path):
            return []
        out = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    def state_hash_of_events(self) -> str:
        h = hashlib.sha256()
        for event in self.events():
            scrubbed = {k: v for k, v in event.items() if k != "at"}
            h.update(json.dumps(scrubbed, sort_keys=True).encode())
            h.update(b"\n")
        return h.hexdigest()

    # -- state ----------------------------------------------------------------

    def read_state(self) -> dict:
        path = self._path("state.json")
        if not os.path.exists(path):
            raise WorkspaceError("workspace has no state; run ingest first")
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def has_state(self) -> bool:
        return os.path.exists(self._path("state.json"))

    def write_state(self, state: dict):
        tmp = self._path("state.json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(state, fh, indent=2, sort_keys=True)
        os.replace(tmp, self._path("state.json"))

    @staticmethod
    def canonical_state(state: dict) -> str:
        return json.dumps(state, sort_keys=True)
