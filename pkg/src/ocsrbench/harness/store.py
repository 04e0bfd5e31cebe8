"""
Append-only run store: one JSON file per run plus an index.

Plain files, no server: reproducible and diffable. Concurrent readers are
always fine; writers serialize through a lock file. A stale lock (left by a
crashed process) is taken over once it ages past a threshold. A corrupt or
missing index is rebuilt by scanning the run files.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path

from .scoring import RunRecord

logger = logging.getLogger(__name__)

INDEX_NAME = "index.json"
LOCK_NAME = ".lock"


class StoreBusyError(RuntimeError):
    """Another writer holds the store lock; safe to retry."""


@dataclass
class RunStore:
    root: Path
    stale_lock_s: float = 60.0

    def __post_init__(self):
        self.root = Path(self.root)
        self.root.mkdir(parents=True, exist_ok=True)

    # -- locking -------------------------------------------------------------

    @property
    def _lock_path(self) -> Path:
        return self.root / LOCK_NAME

    def _acquire_lock(self) -> None:
        try:
            fd = os.open(self._lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            age = time.time() - self._lock_path.stat().st_mtime
            if age <= self.stale_lock_s:
                raise StoreBusyError(
                    f"store locked by another writer ({age:.0f}s old)"
                ) from None
            logger.warning(
                "taking over stale store lock (%.0fs old, threshold %.0fs)",
                age,
                self.stale_lock_s,
            )
            self._lock_path.unlink(missing_ok=True)
            fd = os.open(self._lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        with os.fdopen(fd, "w") as handle:
            handle.write(str(os.getpid()))

    def _release_lock(self) -> None:
        self._lock_path.unlink(missing_ok=True)

    # -- persistence ---------------------------------------------------------

    def _run_path(self, run_id: str) -> Path:
        return self.root / f"{run_id}.json"

    def store_run(self, record: RunRecord) -> str:
        """Persist a run; returns its id. Same content twice is idempotent."""
        self._acquire_lock()
        try:
            path = self._run_path(record.run_id)
            payload = {"stored_at": time.time(), **record.to_json()}
            if path.exists():
                existing = json.loads(path.read_text("utf-8"))
                payload["stored_at"] = existing.get("stored_at", payload["stored_at"])
            path.write_text(
                json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
            )
            index = self._read_index(rebuild_on_error=True)
            index = [row for row in index if row["run_id"] != record.run_id]
            index.append(
                {
                    "run_id": record.run_id,
                    "model": record.model,
                    "protocol": record.protocol,
                    "stored_at": payload["stored_at"],
                }
            )
            index.sort(key=lambda row: (row["stored_at"], row["run_id"]))
            (self.root / INDEX_NAME).write_text(
                json.dumps({"runs": index}, indent=2) + "\n", encoding="utf-8"
            )
            return record.run_id
        finally:
            self._release_lock()

    def _rebuild_index(self) -> list[dict]:
        rows = []
        for path in self.root.glob("*.json"):
            if path.name == INDEX_NAME:
                continue
            try:
                data = json.loads(path.read_text("utf-8"))
                rows.append(
                    {
                        "run_id": data["run_id"],
                        "model": data["model"],
                        "protocol": data["protocol"],
                        "stored_at": data.get("stored_at", path.stat().st_mtime),
                    }
                )
            except (json.JSONDecodeError, KeyError, OSError):
                logger.warning("skipping unreadable run file %s", path)
        rows.sort(key=lambda row: (row["stored_at"], row["run_id"]))
        return rows

    def _read_index(self, rebuild_on_error: bool = True) -> list[dict]:
        index_path = self.root / INDEX_NAME
        if index_path.exists():
            try:
                data = json.loads(index_path.read_text("utf-8"))
                runs = data["runs"]
                if isinstance(runs, list):
                    return runs
            except (json.JSONDecodeError, KeyError, TypeError):
                logger.warning("store index corrupt; rebuilding from run files")
        if not rebuild_on_error:
            return []
        return self._rebuild_index()

    def list_runs(self) -> list[str]:
        """Run ids in stored order (oldest first)."""
        return [row["run_id"] for row in self._read_index()]

    def load_run(self, run_id: str) -> RunRecord:
        path = self._run_path(run_id)
        if not path.exists():
            raise KeyError(f"no stored run {run_id!r}")
        data = json.loads(path.read_text("utf-8"))
        return RunRecord.from_json(data)
