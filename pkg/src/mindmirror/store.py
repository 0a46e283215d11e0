"""Local-first persistence: day-sharded JSONL session records and temp media.

One file per UTC day (``YYYY-MM-DD.jsonl``), one canonical-JSON record per
line. All rewrites go through a temp file followed by an atomic rename, so
a crash never corrupts a day file. The store follows a single-writer
contract: callers serialize mutations; reads work on immutable snapshots.

Camera frames are never written here at all (analysis is in-memory); voice
reply audio lives only under the temp root via :class:`MediaVault` and is
deleted on first fetch or by the age sweep.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import time
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional

from .domain import SessionRecord, new_record_id, validate_record

logger = logging.getLogger(__name__)

DAY_FILE_SUFFIX = ".jsonl"


class StoreError(Exception):
    """Base class for persistence failures."""


class InvalidRecord(StoreError):
    def __init__(self, violations: list[str]):
        super().__init__("record failed validation: " + "; ".join(violations))
        self.violations = violations


class DuplicateRecordId(StoreError):
    pass


class RecordNotFound(StoreError):
    pass


class InvalidRange(StoreError):
    pass


class IoFailure(StoreError):
    """Filesystem error surfaced from a store operation; nothing was partially written."""


@dataclass
class CleanupResult:
    """Outcome of a temp sweep: files removed plus any per-file failures."""

    removed: int
    failures: list[tuple[str, str]]


def _day_name(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).date().isoformat()


class SessionStore:
    def __init__(self, root: Path | str, temp_root: Optional[Path | str] = None):
        self.root = Path(root)
        self.temp_root = Path(temp_root) if temp_root is not None else self.root / "tmp"
        self.root.mkdir(parents=True, exist_ok=True)
        self.temp_root.mkdir(parents=True, exist_ok=True)
        # id -> day-file name; rebuilt from disk so a restart sees everything
        self._index: dict[str, str] = {}
        self._build_index()

    def _day_path(self, day: str) -> Path:
        return self.root / f"{day}{DAY_FILE_SUFFIX}"

    def _build_index(self) -> None:
        self._index.clear()
        for path in sorted(self.root.glob(f"*{DAY_FILE_SUFFIX}")):
            for record in self._read_day(path):
                self._index[record.id] = path.stem

    def _read_day(self, path: Path) -> list[SessionRecord]:
        if not path.exists():
            return []
        records = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(SessionRecord.from_json(json.loads(line)))
        return records

    def _write_day(self, day: str, records: Iterable[SessionRecord]) -> None:
        """Rewrite a whole day file via temp-file + atomic rename."""
        path = self._day_path(day)
        lines = [json.dumps(r.to_json(), ensure_ascii=False) for r in records]
        try:
            fd, tmp_name = tempfile.mkstemp(dir=self.root, prefix=f".{day}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    for line in lines:
                        fh.write(line + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp_name, path)
            except BaseException:
                try:
                    os.unlink(tmp_name)
                except FileNotFoundError:
                    pass
                raise
        except OSError as exc:
            raise IoFailure(f"failed writing day file {day}: {exc.strerror or exc}") from exc

    def save_record(self, record: SessionRecord) -> str:
        """Durably persist a valid record and return its id."""
        violations = validate_record(record)
        if violations:
            raise InvalidRecord(violations)
        if record.id in self._index:
            raise DuplicateRecordId(f"record id {record.id} already stored")
        day = _day_name(record.timestamp)
        existing = self._read_day(self._day_path(day))
        self._write_day(day, existing + [record])
        self._index[record.id] = day
        return record.id

    def get_record(self, record_id: str) -> SessionRecord:
        day = self._index.get(record_id)
        if day is None:
            raise RecordNotFound(record_id)
        for record in self._read_day(self._day_path(day)):
            if record.id == record_id:
                return record
        # index was stale (file changed underneath); treat as missing
        del self._index[record_id]
        raise RecordNotFound(record_id)

    def list_records(self, start: datetime, end: datetime) -> list[SessionRecord]:
        """Records with start <= timestamp < end, ascending by (timestamp, id)."""
        if start.tzinfo is None or end.tzinfo is None:
            raise InvalidRange("range bounds must be timezone-aware")
        if start > end:
            raise InvalidRange(f"start {start} is after end {end}")
        first_day = start.astimezone(timezone.utc).date()
        last_day = end.astimezone(timezone.utc).date()
        out = []
        day = first_day
        while day <= last_day:
            for record in self._read_day(self._day_path(day.isoformat())):
                if start <= record.timestamp < end:
                    out.append(record)
            day += timedelta(days=1)
        out.sort(key=lambda r: (r.timestamp, r.id))
        return out

    def all_records(self) -> list[SessionRecord]:
        out = []
        for path in sorted(self.root.glob(f"*{DAY_FILE_SUFFIX}")):
            out.extend(self._read_day(path))
        out.sort(key=lambda r: (r.timestamp, r.id))
        return out

    def delete_record(self, record_id: str) -> bool:
        """Remove a record permanently. Returns False when absent (idempotent)."""
        day = self._index.get(record_id)
        if day is None:
            return False
        remaining = [r for r in self._read_day(self._day_path(day)) if r.id != record_id]
        self._write_day(day, remaining)
        del self._index[record_id]
        return True

    def cleanup_temp(self, max_age: timedelta = timedelta(0)) -> CleanupResult:
        """Delete temp files older than max_age; keep going past per-file failures."""
        cutoff = time.time() - max_age.total_seconds()
        removed = 0
        failures: list[tuple[str, str]] = []
        for path in sorted(self.temp_root.iterdir()):
            if not path.is_file():
                continue
            try:
                if path.stat().st_mtime <= cutoff:
                    path.unlink()
                    removed += 1
            except OSError as exc:
                failures.append((path.name, exc.strerror or str(exc)))
                logger.warning("temp cleanup failed for %s: %s", path.name, exc)
        return CleanupResult(removed=removed, failures=failures)


class MediaVault:
    """Fetch-once temp audio. Files are removed on first read or by sweep.

    Backing files live under the store's temp root so the regular temp
    sweep also covers anything a client never fetched.
    """

    DEFAULT_TTL_SECONDS = 600.0

    def __init__(self, temp_root: Path | str, ttl_seconds: float = DEFAULT_TTL_SECONDS,
                 clock: Callable[[], float] = time.time):
        self.temp_root = Path(temp_root)
        self.temp_root.mkdir(parents=True, exist_ok=True)
        self.ttl_seconds = ttl_seconds
        self._clock = clock
        self._entries: dict[str, tuple[Path, float]] = {}

    def store(self, payload: bytes, suffix: str = ".wav") -> str:
        media_id = new_record_id()
        path = self.temp_root / f"media-{media_id}{suffix}"
        path.write_bytes(payload)
        self._entries[media_id] = (path, self._clock())
        return media_id

    def fetch_once(self, media_id: str) -> Optional[bytes]:
        """Return the payload and delete it; None when unknown or already served."""
        self.sweep()
        entry = self._entries.pop(media_id, None)
        if entry is None:
            return None
        path, _ = entry
        try:
            payload = path.read_bytes()
        except FileNotFoundError:
            return None
        path.unlink(missing_ok=True)
        return payload

    def sweep(self) -> int:
        """Drop entries older than the TTL; returns the number removed."""
        now = self._clock()
        stale = [mid for mid, (_, created) in self._entries.items()
                 if now - created > self.ttl_seconds]
        for mid in stale:
            path, _ = self._entries.pop(mid)
            path.unlink(missing_ok=True)
        return len(stale)
