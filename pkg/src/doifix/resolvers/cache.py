"""Persistent lookup cache.

The store is a line-delimited JSON file, one record per line::

    {"key": "10.1016/j.x", "kind": "handle", "status": "valid", "url": ..., "timestamp": ...}
    {"key": "10.1016", "kind": "crossref", "name": "Elsevier BV", "source": "Crossref", "timestamp": ...}

It is read completely on open and appended to afterwards; the last record
for a key wins. Valid outcomes never expire. Invalid outcomes and agency
misses expire after ``invalid_ttl`` seconds, because DOIs that fail to
resolve today may be registered later.
"""
from __future__ import annotations

import json
import logging
import threading
import time
from pathlib import Path
from typing import Callable

from ..doi import Doi, DoiPrefix, ValidityStatus
from .base import PublisherRecord, PublisherSource, ResolutionOutcome, Resolver

logger = logging.getLogger(__name__)

THIRTY_DAYS = 30 * 24 * 3600.0
PUBLISHER_KINDS = ("crossref", "datacite", "medra")


def outcome_to_record(key: str, outcome: ResolutionOutcome, timestamp: float | None = None) -> dict:
    return {
        "key": key,
        "kind": "handle",
        "status": outcome.status.value,
        "agency": outcome.agency,
        "url": outcome.url,
        "timestamp": outcome.checked_at if timestamp is None else timestamp,
    }


def record_to_outcome(rec: dict) -> ResolutionOutcome:
    status = ValidityStatus(rec["status"])
    return ResolutionOutcome(
        status,
        agency=rec.get("agency"),
        url=rec.get("url"),
        reason=rec.get("reason") or ("recorded as unknown" if status is ValidityStatus.UNKNOWN else None),
        checked_at=rec.get("timestamp") or 0.0,
    )


def publisher_to_record(kind: str, key: str, record: PublisherRecord | None, timestamp: float) -> dict:
    if record is None:
        return {"key": key, "kind": kind, "name": None, "source": PublisherSource.UNIDENTIFIED.value,
                "timestamp": timestamp}
    return {"key": key, "kind": kind, "name": record.name, "source": record.source.value, "timestamp": timestamp}


def record_to_publisher(rec: dict) -> PublisherRecord | None:
    source = PublisherSource(rec["source"])
    if rec.get("name") is None or source is PublisherSource.UNIDENTIFIED:
        return None
    return PublisherRecord(DoiPrefix(rec["key"]), rec["name"], source)


class CacheStore:
    def __init__(self, path: str | Path | None = None, invalid_ttl: float | None = THIRTY_DAYS,
                 valid_ttl: float | None = None, clock: Callable[[], float] = time.time):
        self.path = Path(path) if path else None
        self.invalid_ttl = invalid_ttl
        self.valid_ttl = valid_ttl
        self.clock = clock
        self._entries: dict[tuple[str, str], dict] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self):
        try:
            lines = self.path.read_text("utf-8").splitlines()
        except OSError as exc:
            logger.warning("cache %s unreadable, starting empty: %s", self.path, exc)
            return
        for n, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                self._entries[(rec["kind"], rec["key"].casefold())] = rec
            except (ValueError, KeyError, AttributeError):
                logger.warning("cache %s line %d malformed, skipped", self.path, n)

    def __len__(self):
        return len(self._entries)

    def _ttl(self, rec: dict) -> float | None:
        positive = rec.get("status") == "valid" if rec["kind"] == "handle" else rec.get("name") is not None
        return self.valid_ttl if positive else self.invalid_ttl

    def get(self, kind: str, key: str) -> dict | None:
        rec = self._entries.get((kind, key.casefold()))
        if rec is None:
            return None
        ttl = self._ttl(rec)
        if ttl is not None and self.clock() - (rec.get("timestamp") or 0.0) > ttl:
            return None
        return rec

    def put(self, rec: dict) -> None:
        rec = dict(rec, key=rec["key"].casefold())
        with self._lock:
            self._entries[(rec["kind"], rec["key"])] = rec
            if self.path is None:
                return
            try:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
            except OSError as exc:
                logger.warning("cache %s not writable, continuing in memory: %s", self.path, exc)
                self.path = None


class CachedResolver:
    """Consult a CacheStore before delegating to ``inner``.

    Concurrent requests for the same key wait for a single inner call.
    Unknown outcomes and deferred lookups are never stored.
    """

    def __init__(self, inner: Resolver, store: CacheStore | None = None):
        self.inner = inner
        self.store = store if store is not None else CacheStore()
        self._key_locks: dict[tuple[str, str], threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock_for(self, kind: str, key: str) -> threading.Lock:
        with self._guard:
            return self._key_locks.setdefault((kind, key.casefold()), threading.Lock())

    def resolve(self, doi: Doi) -> ResolutionOutcome:
        with self._lock_for("handle", doi.key):
            rec = self.store.get("handle", doi.key)
            if rec is not None:
                return record_to_outcome(rec)
            outcome = self.inner.resolve(doi)
            if outcome.status is not ValidityStatus.UNKNOWN:
                self._put(outcome_to_record(doi.key, outcome, self.store.clock()))
            return outcome

    def _publisher(self, kind: str, prefix: DoiPrefix, call) -> PublisherRecord | None:
        with self._lock_for(kind, prefix.value):
            rec = self.store.get(kind, prefix.value)
            if rec is not None:
                return record_to_publisher(rec)
            record = call()
            self._put(publisher_to_record(kind, prefix.value, record, self.store.clock()))
            return record

    def _put(self, rec: dict) -> None:
        try:
            self.store.put(rec)
        except Exception as exc:  # the cache must never block resolution
            logger.warning("cache write failed: %s", exc)

    def crossref_prefix(self, prefix: DoiPrefix) -> PublisherRecord | None:
        return self._publisher("crossref", prefix, lambda: self.inner.crossref_prefix(prefix))

    def datacite(self, prefix: DoiPrefix, doi: Doi) -> PublisherRecord | None:
        return self._publisher("datacite", prefix, lambda: self.inner.datacite(prefix, doi))

    def medra(self, prefix: DoiPrefix, doi: Doi) -> PublisherRecord | None:
        return self._publisher("medra", prefix, lambda: self.inner.medra(prefix, doi))


def cached(inner: Resolver, store: CacheStore | None = None) -> CachedResolver:
    return CachedResolver(inner, store)
