"""Offline resolver backed by in-memory tables or a fixture file.

Fixture files use the cache-file schema (see ``cache``). Handle records are
keyed by DOI, publisher records (kinds ``crossref``, ``datacite``,
``medra``) by prefix.
"""
from __future__ import annotations

import collections
import json
import threading
from pathlib import Path
from typing import Mapping

from ..doi import Doi, DoiPrefix, ValidityStatus
from .base import PublisherRecord, ResolutionOutcome
from .cache import PUBLISHER_KINDS, record_to_outcome, record_to_publisher


class FixtureError(ValueError):
    pass


class FixtureResolver:
    def __init__(
        self,
        table: Mapping[str, ValidityStatus | ResolutionOutcome] | None = None,
        prefixes: Mapping[str, PublisherRecord] | None = None,
        datacite: Mapping[str, PublisherRecord] | None = None,
        medra: Mapping[str, PublisherRecord] | None = None,
        default: ValidityStatus = ValidityStatus.INVALID,
    ):
        if default is ValidityStatus.VALID:
            raise ValueError("unlisted DOIs default to invalid or unknown")
        self.table = {k.casefold(): _as_outcome(v) for k, v in (table or {}).items()}
        self.prefixes = dict(prefixes or {})
        self.datacite_table = dict(datacite or {})
        self.medra_table = dict(medra or {})
        self.default = default
        self.calls: collections.Counter[tuple[str, str]] = collections.Counter()
        self._lock = threading.Lock()

    def _count(self, kind: str, key: str) -> None:
        with self._lock:
            self.calls[(kind, key.casefold())] += 1

    def total_calls(self, kind: str | None = None) -> int:
        return sum(n for (k, _), n in self.calls.items() if kind is None or k == kind)

    def resolve(self, doi: Doi) -> ResolutionOutcome:
        self._count("handle", doi.key)
        outcome = self.table.get(doi.key)
        if outcome is not None:
            return outcome
        if self.default is ValidityStatus.UNKNOWN:
            return ResolutionOutcome.unknown("not listed in fixture")
        return ResolutionOutcome.invalid(reason="not listed in fixture")

    def crossref_prefix(self, prefix: DoiPrefix) -> PublisherRecord | None:
        self._count("crossref", prefix.value)
        return self.prefixes.get(prefix.value)

    def datacite(self, prefix: DoiPrefix, doi: Doi) -> PublisherRecord | None:
        self._count("datacite", prefix.value)
        return self.datacite_table.get(prefix.value)

    def medra(self, prefix: DoiPrefix, doi: Doi) -> PublisherRecord | None:
        self._count("medra", prefix.value)
        return self.medra_table.get(prefix.value)


def _as_outcome(v: ValidityStatus | ResolutionOutcome) -> ResolutionOutcome:
    if isinstance(v, ResolutionOutcome):
        return v
    if v is ValidityStatus.UNKNOWN:
        return ResolutionOutcome.unknown("recorded as unknown")
    return ResolutionOutcome(v)


def fixture_resolver(table, prefixes=None, **kwargs) -> FixtureResolver:
    return FixtureResolver(table, prefixes, **kwargs)


def load_fixture(path: str | Path, default: ValidityStatus = ValidityStatus.INVALID) -> FixtureResolver:
    table: dict[str, ResolutionOutcome] = {}
    publishers: dict[str, dict[str, PublisherRecord]] = {k: {} for k in PUBLISHER_KINDS}
    try:
        lines = Path(path).read_text("utf-8").splitlines()
    except OSError as exc:
        raise FixtureError(f"cannot read fixture {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            kind = rec["kind"]
            if kind == "handle":
                table[rec["key"]] = record_to_outcome(rec)
            elif kind in publishers:
                record = record_to_publisher(rec)
                if record is not None:
                    publishers[kind][record.prefix.value] = record
            else:
                raise KeyError(kind)
        except (ValueError, KeyError, TypeError) as exc:
            raise FixtureError(f"{path}:{n}: bad fixture record ({exc})") from exc
    return FixtureResolver(table, publishers["crossref"], publishers["datacite"], publishers["medra"],
                           default=default)
