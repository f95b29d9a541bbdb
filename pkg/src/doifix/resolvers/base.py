from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Protocol
from urllib.parse import urlsplit

from ..doi import Doi, DoiPrefix, ValidityStatus

TEST_ACCOUNT_PREFIX = "10.5555"
TEST_ACCOUNT_NAME = "Test accounts"
UNIDENTIFIED = "unidentified"
CNKI_DOMAIN = "cnki.net"


class PublisherSource(enum.Enum):
    CROSSREF = "Crossref"
    DATACITE = "DataCite"
    MEDRA = "mEDRA"
    CNKI = "CNKI"
    UNIDENTIFIED = "Unidentified"
    TEST_ACCOUNT = "TestAccount"


FALLBACK_SOURCES = frozenset({PublisherSource.DATACITE, PublisherSource.MEDRA, PublisherSource.CNKI})


class LookupDeferred(Exception):
    """A lookup could not complete (transport failure); retry later."""


@dataclass(frozen=True)
class ResolutionOutcome:
    status: ValidityStatus
    agency: str | None = None
    url: str | None = None
    reason: str | None = None
    checked_at: float = field(default_factory=time.time, compare=False)

    def __post_init__(self):
        if self.agency is not None and self.status is not ValidityStatus.VALID:
            raise ValueError("agency is only recorded for valid DOIs")
        if self.status is ValidityStatus.UNKNOWN and not self.reason:
            raise ValueError("unknown outcomes need a diagnostic reason")

    @classmethod
    def valid(cls, url=None, agency=None):
        return cls(ValidityStatus.VALID, agency=agency, url=url)

    @classmethod
    def invalid(cls, reason=None):
        return cls(ValidityStatus.INVALID, reason=reason)

    @classmethod
    def unknown(cls, reason: str):
        return cls(ValidityStatus.UNKNOWN, reason=reason)


@dataclass(frozen=True)
class PublisherRecord:
    prefix: DoiPrefix | None
    name: str
    source: PublisherSource

    def __post_init__(self):
        if self.source is PublisherSource.UNIDENTIFIED and self.name != UNIDENTIFIED:
            raise ValueError("unidentified publishers are named 'unidentified'")
        if self.prefix is not None and self.prefix.value == TEST_ACCOUNT_PREFIX:
            if self.source is not PublisherSource.TEST_ACCOUNT:
                raise ValueError(f"{TEST_ACCOUNT_PREFIX} is the test-account prefix")

    @classmethod
    def unidentified(cls, prefix: DoiPrefix | None) -> PublisherRecord:
        return cls(prefix, UNIDENTIFIED, PublisherSource.UNIDENTIFIED)

    @classmethod
    def test_account(cls, prefix: DoiPrefix) -> PublisherRecord:
        return cls(prefix, TEST_ACCOUNT_NAME, PublisherSource.TEST_ACCOUNT)

    @property
    def identified(self) -> bool:
        return self.source is not PublisherSource.UNIDENTIFIED


class Resolver(Protocol):
    """Validity and publisher lookups.

    The agency methods return None on a miss and raise LookupDeferred on
    transport failure. ``resolve`` never raises for network problems; it
    returns an UNKNOWN outcome instead.
    """

    def resolve(self, doi: Doi) -> ResolutionOutcome: ...

    def crossref_prefix(self, prefix: DoiPrefix) -> PublisherRecord | None: ...

    def datacite(self, prefix: DoiPrefix, doi: Doi) -> PublisherRecord | None: ...

    def medra(self, prefix: DoiPrefix, doi: Doi) -> PublisherRecord | None: ...


def lookup_publisher_crossref(resolver: Resolver, prefix: DoiPrefix) -> PublisherRecord:
    if prefix.value == TEST_ACCOUNT_PREFIX:
        return PublisherRecord.test_account(prefix)
    record = resolver.crossref_prefix(prefix)
    return record if record is not None else PublisherRecord.unidentified(prefix)


def is_cnki_url(url: str | None) -> bool:
    if not url:
        return False
    host = (urlsplit(url).hostname or "").lower()
    return host == CNKI_DOMAIN or host.endswith("." + CNKI_DOMAIN)


def lookup_agency_fallback(resolver: Resolver, prefix: DoiPrefix, sample_doi: Doi) -> PublisherRecord:
    """Try DataCite, then mEDRA, then CNKI URL recognition; first hit wins.

    Callers only use this when Crossref does not know the prefix and the
    handle system reports ``sample_doi`` as valid.
    """
    for lookup in (resolver.datacite, resolver.medra):
        record = lookup(prefix, sample_doi)
        if record is not None:
            return record
    outcome = resolver.resolve(sample_doi)
    if outcome.status is ValidityStatus.UNKNOWN:
        raise LookupDeferred(outcome.reason)
    if is_cnki_url(outcome.url):
        return PublisherRecord(prefix, "CNKI", PublisherSource.CNKI)
    return PublisherRecord.unidentified(prefix)
