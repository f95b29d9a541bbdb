"""Responsible (citing) and affected (cited) publisher for each citation."""
from __future__ import annotations

from dataclasses import dataclass

from .doi import ValidityStatus
from .pipeline import CitationStatus, PipelineResult
from .resolvers import (
    FALLBACK_SOURCES,
    LookupDeferred,
    PublisherRecord,
    PublisherSource,
    Resolver,
    lookup_agency_fallback,
    lookup_publisher_crossref,
)

# recorded in run metadata
FALLBACK_CRITERION = (
    "agency fallback is tried for a cited prefix only when Crossref has no "
    "record for it and the handle system resolves the citation's cited DOI"
)


@dataclass(frozen=True)
class PublisherAttribution:
    citing_publisher: PublisherRecord
    cited_publisher: PublisherRecord
    fallback_used: bool = False

    def __post_init__(self):
        if self.fallback_used and self.cited_publisher.source not in FALLBACK_SOURCES:
            raise ValueError("fallback attributions come from DataCite, mEDRA or CNKI")

    @property
    def main_cited_publisher(self) -> PublisherRecord:
        """Cited publisher as reported in the main (Crossref-only) results."""
        if self.fallback_used:
            return PublisherRecord.unidentified(self.cited_publisher.prefix)
        return self.cited_publisher


def attribute(result: PipelineResult, resolver: Resolver) -> PublisherAttribution:
    """Look up both publishers of a processed citation.

    Raises LookupDeferred when a lookup fails for transport reasons.
    """
    citing = lookup_publisher_crossref(resolver, result.citing_prefix)
    prefix = result.cited_prefix
    if prefix is None:
        return PublisherAttribution(citing, PublisherRecord.unidentified(None))
    cited = lookup_publisher_crossref(resolver, prefix)
    if cited.source is not PublisherSource.UNIDENTIFIED:
        return PublisherAttribution(citing, cited)

    doi = result.final_doi
    if result.status is CitationStatus.STILL_INVALID or doi is None:
        return PublisherAttribution(citing, cited)
    if result.status is CitationStatus.INDETERMINATE:
        outcome = resolver.resolve(doi)
        if outcome.status is ValidityStatus.UNKNOWN:
            raise LookupDeferred(outcome.reason)
        if outcome.status is ValidityStatus.INVALID:
            return PublisherAttribution(citing, cited)
    fallback = lookup_agency_fallback(resolver, prefix, doi)
    if fallback.source is PublisherSource.UNIDENTIFIED:
        return PublisherAttribution(citing, cited)
    return PublisherAttribution(citing, fallback, fallback_used=True)
