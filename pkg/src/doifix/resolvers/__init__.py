"""Validity and publisher lookups: live HTTP clients, a cache, and an offline fixture."""
from .base import (
    CNKI_DOMAIN,
    FALLBACK_SOURCES,
    TEST_ACCOUNT_NAME,
    TEST_ACCOUNT_PREFIX,
    UNIDENTIFIED,
    LookupDeferred,
    PublisherRecord,
    PublisherSource,
    ResolutionOutcome,
    Resolver,
    is_cnki_url,
    lookup_agency_fallback,
    lookup_publisher_crossref,
)
from .cache import CachedResolver, CacheStore, cached
from .fixture import FixtureError, FixtureResolver, fixture_resolver, load_fixture
from .http import HttpSettings, LiveResolver, RateLimiter, limiter_for


__all__ = [
    "CNKI_DOMAIN", "FALLBACK_SOURCES", "TEST_ACCOUNT_NAME", "TEST_ACCOUNT_PREFIX", "UNIDENTIFIED",
    "LookupDeferred", "PublisherRecord", "PublisherSource", "ResolutionOutcome", "Resolver",
    "is_cnki_url", "lookup_agency_fallback", "lookup_publisher_crossref",
    "CachedResolver", "CacheStore", "cached",
    "FixtureError", "FixtureResolver", "fixture_resolver", "load_fixture",
    "HttpSettings", "LiveResolver", "RateLimiter", "limiter_for",
]
