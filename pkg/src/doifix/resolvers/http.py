"""Live clients for the handle system and the registration agencies."""
from __future__ import annotations

import collections
import logging
import threading
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Callable
from urllib.parse import quote

import requests

from ..doi import Doi, DoiPrefix
from .base import LookupDeferred, PublisherRecord, PublisherSource, ResolutionOutcome

logger = logging.getLogger(__name__)

USER_AGENT = "doifix/0.1"


@dataclass
class HttpSettings:
    doi_api_base: str = "https://doi.org"
    crossref_api_base: str = "https://api.crossref.org"
    datacite_api_base: str = "https://api.datacite.org"
    medra_api_base: str = "https://api.medra.org"
    mailto: str = ""
    rate: float = 10.0
    timeout: float = 20.0
    attempts: int = 3
    backoff: float = 0.5


class RateLimiter:
    """Sliding one-second window: at most ``rate`` acquisitions per second."""

    def __init__(self, rate: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.limit = max(1, int(rate))
        self.clock = clock
        self.sleep = sleep
        self._stamps: collections.deque[float] = collections.deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            while True:
                now = self.clock()
                while self._stamps and now - self._stamps[0] >= 1.0:
                    self._stamps.popleft()
                if len(self._stamps) < self.limit:
                    self._stamps.append(now)
                    return
                # floor the wait so float rounding cannot stall the loop
                self.sleep(max(1.0 - (now - self._stamps[0]), 1e-3))


_limiters: dict[str, RateLimiter] = {}
_limiters_lock = threading.Lock()


def limiter_for(endpoint: str, rate: float) -> RateLimiter:
    """Process-wide limiter shared by every client talking to ``endpoint``."""
    with _limiters_lock:
        limiter = _limiters.get(endpoint)
        if limiter is None or limiter.limit != max(1, int(rate)):
            limiter = _limiters[endpoint] = RateLimiter(rate)
        return limiter


class TransportError(Exception):
    pass


class LiveResolver:
    def __init__(self, settings: HttpSettings | None = None, session: requests.Session | None = None):
        self.settings = settings or HttpSettings()
        self.session = session or requests.Session()
        agent = USER_AGENT
        if self.settings.mailto:
            agent += f" (mailto:{self.settings.mailto})"
        self.session.headers["User-Agent"] = agent

    def _get(self, base: str, path: str, **kwargs) -> requests.Response:
        s = self.settings
        limiter = limiter_for(base, s.rate)
        url = base.rstrip("/") + path
        last = None
        for attempt in range(s.attempts):
            if attempt:
                time.sleep(s.backoff * 2 ** (attempt - 1))
            limiter.acquire()
            try:
                resp = self.session.get(url, timeout=s.timeout, **kwargs)
            except requests.RequestException as exc:
                last = f"connection: {exc.__class__.__name__}: {exc}"
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = f"http {resp.status_code}"
                continue
            return resp
        logger.warning("giving up on %s after %d attempts (%s)", url, s.attempts, last)
        raise TransportError(last)

    def resolve(self, doi: Doi) -> ResolutionOutcome:
        path = "/api/handles/" + quote(doi.normalized, safe="/")
        try:
            resp = self._get(self.settings.doi_api_base, path)
        except TransportError as exc:
            return ResolutionOutcome.unknown(str(exc))
        try:
            payload = resp.json()
            code = payload["responseCode"]
        except (ValueError, KeyError, TypeError):
            return ResolutionOutcome.unknown(f"malformed handle response (http {resp.status_code})")
        if code == 1:
            url = None
            for value in payload.get("values") or []:
                if value.get("type") == "URL":
                    url = (value.get("data") or {}).get("value")
                    break
            return ResolutionOutcome.valid(url=url)
        if code in (100, 200):
            return ResolutionOutcome.invalid(reason=f"handle responseCode {code}")
        return ResolutionOutcome.unknown(f"unexpected handle responseCode {code!r}")

    def _json_or_miss(self, base: str, path: str) -> dict | None:
        try:
            resp = self._get(base, path)
        except TransportError as exc:
            raise LookupDeferred(str(exc)) from exc
        if resp.status_code == 404:
            return None
        if resp.status_code != 200:
            raise LookupDeferred(f"http {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise LookupDeferred("malformed JSON response") from exc

    def crossref_prefix(self, prefix: DoiPrefix) -> PublisherRecord | None:
        payload = self._json_or_miss(self.settings.crossref_api_base, f"/prefixes/{prefix.value}")
        if payload is None:
            return None
        name = (payload.get("message") or {}).get("name")
        if not name:
            return None
        return PublisherRecord(prefix, name, PublisherSource.CROSSREF)

    def datacite(self, prefix: DoiPrefix, doi: Doi) -> PublisherRecord | None:
        path = "/dois/" + quote(doi.normalized, safe="/")
        payload = self._json_or_miss(self.settings.datacite_api_base, path)
        if payload is None:
            return None
        publisher = ((payload.get("data") or {}).get("attributes") or {}).get("publisher")
        if isinstance(publisher, dict):
            publisher = publisher.get("name")
        if not publisher:
            return None
        return PublisherRecord(prefix, publisher, PublisherSource.DATACITE)

    def medra(self, prefix: DoiPrefix, doi: Doi) -> PublisherRecord | None:
        path = "/metadata/" + quote(doi.normalized, safe="/")
        try:
            resp = self._get(self.settings.medra_api_base, path)
        except TransportError as exc:
            raise LookupDeferred(str(exc)) from exc
        if resp.status_code == 404:
            return None
        if resp.status_code != 200:
            raise LookupDeferred(f"http {resp.status_code}")
        try:
            root = ET.fromstring(resp.content)
        except ET.ParseError as exc:
            raise LookupDeferred("malformed mEDRA XML") from exc
        # ONIX documents are namespaced; match on the local tag name
        for el in root.iter():
            if el.tag.rsplit("}", 1)[-1] == "PublisherName" and (el.text or "").strip():
                return PublisherRecord(prefix, el.text.strip(), PublisherSource.MEDRA)
        return None
