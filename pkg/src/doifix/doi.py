"""DOI value types, normalization and prefix extraction."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class DoiError(ValueError):
    pass


class EmptyInput(DoiError):
    pass


class NoPrefix(DoiError):
    pass


@dataclass(frozen=True, eq=False)
class Doi:
    """A DOI as read from the data.

    ``raw`` keeps the original characters; ``normalized`` only has the
    surrounding whitespace trimmed. Case is preserved in storage but
    ignored for equality and hashing.
    """

    raw: str
    normalized: str = field(default="")

    def __post_init__(self):
        if not self.normalized:
            object.__setattr__(self, "normalized", self.raw.strip())
        if not self.normalized or self.normalized != self.normalized.strip():
            raise EmptyInput(f"not a usable DOI string: {self.raw!r}")

    @property
    def key(self) -> str:
        return self.normalized.casefold()

    def __eq__(self, other):
        if not isinstance(other, Doi):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return self.normalized


@dataclass(frozen=True)
class DoiPrefix:
    value: str

    def __post_init__(self):
        if not self.value.startswith("10.") or "/" in self.value:
            raise NoPrefix(f"invalid DOI prefix: {self.value!r}")

    def __str__(self):
        return self.value


class ValidityStatus(enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    UNKNOWN = "unknown"


def parse_doi(raw: str) -> Doi:
    """Trim surrounding whitespace; raise EmptyInput if nothing is left.

    >>> parse_doi("  10.1016/j.aca.2006.07.086 ").normalized
    '10.1016/j.aca.2006.07.086'
    """
    normalized = raw.strip()
    if not normalized:
        raise EmptyInput("empty DOI string")
    return Doi(raw=raw, normalized=normalized)


def extract_prefix(doi: Doi) -> DoiPrefix:
    """Registrant prefix: from the leading "10." up to the first "/".

    >>> extract_prefix(parse_doi("10.1016/j.aca.2006.07.086"))
    DoiPrefix(value='10.1016')
    """
    s = doi.normalized
    if not s.startswith("10.") or "/" not in s:
        raise NoPrefix(f"no DOI prefix in {s!r}")
    return DoiPrefix(s.split("/", 1)[0])


def try_prefix(doi: Doi | None) -> DoiPrefix | None:
    if doi is None:
        return None
    try:
        return extract_prefix(doi)
    except NoPrefix:
        return None


def doi_equals(a: Doi, b: Doi) -> bool:
    return a.key == b.key
