"""Validate, clean, revalidate.

Each citation's cited DOI is first resolved as-is. Only DOIs that do not
resolve are cleaned, and only cleaned strings that differ from the input are
resolved a second time.
"""
from __future__ import annotations

import collections
import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .doi import Doi, DoiPrefix, EmptyInput, NoPrefix, ValidityStatus, extract_prefix, parse_doi, try_prefix
from .resolvers import Resolver
from .rules import ErrorClass, RuleSet, clean_string

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    pass


class CitationStatus(enum.Enum):
    ALREADY_VALID = "already_valid"
    VALID_AFTER_CLEANING = "valid_after_cleaning"
    STILL_INVALID = "still_invalid"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class CitationRecord:
    citing: Doi
    cited_raw: str
    line: int | None = field(default=None, compare=False)

    @classmethod
    def from_strings(cls, citing: str, cited: str, line: int | None = None) -> CitationRecord:
        return cls(parse_doi(citing), cited, line)


@dataclass(frozen=True)
class PipelineResult:
    record: CitationRecord
    status: CitationStatus
    citing_prefix: DoiPrefix
    cited_prefix: DoiPrefix | None
    cleaned: Doi | None = None
    fired_rules: tuple[int, ...] = ()
    reason: str | None = None

    @property
    def final_doi(self) -> Doi | None:
        """The cited DOI the verdict refers to (cleaned form if there is one)."""
        if self.cleaned is not None:
            return self.cleaned
        try:
            return parse_doi(self.record.cited_raw)
        except EmptyInput:
            return None

    @property
    def became_valid(self) -> bool:
        return self.status in (CitationStatus.ALREADY_VALID, CitationStatus.VALID_AFTER_CLEANING)


@dataclass
class Summary:
    counts: collections.Counter = field(default_factory=collections.Counter)
    quarantined: list[tuple[int | None, str, str]] = field(default_factory=list)

    def add(self, result: PipelineResult) -> None:
        self.counts[result.status] += 1

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def as_dict(self) -> dict:
        d = {s.value: self.counts.get(s, 0) for s in CitationStatus}
        d["total"] = self.total
        d["quarantined"] = len(self.quarantined)
        return d


def process_citation(ruleset: RuleSet, resolver: Resolver, record: CitationRecord) -> PipelineResult:
    try:
        citing_prefix = extract_prefix(record.citing)
    except NoPrefix as exc:
        raise ParseError(f"citing DOI {record.citing.normalized!r} has no prefix") from exc
    try:
        cited = parse_doi(record.cited_raw)
    except EmptyInput as exc:
        raise ParseError("empty cited DOI") from exc

    def result(status, cleaned=None, fired=(), reason=None):
        final = cleaned if cleaned is not None else cited
        return PipelineResult(record, status, citing_prefix, try_prefix(final), cleaned, tuple(fired), reason)

    first = resolver.resolve(cited)
    if first.status is ValidityStatus.UNKNOWN:
        return result(CitationStatus.INDETERMINATE, reason=first.reason)
    if first.status is ValidityStatus.VALID:
        return result(CitationStatus.ALREADY_VALID)

    trace = clean_string(ruleset, cited.normalized)
    if not trace.changed:
        return result(CitationStatus.STILL_INVALID)
    cleaned = parse_doi(trace.output)
    second = resolver.resolve(cleaned)
    if second.status is ValidityStatus.UNKNOWN:
        return result(CitationStatus.INDETERMINATE, cleaned, trace.fired, second.reason)
    if second.status is ValidityStatus.VALID:
        return result(CitationStatus.VALID_AFTER_CLEANING, cleaned, trace.fired)
    return result(CitationStatus.STILL_INVALID, cleaned, trace.fired)


def process_corpus(
    ruleset: RuleSet,
    resolver: Resolver,
    records: Iterable[CitationRecord],
    *,
    workers: int = 1,
    summary: Summary | None = None,
) -> Iterator[PipelineResult]:
    """Yield one result per record, in input order.

    With ``workers > 1`` records are processed on a thread pool with a
    bounded number in flight. Records that fail to parse are added to
    ``summary.quarantined`` instead of being yielded.
    """
    summary = summary if summary is not None else Summary()

    def emit(record, outcome):
        if isinstance(outcome, ParseError):
            logger.info("quarantined line %s: %s", record.line, outcome)
            summary.quarantined.append((record.line, record.cited_raw, str(outcome)))
            return None
        summary.add(outcome)
        return outcome

    def safe(record):
        try:
            return process_citation(ruleset, resolver, record)
        except ParseError as exc:
            return exc

    if workers <= 1:
        for record in records:
            out = emit(record, safe(record))
            if out is not None:
                yield out
        return

    window = collections.deque()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for record in records:
            window.append((record, pool.submit(safe, record)))
            if len(window) >= workers * 4:
                rec, fut = window.popleft()
                out = emit(rec, fut.result())
                if out is not None:
                    yield out
        while window:
            rec, fut = window.popleft()
            out = emit(rec, fut.result())
            if out is not None:
                yield out


def fixed_class(ruleset: RuleSet, result: PipelineResult) -> ErrorClass | None:
    """Error class credited with a fix: the class of the first rule that fired."""
    if result.status is not CitationStatus.VALID_AFTER_CLEANING or not result.fired_rules:
        return None
    return ruleset.get(result.fired_rules[0]).error_class


@dataclass
class RulesetCounts:
    name: str
    already_valid: int = 0
    valid_after_cleaning: int = 0
    fixed_by_class: dict[str, int] = field(default_factory=lambda: {c.value: 0 for c in ErrorClass})
    still_invalid: int = 0
    indeterminate: int = 0
    quarantined: int = 0


@dataclass
class ComparisonReport:
    corpus_size: int
    counts: dict[str, RulesetCounts]
    # (position, citing, cited_raw, {ruleset name: (status, cleaned)})
    disagreements: list[tuple[int, str, str, dict[str, tuple[str, str]]]]


def compare_rulesets(
    records: Sequence[CitationRecord],
    rulesets: Sequence[RuleSet],
    resolver: Resolver,
    *,
    workers: int = 1,
) -> ComparisonReport:
    if len(rulesets) < 2:
        raise ValueError("comparison needs at least two rulesets")
    names = [rs.name for rs in rulesets]
    if len(set(names)) != len(names):
        raise ValueError("ruleset names must be distinct")
    records = list(records)
    runs: dict[str, list[PipelineResult | None]] = {}
    counts: dict[str, RulesetCounts] = {}
    for rs in rulesets:
        summary = Summary()
        results = list(process_corpus(rs, resolver, records, workers=workers, summary=summary))
        # quarantined records are skipped; realign by identity
        it = iter(results)
        aligned = []
        pending = next(it, None)
        for rec in records:
            if pending is not None and pending.record is rec:
                aligned.append(pending)
                pending = next(it, None)
            else:
                aligned.append(None)
        runs[rs.name] = aligned
        c = RulesetCounts(rs.name, quarantined=len(summary.quarantined))
        for r in results:
            if r.status is CitationStatus.ALREADY_VALID:
                c.already_valid += 1
            elif r.status is CitationStatus.VALID_AFTER_CLEANING:
                c.valid_after_cleaning += 1
                c.fixed_by_class[fixed_class(rs, r).value] += 1
            elif r.status is CitationStatus.STILL_INVALID:
                c.still_invalid += 1
            else:
                c.indeterminate += 1
        counts[rs.name] = c

    disagreements = []
    for i, rec in enumerate(records):
        verdicts = {}
        for name in names:
            r = runs[name][i]
            if r is None:
                verdicts[name] = ("quarantined", "")
            else:
                verdicts[name] = (r.status.value, r.cleaned.normalized if r.cleaned else "")
        if len({v[0] for v in verdicts.values()}) > 1:
            disagreements.append((i, rec.citing.normalized, rec.cited_raw, verdicts))
    return ComparisonReport(len(records), counts, disagreements)
