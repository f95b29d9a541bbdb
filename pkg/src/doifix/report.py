"""Corpus aggregates and report files.

All writers produce deterministic output: rows are sorted, JSON keys are
sorted, and nothing time-dependent is recorded.
"""
from __future__ import annotations

import collections
import csv
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .attribution import PublisherAttribution
from .pipeline import CitationStatus, ComparisonReport, PipelineResult

OTHER = "other"
RULE_IDS = tuple(range(1, 24))

MATRIX_FILE = "publisher_matrix.csv"
SANKEY_FILE = "sankey.csv"
HISTOGRAM_FILE = "rule_histogram.csv"
COMPARISON_FILE = "comparison.csv"
SAMPLE_FILE = "audit_sample.csv"
FALLBACK_FILE = "fallback_publishers.csv"
META_FILE = "run_meta.json"


@dataclass
class ValiditySplit:
    became_valid: int = 0
    still_invalid: int = 0

    @property
    def total(self) -> int:
        return self.became_valid + self.still_invalid


@dataclass
class PublisherMatrix:
    post_cleaning: bool = False
    outgoing: dict[str, ValiditySplit] = field(default_factory=lambda: collections.defaultdict(ValiditySplit))
    incoming: dict[str, ValiditySplit] = field(default_factory=lambda: collections.defaultdict(ValiditySplit))
    flows: collections.Counter = field(default_factory=collections.Counter)
    excluded: int = 0

    def _valid(self, result: PipelineResult) -> bool:
        if self.post_cleaning:
            return result.became_valid
        return result.status is CitationStatus.ALREADY_VALID

    def add(self, result: PipelineResult, attribution: PublisherAttribution) -> None:
        if result.status is CitationStatus.INDETERMINATE:
            self.excluded += 1
            return
        src = attribution.citing_publisher.name
        dst = attribution.main_cited_publisher.name
        valid = self._valid(result)
        for side, name in ((self.outgoing, src), (self.incoming, dst)):
            if valid:
                side[name].became_valid += 1
            else:
                side[name].still_invalid += 1
        self.flows[(src, dst)] += 1

    @property
    def total(self) -> int:
        return sum(self.flows.values())

    def rows(self) -> list[tuple[str, int, int, int, int]]:
        names = set(self.outgoing) | set(self.incoming)
        empty = ValiditySplit()

        def key(n):
            return (-self.outgoing.get(n, empty).total, -self.incoming.get(n, empty).total, n)

        rows = []
        for n in sorted(names, key=key):
            o, i = self.outgoing.get(n, empty), self.incoming.get(n, empty)
            rows.append((n, o.became_valid, o.still_invalid, i.became_valid, i.still_invalid))
        return rows


def build_publisher_matrix(
    pairs: Iterable[tuple[PipelineResult, PublisherAttribution]], post_cleaning: bool = False
) -> PublisherMatrix:
    matrix = PublisherMatrix(post_cleaning=post_cleaning)
    for result, attribution in pairs:
        matrix.add(result, attribution)
    return matrix


def _top(totals: collections.Counter, n: int) -> set[str]:
    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return {name for name, _ in ranked[:n]}


def sankey_export(matrix: PublisherMatrix, top_n: int = 10) -> list[tuple[str, str, int]]:
    """Citing -> cited flows with everything outside the top ``top_n`` on
    either side folded into "other"."""
    if top_n < 1:
        raise ValueError("top_n must be at least 1")
    by_source = collections.Counter()
    by_target = collections.Counter()
    for (src, dst), n in matrix.flows.items():
        by_source[src] += n
        by_target[dst] += n
    sources, targets = _top(by_source, top_n), _top(by_target, top_n)
    out = collections.Counter()
    for (src, dst), n in matrix.flows.items():
        out[(src if src in sources else OTHER, dst if dst in targets else OTHER)] += n
    return sorted(((s, t, n) for (s, t), n in out.items()), key=lambda r: (-r[2], r[0], r[1]))


@dataclass
class RuleHistogram:
    counts: dict[int, int]

    def add(self, result: PipelineResult) -> None:
        if result.status is CitationStatus.VALID_AFTER_CLEANING:
            for rule_id in result.fired_rules:
                self.counts[rule_id] = self.counts.get(rule_id, 0) + 1


def rule_histogram(results: Iterable[PipelineResult], rule_ids: Iterable[int] = RULE_IDS) -> RuleHistogram:
    hist = RuleHistogram({i: 0 for i in rule_ids})
    for r in results:
        hist.add(r)
    return hist


SampleRow = tuple[str, str, str]  # citing, cited_raw, cleaned


@dataclass
class AuditSample:
    seed: int
    per_rule: int
    samples: dict[int, list[SampleRow]]

    @property
    def size(self) -> int:
        return sum(len(v) for v in self.samples.values())


class SampleCollector:
    """Keeps the (citing, cited, cleaned) triples of fixed citations per rule."""

    def __init__(self):
        self.candidates: dict[int, list[SampleRow]] = collections.defaultdict(list)

    def add(self, result: PipelineResult) -> None:
        if result.status is not CitationStatus.VALID_AFTER_CLEANING:
            return
        row = (result.record.citing.normalized, result.record.cited_raw, result.cleaned.normalized)
        for rule_id in result.fired_rules:
            self.candidates[rule_id].append(row)

    def draw(self, per_rule: int = 10, seed: int = 0, rule_ids: Iterable[int] = RULE_IDS) -> AuditSample:
        samples = {}
        for rule_id in rule_ids:
            pool = sorted(self.candidates.get(rule_id, []))
            rng = random.Random(f"{seed}:{rule_id}")
            picked = rng.sample(pool, min(per_rule, len(pool)))
            samples[rule_id] = sorted(picked)
        return AuditSample(seed, per_rule, samples)


def stratified_sample(
    results: Iterable[PipelineResult], per_rule: int = 10, seed: int = 0, rule_ids: Iterable[int] = RULE_IDS
) -> AuditSample:
    """Uniform sample of up to ``per_rule`` fixed citations for each rule.

    Candidates are sorted before drawing, so the sample depends only on the
    seed and the set of results, not on their order.
    """
    collector = SampleCollector()
    for r in results:
        collector.add(r)
    return collector.draw(per_rule, seed, rule_ids)


class FallbackCollector:
    def __init__(self):
        self.counts: collections.Counter = collections.Counter()

    def add(self, attribution: PublisherAttribution) -> None:
        if attribution.fallback_used:
            p = attribution.cited_publisher
            self.counts[(p.prefix.value if p.prefix else "", p.name, p.source.value)] += 1

    def rows(self) -> list[tuple[str, str, str, int]]:
        return sorted((k + (n,) for k, n in self.counts.items()), key=lambda r: (r[0], r[1], r[2]))


def write_csv(path: Path, header: list[str], rows: Iterable[Iterable]) -> Path:
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


MATRIX_HEADER = ["publisher", "outgoing_valid", "outgoing_invalid", "incoming_valid", "incoming_invalid"]
SAMPLE_HEADER = ["rule_id", "citing", "cited_raw", "cleaned"]
COMPARISON_HEADER = [
    "ruleset", "corpus_size", "already_valid", "valid_after_cleaning", "fixed_prefix",
    "fixed_suffix", "fixed_other", "still_invalid", "indeterminate", "quarantined",
]


def write_audit_sample(path: Path, sample: AuditSample) -> Path:
    rows = ([rid, *row] for rid, rows in sorted(sample.samples.items()) for row in rows)
    return write_csv(path, SAMPLE_HEADER, rows)


def comparison_rows(comparison: ComparisonReport) -> list[list]:
    rows = []
    for name, c in comparison.counts.items():
        rows.append([
            name, comparison.corpus_size, c.already_valid, c.valid_after_cleaning,
            c.fixed_by_class["prefix"], c.fixed_by_class["suffix"], c.fixed_by_class["other"],
            c.still_invalid, c.indeterminate, c.quarantined,
        ])
    return rows


def write_reports(
    destination: str | Path,
    *,
    matrix: PublisherMatrix,
    histogram: RuleHistogram,
    sample: AuditSample,
    fallback: FallbackCollector,
    meta: dict,
    top_n: int = 10,
    comparison: ComparisonReport | None = None,
) -> list[Path]:
    dest = Path(destination)
    dest.mkdir(parents=True, exist_ok=True)
    written = [
        write_csv(dest / MATRIX_FILE, MATRIX_HEADER, matrix.rows()),
        write_csv(dest / SANKEY_FILE, ["source", "target", "count"], sankey_export(matrix, top_n)),
        write_csv(dest / HISTOGRAM_FILE, ["rule_id", "count"], sorted(histogram.counts.items())),
        write_audit_sample(dest / SAMPLE_FILE, sample),
        write_csv(dest / FALLBACK_FILE, ["prefix", "name", "source", "citations"], fallback.rows()),
    ]
    meta = dict(meta)
    if comparison is not None:
        written.append(write_csv(dest / COMPARISON_FILE, COMPARISON_HEADER, comparison_rows(comparison)))
        meta["comparison_disagreements"] = [
            {"position": i, "citing": citing, "cited_raw": cited,
             "verdicts": {k: {"status": s, "cleaned": c} for k, (s, c) in verdicts.items()}}
            for i, citing, cited, verdicts in comparison.disagreements
        ]
    meta_path = dest / META_FILE
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    written.append(meta_path)
    return written
