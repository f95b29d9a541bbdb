"""End-to-end acceptance checks, one test (or group) per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints
one PASS/FAIL line per criterion.
"""
import collections
import csv
import filecmp
import random
import socket
import time
from importlib import resources

import pytest
import yaml
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from doifix.attribution import attribute
from doifix.cli import execute_run
from doifix.config import RunConfig
from doifix.doi import DoiPrefix, ValidityStatus, parse_doi
from doifix.pipeline import CitationRecord, CitationStatus, compare_rulesets, process_corpus
from doifix.report import (
    FALLBACK_FILE, MATRIX_FILE, SAMPLE_FILE, SANKEY_FILE, OTHER, build_publisher_matrix, sankey_export,
)
from doifix.resolvers import (
    CachedResolver, CacheStore, FixtureResolver, PublisherRecord, PublisherSource, ResolutionOutcome,
    load_fixture,
)
from doifix.rules import SelfTestFailure, clean_string, load_ruleset, parse_ruleset, reference_corpus
from doifix.synthetic import generate_corpus, generate_rule_corpus


def crit(n, title):
    return pytest.mark.criterion(n, title=title)


def records_of(corpus):
    return [CitationRecord.from_strings(r.citing, r.cited, i) for i, r in enumerate(corpus.rows, 1)]


def resolver_of(corpus, **kw):
    return FixtureResolver({d: ValidityStatus.VALID for d in corpus.valid}
                           | {d: ValidityStatus.UNKNOWN for d in corpus.unknown}, **kw)


# 1 ------------------------------------------------------------------------

@crit(1, "reference rows clean exactly, < 1 s")
def test_c1_reference_rows_exact(extended):
    rows = reference_corpus()
    assert len(rows) == 23
    t0 = time.perf_counter()
    got = [clean_string(extended, invalid).output for invalid, _, _ in rows]
    elapsed = time.perf_counter() - t0
    assert got == [expected for _, expected, _ in rows]
    assert elapsed < 1.0


# 2 ------------------------------------------------------------------------

@crit(2, "multi-error example fires exactly {2, 19}")
def test_c2_multi_error(extended):
    trace = clean_string(extended, "10.1016/j.sbspro.2014.01.467<br>http://www.sciencedirect.com")
    assert trace.output == "10.1016/j.sbspro.2014.01.467"
    assert set(trace.fired) == {2, 19}


# 3 ------------------------------------------------------------------------

@crit(3, "longest capture kept for the rule 4 example")
def test_c3_longest_capture(extended):
    invalid = "10.1093/BIOINFORMATICS/BTV421.HTTPS://DOI.ORG/10.101/GR.186072.114"
    m = extended.get(4).regex.match(invalid)
    first, second = m.group(1), m.group(2)
    assert (len(first), len(second)) == (29, 20)
    assert clean_string(extended, invalid).output == first


# 4 ------------------------------------------------------------------------

def _bundled_doc(name):
    return yaml.safe_load(resources.files("doifix.data").joinpath(f"{name}.yaml").read_text("utf-8"))


@crit(4, "shipped rulesets self-test; mutated files fail with the rule id")
@pytest.mark.parametrize("name", ["extended", "baseline"])
def test_c4_shipped_rulesets_load(name):
    rs = load_ruleset(name)
    assert all(r.examples for r in rs.rules)


@crit(4, "shipped rulesets self-test; mutated files fail with the rule id")
@pytest.mark.parametrize("rule_id", range(1, 24))
def test_c4_mutated_example_names_rule(rule_id):
    doc = _bundled_doc("extended")
    rule = next(r for r in doc["rules"] if r["id"] == rule_id)
    rule["examples"][0]["expected"] += "X"
    with pytest.raises(SelfTestFailure) as info:
        parse_ruleset(yaml.safe_dump(doc))
    assert info.value.rule_id == rule_id


@crit(4, "shipped rulesets self-test; mutated files fail with the rule id")
def test_c4_mutated_pattern_names_rule():
    doc = _bundled_doc("extended")
    rule = next(r for r in doc["rules"] if r["id"] == 6)
    rule["pattern"] = r"(.*?)(?:\(\d{3}\)?)$"  # year needs 4 digits
    with pytest.raises(SelfTestFailure) as info:
        parse_ruleset(yaml.safe_dump(doc))
    assert info.value.rule_id == 6


# 5 ------------------------------------------------------------------------

@crit(5, "status partition and worker-count invariance on 1,000 records")
@settings(max_examples=5, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 2**32 - 1))
def test_c5_partition(extended, seed):
    corpus = generate_corpus(1000, seed=seed)
    records = records_of(corpus)
    resolver = resolver_of(corpus)

    def run(workers):
        return [(r.record.line, r.status, r.cleaned, r.fired_rules)
                for r in process_corpus(extended, resolver, records, workers=workers)]

    reference = run(1)
    counts = collections.Counter(status for _, status, _, _ in reference)
    assert sum(counts[s] for s in CitationStatus) == 1000
    for workers in (2, 4, 8):
        again = run(workers)
        assert collections.Counter(again) == collections.Counter(reference)
        assert sum(1 for _ in again) == 1000
    # the generator's own expectation is an independent oracle
    assert {s.value: counts[s] for s in CitationStatus} == corpus.expected_counts()


# 6 ------------------------------------------------------------------------

@crit(6, "cleaned-valid outputs re-enter as AlreadyValid")
def test_c6_refeed(extended, fixtures_dir):
    resolver = load_fixture(fixtures_dir / "medium_resolver.jsonl")
    with open(fixtures_dir / "medium_corpus.csv", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))[1:]
    records = [CitationRecord.from_strings(a, b) for a, b in rows]
    fixed = [r for r in process_corpus(extended, resolver, records)
             if r.status is CitationStatus.VALID_AFTER_CLEANING]
    assert len(fixed) > 500
    again = list(process_corpus(
        extended, resolver, [CitationRecord(r.record.citing, r.cleaned.normalized) for r in fixed]))
    assert all(r.status is CitationStatus.ALREADY_VALID and r.fired_rules == () for r in again)


# 7 ------------------------------------------------------------------------

@crit(7, "extended fixes at least as many as baseline; rule 8 example fixed only by extended")
def test_c7_comparison_direction(extended, baseline):
    corpus = generate_rule_corpus({i: 8 for i in range(1, 24)}, seed=3)
    table = {d: ValidityStatus.VALID for d in corpus.valid}
    records = records_of(corpus)
    row8 = next(inv for inv, _, rid in reference_corpus() if rid == 8)
    for inv, expected, _ in reference_corpus():
        table[expected] = ValidityStatus.VALID
        records.append(CitationRecord.from_strings("10.1000/citing.1", inv))
    resolver = FixtureResolver(table)
    report = compare_rulesets(records, [extended, baseline], resolver)
    ext, base = report.counts["extended"], report.counts["baseline"]
    assert ext.valid_after_cleaning >= base.valid_after_cleaning
    assert ext.valid_after_cleaning > base.valid_after_cleaning  # strictly, given the new rules

    only8 = [CitationRecord.from_strings("10.1000/citing.1", row8)]
    by_set = compare_rulesets(only8, [extended, baseline], resolver)
    assert by_set.counts["extended"].valid_after_cleaning == 1
    assert by_set.counts["baseline"].valid_after_cleaning == 0


# 8 ------------------------------------------------------------------------

# per-rule fix counts where five rules fall short of ten
SHORT_RULES = {15: 0, 16: 8, 17: 4, 18: 0, 23: 1}


def _sample_run(tmp_path, seed, name):
    per_rule = {i: 12 for i in range(1, 24)} | SHORT_RULES
    corpus = generate_rule_corpus({k: v for k, v in per_rule.items() if v}, seed=5)
    corpus.write_csv(tmp_path / "in.csv")
    corpus.write_fixture(tmp_path / "fx.jsonl")
    cfg = RunConfig(fixture=str(tmp_path / "fx.jsonl"), seed=seed, per_rule=10, workers=2, compare=[])
    out = tmp_path / name
    summary = execute_run(cfg, str(tmp_path / "in.csv"), out, files="sample")
    return summary, out / SAMPLE_FILE


@crit(8, "audit sample size is 230 minus the deficit; same seed, same bytes")
def test_c8_sampling(tmp_path):
    deficit = sum(10 - n for n in SHORT_RULES.values())
    assert 230 - deficit == 193
    s1, f1 = _sample_run(tmp_path, seed=42, name="a")
    s2, f2 = _sample_run(tmp_path, seed=42, name="b")
    assert s1["audit_sample_size"] == 193
    with open(f1, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 193
    per = collections.Counter(int(r["rule_id"]) for r in rows)
    for rid, n in SHORT_RULES.items():
        assert per[rid] == n
    assert f1.read_bytes() == f2.read_bytes()
    _, f3 = _sample_run(tmp_path, seed=43, name="c")
    assert f3.read_bytes() != f1.read_bytes()


# 9 ------------------------------------------------------------------------

def _result(extended, resolver, citing, cited):
    return next(process_corpus(extended, resolver, [CitationRecord.from_strings(citing, cited)]))


@crit(9, "test accounts, unidentified, fallback order, fallback isolation")
def test_c9_test_accounts_zero_calls(extended):
    resolver = FixtureResolver({}, {"10.1016": PublisherRecord(DoiPrefix("10.1016"), "Elsevier BV",
                                                              PublisherSource.CROSSREF)})
    res = _result(extended, resolver, "10.1016/j.a.1", "10.5555/12345678")
    before = resolver.total_calls("crossref")
    att = attribute(res, resolver)
    assert att.cited_publisher.name == "Test accounts"
    assert att.cited_publisher.source is PublisherSource.TEST_ACCOUNT
    # only the citing side was looked up
    assert resolver.total_calls("crossref") - before == 1
    assert resolver.calls[("crossref", "10.5555")] == 0
    assert resolver.total_calls("datacite") == resolver.total_calls("medra") == 0


@crit(9, "test accounts, unidentified, fallback order, fallback isolation")
def test_c9_unidentified_when_handle_invalid(extended):
    resolver = FixtureResolver({}, datacite={"10.5281": PublisherRecord(DoiPrefix("10.5281"), "Zenodo",
                                                                       PublisherSource.DATACITE)})
    res = _result(extended, resolver, "10.1016/j.a.1", "10.5281/zenodo.404")
    att = attribute(res, resolver)
    assert att.cited_publisher.name == "unidentified"
    assert not att.fallback_used
    assert resolver.total_calls("datacite") == 0


def _pub(prefix, name, source):
    return PublisherRecord(DoiPrefix(prefix), name, source)


@crit(9, "test accounts, unidentified, fallback order, fallback isolation")
@pytest.mark.parametrize("case", ["datacite", "medra", "cnki"])
def test_c9_fallback_order(extended, case):
    doi = "10.77777/x.1"
    dc = {"10.77777": _pub("10.77777", "DC", PublisherSource.DATACITE)} if case == "datacite" else {}
    md = {"10.77777": _pub("10.77777", "MD", PublisherSource.MEDRA)} if case != "cnki" else {}
    url = "https://kns.cnki.net/x" if case == "cnki" else "https://example.org/x"
    resolver = FixtureResolver({doi: ResolutionOutcome.valid(url=url)}, datacite=dc, medra=md)
    att = attribute(_result(extended, resolver, "10.1016/j.a.1", doi), resolver)
    assert att.fallback_used
    expected = {"datacite": PublisherSource.DATACITE, "medra": PublisherSource.MEDRA,
                "cnki": PublisherSource.CNKI}[case]
    assert att.cited_publisher.source is expected
    assert resolver.total_calls("datacite") == 1
    assert resolver.total_calls("medra") == (0 if case == "datacite" else 1)
    assert att.main_cited_publisher.name == "unidentified"


@crit(9, "test accounts, unidentified, fallback order, fallback isolation")
def test_c9_fallback_names_isolated(tmp_path, fixtures_dir):
    cfg = RunConfig(fixture=str(fixtures_dir / "medium_resolver.jsonl"), workers=2, compare=[])
    execute_run(cfg, str(fixtures_dir / "medium_corpus.csv"), tmp_path)
    fallback = (tmp_path / FALLBACK_FILE).read_text("utf-8")
    names = [row["name"] for row in csv.DictReader(fallback.splitlines())]
    assert set(names) == {"Zenodo", "Example mEDRA Publisher", "CNKI"}
    for other in (MATRIX_FILE, SANKEY_FILE):
        text = (tmp_path / other).read_text("utf-8")
        assert not any(n in text for n in names)
        assert "unidentified" in text


# 10 -----------------------------------------------------------------------

@crit(10, "Sankey flows conserve the attributed total")
def test_c10_sankey_conservation(extended):
    rng = random.Random(10)
    prefixes = {f"10.{2000 + i}": f"Publisher {chr(65 + i)}" for i in range(12)}
    crossref = {p: _pub(p, n, PublisherSource.CROSSREF) for p, n in prefixes.items()}
    plist = sorted(prefixes)
    records, table = [], {}
    for i in range(400):
        # skewed so the top ten are well defined
        src = plist[min(int(rng.expovariate(0.3)), 11)]
        dst = plist[min(int(rng.expovariate(0.25)), 11)]
        cited = f"{dst}/c.{i}"
        if i % 3:
            table[cited] = ValidityStatus.VALID
        records.append(CitationRecord.from_strings(f"{src}/s.{i}", cited))
    resolver = FixtureResolver(table, crossref)
    pairs = [(r, attribute(r, resolver)) for r in process_corpus(extended, resolver, records)]
    matrix = build_publisher_matrix(pairs)
    flows = sankey_export(matrix, top_n=10)
    assert matrix.total == 400
    assert sum(n for _, _, n in flows) == matrix.total
    named_src = sum(n for s, _, n in flows if s != OTHER)
    assert sum(n for s, _, n in flows if s == OTHER) == matrix.total - named_src
    named_dst = sum(n for _, t, n in flows if t != OTHER)
    assert sum(n for _, t, n in flows if t == OTHER) == matrix.total - named_dst
    assert len({s for s, _, _ in flows} - {OTHER}) == 10
    assert len({t for _, t, _ in flows} - {OTHER}) == 10
    assert named_src < matrix.total


# 11 -----------------------------------------------------------------------

@crit(11, "fixture runs are byte-identical, offline and < 5 s")
def test_c11_hermetic(tmp_path, fixtures_dir, monkeypatch):
    def no_network(*a, **k):
        raise AssertionError("network access attempted")

    monkeypatch.setattr(socket.socket, "connect", no_network)
    monkeypatch.setattr(socket, "create_connection", no_network)
    cfg = RunConfig(fixture=str(fixtures_dir / "medium_resolver.jsonl"), workers=4, seed=1,
                    compare=["extended", "baseline"])
    t0 = time.perf_counter()
    execute_run(cfg, str(fixtures_dir / "medium_corpus.csv"), tmp_path / "a")
    elapsed = time.perf_counter() - t0
    execute_run(cfg, str(fixtures_dir / "medium_corpus.csv"), tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len(names) == 7
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert mismatch == [] and errors == []
    assert elapsed < 5.0


# 12 -----------------------------------------------------------------------

@crit(12, "resolver lookups bounded by distinct cited + cleaned strings")
def test_c12_cache_economy(extended):
    corpus = generate_corpus(600, seed=12)
    # Unknown verdicts are never cached, so only settled strings are repeated
    rows = [r for r in corpus.rows if r.expected != "indeterminate"]
    rows = rows + rows[::2] + [r for r in corpus.rows if r.expected == "indeterminate"]
    random.Random(0).shuffle(rows)
    records = [CitationRecord.from_strings(r.citing, r.cited) for r in rows]
    inner = resolver_of(corpus)
    resolver = CachedResolver(inner, CacheStore())
    results = list(process_corpus(extended, resolver, records, workers=4))
    distinct_cited = {parse_doi(r.record.cited_raw).key for r in results}
    distinct_cleaned = {r.cleaned.key for r in results if r.cleaned is not None}
    assert len(rows) > len(distinct_cited)
    assert inner.total_calls("handle") <= len(distinct_cited) + len(distinct_cleaned)
