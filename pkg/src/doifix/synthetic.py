"""Synthetic citation corpora with known answers.

Each cited DOI is built from a registered base DOI by appending, inserting
or prefixing the kind of junk each cleaning rule targets. Because the
generator knows the base, it also knows the expected pipeline status
without running the rules, which makes it usable as an independent check.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

# Crossref member names for the fixture prefixes.
CROSSREF_PUBLISHERS = {
    "10.1016": "Elsevier BV",
    "10.1007": "Springer Science and Business Media LLC",
    "10.1097": "Ovid Technologies (Wolters Kluwer Health)",
    "10.1145": "Association for Computing Machinery (ACM)",
    "10.1080": "Informa UK Limited",
    "10.1002": "Wiley",
    "10.1017": "Cambridge University Press (CUP)",
    "10.2307": "JSTOR",
    "10.1515": "Walter de Gruyter GmbH",
    "10.1093": "Oxford University Press (OUP)",
    "10.1371": "Public Library of Science (PLoS)",
    "10.1177": "SAGE Publications",
    "10.1063": "AIP Publishing",
    "10.3390": "MDPI AG",
    "10.1021": "American Chemical Society (ACS)",
    "10.14778": "VLDB Endowment",
}
# Prefixes registered with other agencies, or nowhere. Names are illustrative.
DATACITE_PUBLISHERS = {"10.5281": "Zenodo"}
MEDRA_PUBLISHERS = {"10.99001": "Example mEDRA Publisher"}
CNKI_PREFIX = "10.99002"
UNREGISTERED_PREFIX = "10.99999"
TEST_PREFIX = "10.5555"

CROSSREF_PREFIXES = sorted(CROSSREF_PUBLISHERS)


def _journal_doi(prefix: str, rng: random.Random) -> str:
    word = "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(rng.randint(3, 6)))
    return f"{prefix}/j.{word}.{rng.randint(1990, 2020)}.{rng.randint(1, 12):02d}.{rng.randint(1, 999):03d}"


def _chapter_doi(prefix: str, rng: random.Random) -> str:
    return f"{prefix}/978-3-{rng.randint(100, 999)}-{rng.randint(10000, 99999)}-{rng.randint(0, 9)}_{rng.randint(1, 40)}"


def base_doi(prefix: str, rng: random.Random, underscore: bool = False) -> str:
    return _chapter_doi(prefix, rng) if underscore else _journal_doi(prefix, rng)


def _insert_in_suffix(doi: str, piece: str, rng: random.Random) -> str:
    prefix, suffix = doi.split("/", 1)
    cut = rng.randint(1, len(suffix) - 1)
    return f"{prefix}/{suffix[:cut]}{piece}{suffix[cut:]}"


def _double_dot(doi: str, rng: random.Random) -> str:
    prefix, suffix = doi.split("/", 1)
    dots = [i for i, c in enumerate(suffix) if c == "."]
    i = rng.choice(dots)
    return f"{prefix}/{suffix[:i]}.{suffix[i:]}"


Corruption = Callable[[str, random.Random], str]

CORRUPTIONS: dict[int, Corruption] = {
    1: lambda d, r: d + r.choice([".", ",", ";", ".."]),
    2: lambda d, r: d + r.choice([".", ",", ""]) + "HTTP://WWW.EXAMPLE.COM/CONTENT/" + str(r.randint(1, 99)),
    3: lambda d, r: r.choice([d + ".HTTP://DX.DOI.ORG/" + d, "HTTP://DX.DOI.ORG/" + d, "http://dx.d0i.org/" + d]),
    4: lambda d, r: r.choice([d + ".HTTPS://DOI.ORG/10.1/X", "HTTPS://DOI.ORG/" + d, "https://doi.0rg/" + d]),
    5: lambda d, r: d + f".....{r.randint(1, 99)},{r.randint(1, 99)}({r.randint(1990, 2020)})",
    6: lambda d, r: d + f"({r.randint(1990, 2020)})",
    7: lambda d, r: d + r.choice([">", " ", ")"]) + r.choice(["", "LAST"]) + f"ACCESSED{r.randint(1, 31)}",
    8: lambda d, r: d + r.choice(["/FULL", "/PDF", "/ABSTRACT", "/EPDF", "/SUMMARY"]) + r.choice(["", ">ACCESSED4"]),
    9: lambda d, r: d + f"#PAGE-{r.randint(1, 20)}",
    10: lambda d, r: d + f".PMID:{r.randint(10000, 99999999)}",
    11: lambda d, r: d + r.choice(["?CRAWLER=TRUE", "?SEQUENCE=1", "?ACCESS=OPEN&X=1"]),
    12: lambda d, r: d + r.choice(["ANJ", "JOURNALS", "PSS"]) + ".SAGEPUB.COM",
    13: lambda d, r: d + "[DOI]",
    14: lambda d, r: d + "/-/DCSUPPLEMENTAL",
    15: lambda d, r: d + "/SUPPINFO",
    16: lambda d, r: d + f".ARTICLEPUBLISHEDONLINEBEFOREMARCH{r.randint(1990, 2020)}",
    17: lambda d, r: d + r.choice(["(EPUBAHEADOFPRINT)", "(EPUBAHEADOFFPRINT)", "[EPUBAHEADOFPRINT]"]),
    18: lambda d, r: d + f",PMCID:PMC{r.randint(100000, 9999999)}",
    19: lambda d, r: d + r.choice(["<br>", "<br/>", "<p>"]),
    20: lambda d, r: d + r.choice(["\\", "\\\\"]),
    21: lambda d, r: d.replace("_", "__", 1),
    22: _double_dot,
    23: lambda d, r: _insert_in_suffix(d, "<xml_add>e</xml_add>", r),
}

# corruptions stacked in one string: the junk each rule removes is independent
COMBINATIONS = [
    (2, 19, lambda d, r: d + "<br>http://www.sciencedirect.com"),
    (1, 22, lambda d, r: _double_dot(d, r) + "."),
    (9, 20, lambda d, r: d + "\\#PAGE-2"),
]


def corrupt(base: str, rule_id: int, rng: random.Random) -> str:
    return CORRUPTIONS[rule_id](base, rng)


@dataclass
class SyntheticRow:
    citing: str
    cited: str
    expected: str  # already_valid | valid_after_cleaning | still_invalid | indeterminate
    rules: tuple[int, ...] = ()
    base: str | None = None


@dataclass
class SyntheticCorpus:
    rows: list[SyntheticRow]
    valid: set[str]
    unknown: set[str]
    cnki: set[str]

    def write_csv(self, path: str | Path, header: bool = True) -> None:
        import csv

        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if header:
                w.writerow(["citing", "cited"])
            w.writerows((r.citing, r.cited) for r in self.rows)

    def fixture_records(self) -> list[dict]:
        recs = []
        for doi in sorted(self.valid):
            rec = {"key": doi.casefold(), "kind": "handle", "status": "valid", "timestamp": 0}
            if doi in self.cnki:
                rec["url"] = f"https://kns.cnki.net/doi/{doi}"
            else:
                rec["url"] = f"https://example.org/landing/{doi}"
            recs.append(rec)
        for doi in sorted(self.unknown):
            recs.append({"key": doi.casefold(), "kind": "handle", "status": "unknown",
                         "reason": "recorded transport failure", "timestamp": 0})
        for kind, table, source in (
            ("crossref", CROSSREF_PUBLISHERS, "Crossref"),
            ("datacite", DATACITE_PUBLISHERS, "DataCite"),
            ("medra", MEDRA_PUBLISHERS, "mEDRA"),
        ):
            for prefix, name in sorted(table.items()):
                recs.append({"key": prefix, "kind": kind, "name": name, "source": source, "timestamp": 0})
        return recs

    def write_fixture(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.fixture_records():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def expected_counts(self) -> dict[str, int]:
        counts = {"already_valid": 0, "valid_after_cleaning": 0, "still_invalid": 0, "indeterminate": 0}
        for r in self.rows:
            counts[r.expected] += 1
        return counts


def _citing(rng: random.Random) -> str:
    return _journal_doi(rng.choice(CROSSREF_PREFIXES), rng)


def _maybe_upper(s: str, rng: random.Random) -> str:
    return s.upper() if rng.random() < 0.3 else s


def generate_corpus(n: int, seed: int = 0) -> SyntheticCorpus:
    """A mixed corpus of ``n`` citations covering every status and rule."""
    rng = random.Random(seed)
    rows: list[SyntheticRow] = []
    valid: set[str] = set()
    unknown: set[str] = set()
    cnki: set[str] = set()

    def registered(prefix=None, underscore=False):
        d = base_doi(prefix or rng.choice(CROSSREF_PREFIXES), rng, underscore)
        valid.add(d)
        return d

    for _ in range(n):
        citing = _citing(rng)
        roll = rng.random()
        if roll < 0.15:
            prefix = rng.choice(CROSSREF_PREFIXES + sorted(DATACITE_PUBLISHERS) + sorted(MEDRA_PUBLISHERS)
                                + [CNKI_PREFIX, UNREGISTERED_PREFIX])
            d = registered(prefix)
            if prefix == CNKI_PREFIX:
                cnki.add(d)
            rows.append(SyntheticRow(citing, _maybe_upper(d, rng), "already_valid", base=d))
        elif roll < 0.70:
            rule_id = rng.randint(1, 23)
            d = registered(underscore=rule_id == 21)
            rows.append(SyntheticRow(citing, _maybe_upper(corrupt(d, rule_id, rng), rng),
                                     "valid_after_cleaning", (rule_id,), d))
        elif roll < 0.75:
            a, b, make = rng.choice(COMBINATIONS)
            d = registered(underscore=False)
            rows.append(SyntheticRow(citing, make(d, rng), "valid_after_cleaning", tuple(sorted((a, b))), d))
        elif roll < 0.82:
            # well-formed but never registered (includes the test-account prefix)
            prefix = rng.choice([TEST_PREFIX, TEST_PREFIX, UNREGISTERED_PREFIX, rng.choice(CROSSREF_PREFIXES)])
            rows.append(SyntheticRow(citing, base_doi(prefix, rng), "still_invalid"))
        elif roll < 0.90:
            # cleanable junk around a DOI that is still not registered
            rule_id = rng.choice([1, 6, 9, 13])
            d = base_doi(rng.choice(CROSSREF_PREFIXES), rng)
            rows.append(SyntheticRow(citing, corrupt(d, rule_id, rng), "still_invalid", (rule_id,), d))
        elif roll < 0.95:
            # strings with no recoverable DOI
            junk = rng.choice(["n/a", "unknown", "10.1000", "doi", "ISBN 978-3-16-148410-0"])
            rows.append(SyntheticRow(citing, junk, "still_invalid"))
        else:
            d = base_doi(rng.choice(CROSSREF_PREFIXES), rng)
            unknown.add(d)
            rows.append(SyntheticRow(citing, d, "indeterminate", base=d))
    return SyntheticCorpus(rows, valid, unknown, cnki)


def generate_rule_corpus(per_rule: dict[int, int], seed: int = 0) -> SyntheticCorpus:
    """Exactly ``per_rule[id]`` fixable citations for each rule id."""
    rng = random.Random(seed)
    rows, valid = [], set()
    for rule_id, count in sorted(per_rule.items()):
        for _ in range(count):
            d = base_doi(rng.choice(CROSSREF_PREFIXES), rng, underscore=rule_id == 21)
            valid.add(d)
            rows.append(SyntheticRow(_citing(rng), corrupt(d, rule_id, rng), "valid_after_cleaning", (rule_id,), d))
    rng.shuffle(rows)
    return SyntheticCorpus(rows, valid, set(), set())
