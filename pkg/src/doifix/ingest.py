"""Reading citing/cited DOI pairs from CSV."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator, TextIO

from .doi import DoiError, extract_prefix, parse_doi
from .pipeline import CitationRecord


@dataclass(frozen=True)
class QuarantinedRow:
    line: int
    content: str
    reason: str


def _looks_like_header(row: list[str]) -> bool:
    return bool(row) and not row[0].strip().startswith("10.")


def read_citations_csv(stream: TextIO, quarantine: list[QuarantinedRow] | None = None) -> Iterator[CitationRecord]:
    """Yield a CitationRecord per data row of a two-column CSV.

    A first row whose first cell does not start with "10." is taken as a
    header. Rows with the wrong number of columns, an unusable citing DOI
    or an empty cited DOI are appended to ``quarantine`` with their line
    number. Cited values are kept verbatim, including trailing punctuation.
    """
    if quarantine is None:
        quarantine = []
    reader = csv.reader(stream)
    first = True
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if first:
            first = False
            if _looks_like_header(row):
                continue
        content = ",".join(row)
        if len(row) != 2:
            quarantine.append(QuarantinedRow(line, content, f"expected 2 columns, got {len(row)}"))
            continue
        citing, cited = row
        try:
            citing_doi = parse_doi(citing)
            extract_prefix(citing_doi)
        except DoiError as exc:
            quarantine.append(QuarantinedRow(line, content, f"bad citing DOI: {exc}"))
            continue
        if not cited.strip():
            quarantine.append(QuarantinedRow(line, content, "empty cited DOI"))
            continue
        yield CitationRecord(citing_doi, cited, line)
