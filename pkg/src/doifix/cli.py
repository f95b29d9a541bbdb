"""doifix command line.

Exit codes: 0 success, 1 invalid DOI (validate), 2 input error,
3 configuration error, 4 output I/O error, 5 undetermined validity (validate).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .attribution import FALLBACK_CRITERION, attribute
from .config import ConfigError, RunConfig, load_config
from .doi import DoiError, ValidityStatus, parse_doi
from .ingest import QuarantinedRow, read_citations_csv
from .pipeline import CitationRecord, ParseError, Summary, compare_rulesets, process_citation, process_corpus
from .report import (
    COMPARISON_FILE,
    COMPARISON_HEADER,
    SAMPLE_FILE,
    FallbackCollector,
    PublisherMatrix,
    RuleHistogram,
    SampleCollector,
    comparison_rows,
    write_audit_sample,
    write_csv,
    write_reports,
)
from .resolvers import LookupDeferred
from .rules import RuleFileError, RuleSet, clean_string, load_ruleset

logger = logging.getLogger("doifix")

EXIT_OK, EXIT_INVALID, EXIT_INPUT, EXIT_CONFIG, EXIT_IO, EXIT_UNKNOWN = 0, 1, 2, 3, 4, 5

COUNTING_NOTE = "every input row is processed and counted; repeated identical pairs are not merged"
MATRIX_NOTE = {
    False: "became-valid counts only citations whose cited DOI resolved before cleaning",
    True: "became-valid counts citations valid before or after cleaning",
}


class InputError(Exception):
    pass


def _stdout(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")


def _compare_sets(cfg: RunConfig) -> list[RuleSet]:
    sets = []
    for name in cfg.compare or []:
        if name == "extended":
            sets.append(load_ruleset(cfg.ruleset))
        elif name == "baseline":
            sets.append(load_ruleset(cfg.baseline_ruleset))
        else:
            sets.append(load_ruleset(name))
    return sets


def _read_records(path: str, quarantine: list[QuarantinedRow]):
    try:
        fh = open(path, encoding="utf-8-sig", newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc

    def gen():
        with fh:
            try:
                yield from read_citations_csv(fh, quarantine)
            except (UnicodeDecodeError, OSError) as exc:
                raise InputError(f"cannot read {path}: {exc}") from exc

    return gen()


def execute_run(cfg: RunConfig, input_path: str, out: str | Path, *, files: str = "all") -> dict:
    """Ingest, process, attribute and write reports. Returns the run summary."""
    try:
        ruleset = load_ruleset(cfg.ruleset)
        compare_sets = _compare_sets(cfg)
    except RuleFileError as exc:
        raise ConfigError(f"rule file: {exc}") from exc
    resolver = cfg.build_resolver()
    out = Path(out)

    if files == "comparison":
        records = list(_read_records(input_path, []))
        comparison = compare_rulesets(records, compare_sets, resolver, workers=cfg.workers)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / COMPARISON_FILE, COMPARISON_HEADER, comparison_rows(comparison))
        return {"out": str(out), "corpus_size": comparison.corpus_size,
                "comparison": _comparison_summary(comparison)}

    quarantine: list[QuarantinedRow] = []
    records = _read_records(input_path, quarantine)
    summary = Summary()
    matrix = PublisherMatrix(post_cleaning=cfg.post_cleaning)
    histogram = RuleHistogram({r: 0 for r in ruleset.ids})
    samples = SampleCollector()
    fallback = FallbackCollector()
    deferred = 0
    for n, result in enumerate(process_corpus(ruleset, resolver, records, workers=cfg.workers, summary=summary), 1):
        histogram.add(result)
        samples.add(result)
        try:
            attribution = attribute(result, resolver)
        except LookupDeferred as exc:
            logger.warning("attribution deferred for line %s: %s", result.record.line, exc)
            deferred += 1
            continue
        matrix.add(result, attribution)
        fallback.add(attribution)
        if n % 10000 == 0:
            logger.info("%d citations processed", n)

    comparison = None
    if len(compare_sets) >= 2:
        records = list(_read_records(input_path, []))
        comparison = compare_rulesets(records, compare_sets, resolver, workers=cfg.workers)

    sample = samples.draw(cfg.per_rule, cfg.seed, ruleset.ids)
    counts = summary.as_dict()
    counts["quarantined"] = len(quarantine) + len(summary.quarantined)
    counts["attribution_deferred"] = deferred
    counts["excluded_from_matrix"] = matrix.excluded
    counts["attributed"] = matrix.total
    meta = {
        "tool": f"doifix {__version__}",
        "input": str(input_path),
        "ruleset": {"name": ruleset.name, "sha256": ruleset.digest},
        "compared_rulesets": [{"name": rs.name, "sha256": rs.digest} for rs in compare_sets],
        "resolver_mode": cfg.resolver_mode,
        "config": {
            "seed": cfg.seed, "per_rule": cfg.per_rule, "top_n": cfg.top_n,
            "post_cleaning": cfg.post_cleaning, "workers": cfg.workers, "rate": cfg.rate,
        },
        "summary": counts,
        "audit_sample_size": sample.size,
        "quarantine": [{"line": q.line, "content": q.content, "reason": q.reason} for q in quarantine]
        + [{"line": line, "content": raw, "reason": reason} for line, raw, reason in summary.quarantined],
        "notes": {
            "counting": COUNTING_NOTE,
            "matrix": MATRIX_NOTE[cfg.post_cleaning],
            "fallback": FALLBACK_CRITERION + "; fallback names appear only in fallback_publishers.csv",
        },
    }
    if any(rs.name == "baseline" for rs in compare_sets):
        meta["notes"]["baseline"] = "the baseline ruleset approximates the earlier method; it is not an exact reproduction"

    if files == "sample":
        out.mkdir(parents=True, exist_ok=True)
        write_audit_sample(out / SAMPLE_FILE, sample)
    else:
        write_reports(out, matrix=matrix, histogram=histogram, sample=sample, fallback=fallback,
                      meta=meta, top_n=cfg.top_n, comparison=comparison)
    result = {"summary": counts, "audit_sample_size": sample.size, "out": str(out)}
    if comparison is not None:
        result["comparison"] = _comparison_summary(comparison)
    return result


def _comparison_summary(comparison) -> dict:
    d = {
        name: {"already_valid": c.already_valid, "valid_after_cleaning": c.valid_after_cleaning,
               "fixed_by_class": c.fixed_by_class, "still_invalid": c.still_invalid}
        for name, c in comparison.counts.items()
    }
    d["disagreements"] = len(comparison.disagreements)
    return d


def cmd_clean(args) -> int:
    try:
        ruleset = load_ruleset(args.ruleset or "extended")
    except RuleFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    inputs = args.doi or [line.rstrip("\r\n") for line in sys.stdin]
    for s in inputs:
        if not s.strip():
            continue
        trace = clean_string(ruleset, s.strip())
        _stdout({"input": s, "output": trace.output, "fired": list(trace.fired), "changed": trace.changed})
    return EXIT_OK


def cmd_validate(args, cfg: RunConfig) -> int:
    try:
        doi = parse_doi(args.doi)
    except DoiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    outcome = cfg.build_resolver().resolve(doi)
    _stdout({"doi": doi.normalized, "status": outcome.status.value, "agency": outcome.agency,
             "url": outcome.url, "reason": outcome.reason})
    return {ValidityStatus.VALID: EXIT_OK, ValidityStatus.INVALID: EXIT_INVALID}.get(outcome.status, EXIT_UNKNOWN)


def cmd_attribute(args, cfg: RunConfig) -> int:
    try:
        record = CitationRecord.from_strings(args.citing, args.cited)
        ruleset = load_ruleset(cfg.ruleset)
    except DoiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuleFileError as exc:
        print(f"error: rule file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    resolver = cfg.build_resolver()
    try:
        result = process_citation(ruleset, resolver, record)
        attribution = attribute(result, resolver)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LookupDeferred as exc:
        print(f"error: lookup deferred: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN

    def pub(p):
        return {"prefix": p.prefix.value if p.prefix else None, "name": p.name, "source": p.source.value}

    _stdout({
        "status": result.status.value,
        "cleaned": result.cleaned.normalized if result.cleaned else None,
        "fired": list(result.fired_rules),
        "citing_publisher": pub(attribution.citing_publisher),
        "cited_publisher": pub(attribution.main_cited_publisher),
        "fallback_publisher": pub(attribution.cited_publisher) if attribution.fallback_used else None,
    })
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="config file (default: $DOI_TOOL_CONFIG)")
    g.add_argument("--ruleset", help="rule file path or bundled name (default: extended)")
    g.add_argument("--baseline-ruleset", help="rule file used for 'baseline' in --compare")
    g.add_argument("--fixture", help="offline resolver fixture file (JSONL)")
    g.add_argument("--fixture-default", choices=["invalid", "unknown"],
                   help="verdict for DOIs missing from the fixture")
    g.add_argument("--cache", help="persistent lookup cache file (live mode)")
    g.add_argument("--rate", type=float, help="max requests per second per endpoint")
    g.add_argument("--workers", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--top-n", type=int)
    g.add_argument("--per-rule", type=int, help="audit sample size per rule")
    g.add_argument("--post-cleaning", action="store_const", const=True,
                   help="count cleaned-valid citations as valid in the publisher matrix")
    g.add_argument("--out")
    g.add_argument("--compare", help="comma-separated ruleset names to compare")
    g.add_argument("--mailto", help="contact address sent with API requests")
    for api in ("doi", "crossref", "datacite", "medra"):
        g.add_argument(f"--{api}-api-base")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doifix", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version", version=f"doifix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", help="apply the cleaning rules (no network)")
    p.add_argument("doi", nargs="*", help="DOI strings; read from stdin when absent")
    p.add_argument("--ruleset")

    p = sub.add_parser("validate", help="resolve one DOI")
    p.add_argument("doi")
    _add_common(p)

    p = sub.add_parser("run", help="full pipeline and reports for a citations CSV")
    p.add_argument("input")
    _add_common(p)

    p = sub.add_parser("compare", help="compare rulesets on a citations CSV")
    p.add_argument("input")
    _add_common(p)

    p = sub.add_parser("sample", help="draw the per-rule audit sample for a citations CSV")
    p.add_argument("input")
    _add_common(p)

    p = sub.add_parser("attribute", help="process and attribute one citing/cited pair")
    p.add_argument("citing")
    p.add_argument("cited")
    _add_common(p)
    return parser


_NON_CONFIG = {"command", "verbose", "config", "input", "doi", "citing", "cited"}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "clean":
        return cmd_clean(args)

    flags = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}
    if args.command == "compare" and not flags.get("compare"):
        flags["compare"] = "extended,baseline"
    try:
        cfg = load_config(flags, config_file=args.config)
        if args.command == "validate":
            return cmd_validate(args, cfg)
        if args.command == "attribute":
            return cmd_attribute(args, cfg)
        files = {"run": "all", "compare": "comparison", "sample": "sample"}[args.command]
        if files == "comparison" and len(cfg.compare or []) < 2:
            raise ConfigError("compare needs at least two rulesets")
        if not Path(args.input).is_file():
            raise InputError(f"input file not found: {args.input}")
        summary = execute_run(cfg, args.input, cfg.out, files=files)
    except ConfigError as exc:
        print(f"error: configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        out = Path(cfg.out)
        present = sorted(p.name for p in out.glob("*")) if out.is_dir() else []
        manifest = {"status": "aborted", "error": str(exc), "files_present": present}
        print(json.dumps(manifest, sort_keys=True), file=sys.stderr)
        return EXIT_IO
    _stdout(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
