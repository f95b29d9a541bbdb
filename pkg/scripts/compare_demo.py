"""Compare the extended and baseline rulesets on a synthetic corpus.

    python3 scripts/compare_demo.py [--size 2000] [--seed 0]
"""
import argparse

from doifix.doi import ValidityStatus
from doifix.pipeline import CitationRecord, compare_rulesets
from doifix.resolvers import FixtureResolver
from doifix.rules import load_ruleset
from doifix.synthetic import generate_corpus


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    corpus = generate_corpus(args.size, args.seed)
    resolver = FixtureResolver({d: ValidityStatus.VALID for d in corpus.valid}
                               | {d: ValidityStatus.UNKNOWN for d in corpus.unknown})
    records = [CitationRecord.from_strings(r.citing, r.cited) for r in corpus.rows]
    report = compare_rulesets(records, [load_ruleset("extended"), load_ruleset("baseline")], resolver, workers=4)
    print(f"{'ruleset':<10} {'already':>8} {'fixed':>6} {'prefix':>7} {'suffix':>7} {'other':>6} {'invalid':>8}")
    for name, c in report.counts.items():
        f = c.fixed_by_class
        print(f"{name:<10} {c.already_valid:>8} {c.valid_after_cleaning:>6} {f['prefix']:>7} {f['suffix']:>7} "
              f"{f['other']:>6} {c.still_invalid:>8}")
    print(f"{len(report.disagreements)} citations get different verdicts")


if __name__ == "__main__":
    main()
