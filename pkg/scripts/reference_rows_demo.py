"""Clean every reference row and show which rules fired.

    python3 scripts/reference_rows_demo.py [--ruleset baseline]
"""
import argparse

from doifix.rules import clean_string, load_ruleset, reference_corpus


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ruleset", default="extended")
    args = ap.parse_args()
    rs = load_ruleset(args.ruleset)
    ok = 0
    for invalid, expected, rule_id in reference_corpus():
        trace = clean_string(rs, invalid)
        hit = trace.output == expected
        ok += hit
        print(f"{rule_id:>2} {'ok  ' if hit else 'MISS'} fired={list(trace.fired)!s:<8} {invalid} -> {trace.output}")
    print(f"{ok}/23 rows reproduced with {rs.name}")


if __name__ == "__main__":
    main()
