"""Regenerate the bundled offline corpora and resolver fixtures.

    python3 scripts/make_fixtures.py [--out src/doifix/data/fixtures]
"""
import argparse
import json
from pathlib import Path

from doifix.synthetic import generate_corpus

SIZES = {"small": (50, 7), "medium": (1000, 11)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=Path(__file__).resolve().parents[1] / "src/doifix/data/fixtures", type=Path)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, (n, seed) in SIZES.items():
        corpus = generate_corpus(n, seed=seed)
        corpus.write_csv(args.out / f"{name}_corpus.csv")
        corpus.write_fixture(args.out / f"{name}_resolver.jsonl")
        expected = {"seed": seed, "size": n, "counts": corpus.expected_counts()}
        (args.out / f"{name}_expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n")
        print(name, expected["counts"])


if __name__ == "__main__":
    main()
