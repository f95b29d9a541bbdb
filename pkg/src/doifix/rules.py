"""Data-driven DOI cleaning rules.

A rule file is a YAML document listing rules with an id, an error class
(prefix, suffix or other), a case-insensitive regular expression, an action
and embedded example pairs. Every rule is self-tested against its examples
when the file is loaded, so a broken rule never reaches a corpus run.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import jsonschema
import yaml


class ErrorClass(enum.Enum):
    PREFIX = "prefix"
    SUFFIX = "suffix"
    OTHER = "other"


GROUP_ORDER = (ErrorClass.PREFIX, ErrorClass.SUFFIX, ErrorClass.OTHER)


class Action(enum.Enum):
    KEEP_CAPTURED = "keep_captured"
    SUBSTITUTE = "substitute"


class Origin(enum.Enum):
    NEW = "new"
    MODIFIED = "modified"
    INHERITED = "inherited"


class RuleFileError(Exception):
    pass


class SchemaError(RuleFileError):
    pass


class SelfTestFailure(RuleFileError):
    def __init__(self, rule_id: int, invalid: str, expected: str, got: str):
        self.rule_id = rule_id
        self.invalid = invalid
        self.expected = expected
        self.got = got
        super().__init__(
            f"rule {rule_id}: {invalid!r} cleaned to {got!r}, expected {expected!r}"
        )


RULE_FILE_SCHEMA = {
    "type": "object",
    "required": ["name", "rules"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "rules": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "class", "pattern", "action", "origin", "examples"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer", "minimum": 1, "maximum": 23},
                    "class": {"enum": [c.value for c in ErrorClass]},
                    "pattern": {"type": "string", "minLength": 1},
                    "action": {"enum": [a.value for a in Action]},
                    "replacement": {"type": "string"},
                    "origin": {"enum": [o.value for o in Origin]},
                    "examples": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["invalid", "expected"],
                            "additionalProperties": False,
                            "properties": {
                                "invalid": {"type": "string", "minLength": 1},
                                "expected": {"type": "string"},
                            },
                        },
                    },
                },
            },
        },
    },
}


@dataclass(frozen=True)
class Rule:
    id: int
    error_class: ErrorClass
    pattern: str
    action: Action
    origin: Origin
    examples: tuple[tuple[str, str], ...]
    replacement: str = ""
    regex: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "regex", re.compile(self.pattern, re.IGNORECASE))


@dataclass(frozen=True)
class RuleSet:
    name: str
    rules: tuple[Rule, ...]
    digest: str = ""
    group_order: tuple[ErrorClass, ...] = GROUP_ORDER

    def __post_init__(self):
        ids = [r.id for r in self.rules]
        if len(ids) != len(set(ids)):
            raise SchemaError(f"ruleset {self.name!r} has duplicate rule ids")
        if self.group_order != GROUP_ORDER:
            raise SchemaError("group order is fixed: prefix, suffix, other")

    def group(self, error_class: ErrorClass) -> list[Rule]:
        return sorted((r for r in self.rules if r.error_class is error_class), key=lambda r: r.id)

    def get(self, rule_id: int) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    @property
    def ids(self) -> list[int]:
        return sorted(r.id for r in self.rules)


@dataclass(frozen=True)
class CleaningTrace:
    input: str
    output: str
    fired: tuple[int, ...] = ()

    @property
    def changed(self) -> bool:
        return self.input != self.output


def apply_rule(rule: Rule, s: str) -> tuple[bool, str]:
    """Apply one rule to ``s``.

    Returns ``(matched, out)``. A match that would leave the string
    unchanged, or reduce it to nothing, counts as no match.
    """
    if rule.action is Action.SUBSTITUTE:
        out = rule.regex.sub(rule.replacement, s)
    else:
        m = rule.regex.match(s)
        if m is None:
            return False, s
        captured = [g for g in m.groups() if g]
        if not captured:
            return False, s
        # max() keeps the first of equally long candidates
        out = max(captured, key=len)
    if not out or out == s:
        return False, s
    return True, out


def clean_string(ruleset: RuleSet, s: str) -> CleaningTrace:
    current = s
    fired = []
    for error_class in ruleset.group_order:
        for rule in ruleset.group(error_class):
            matched, current = apply_rule(rule, current)
            if matched:
                fired.append(rule.id)
    return CleaningTrace(input=s, output=current, fired=tuple(fired))


def _rule_from_dict(d: dict) -> Rule:
    try:
        return Rule(
            id=d["id"],
            error_class=ErrorClass(d["class"]),
            pattern=d["pattern"],
            action=Action(d["action"]),
            origin=Origin(d["origin"]),
            replacement=d.get("replacement", ""),
            examples=tuple((e["invalid"], e["expected"]) for e in d["examples"]),
        )
    except re.error as exc:
        raise SchemaError(f"rule {d['id']}: bad pattern: {exc}") from exc


def self_test(rule: Rule) -> None:
    for invalid, expected in rule.examples:
        _, got = apply_rule(rule, invalid)
        if got != expected:
            raise SelfTestFailure(rule.id, invalid, expected, got)


def parse_ruleset(text: str) -> RuleSet:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"not a YAML document: {exc}") from exc
    try:
        jsonschema.validate(doc, RULE_FILE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"{where or 'document'}: {exc.message}") from exc
    for d in doc["rules"]:
        if d["action"] == Action.SUBSTITUTE.value and "replacement" not in d:
            raise SchemaError(f"rule {d['id']}: substitute rules need a replacement")
    rules = tuple(_rule_from_dict(d) for d in doc["rules"])
    for rule in rules:
        self_test(rule)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return RuleSet(name=doc["name"], rules=rules, digest=digest)


BUNDLED = ("extended", "baseline")


def load_ruleset(source: str | Path) -> RuleSet:
    """Load a rule file by path, or a bundled ruleset by name."""
    if isinstance(source, str) and source in BUNDLED:
        text = resources.files("doifix.data").joinpath(f"{source}.yaml").read_text("utf-8")
    else:
        try:
            text = Path(source).read_text("utf-8")
        except OSError as exc:
            raise RuleFileError(f"cannot read rule file {source}: {exc}") from exc
    return parse_ruleset(text)


def reference_corpus() -> list[tuple[str, str, int]]:
    """The 23 reference (invalid, expected, rule id) triples."""
    text = resources.files("doifix.data").joinpath("reference_corpus.csv").read_text("utf-8")
    rows = csv.DictReader(text.splitlines())
    return [(r["invalid"], r["expected"], int(r["rule_id"])) for r in rows]


def fired_classes(ruleset: RuleSet, fired: Iterable[int]) -> list[ErrorClass]:
    return [ruleset.get(i).error_class for i in fired]
