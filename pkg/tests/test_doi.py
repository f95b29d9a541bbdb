import pytest
from hypothesis import given
from hypothesis import strategies as st

from doifix.doi import (
    Doi, DoiPrefix, EmptyInput, NoPrefix, doi_equals, extract_prefix, parse_doi, try_prefix,
)

dois = st.builds(
    lambda reg, suffix: f"10.{reg}/{suffix}",
    st.integers(1000, 99999),
    st.text(alphabet="abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._;()-<>", min_size=1, max_size=30),
)
padding = st.text(alphabet=" \t\n", max_size=3)


def test_parse_trims_and_keeps_raw():
    d = parse_doi("  10.1016/j.aca.2006.07.086\n")
    assert d.normalized == "10.1016/j.aca.2006.07.086"
    assert d.raw == "  10.1016/j.aca.2006.07.086\n"
    assert str(d) == d.normalized


@pytest.mark.parametrize("raw", ["", "   ", "\t\n"])
def test_parse_empty(raw):
    with pytest.raises(EmptyInput):
        parse_doi(raw)


def test_parse_keeps_trailing_punctuation():
    # cleaning is the rule engine's job, not the parser's
    assert parse_doi("10.1016/J.AMEPRE.2015.07.017.").normalized.endswith(".")


def test_case_insensitive_equality():
    a, b = parse_doi("10.1016/J.ACA.2006.07.086"), parse_doi("10.1016/j.aca.2006.07.086")
    assert a == b and hash(a) == hash(b) and doi_equals(a, b)
    assert a.normalized != b.normalized


@pytest.mark.parametrize("raw,prefix", [
    ("10.1016/j.aca.2006.07.086", "10.1016"),
    ("10.14778/3137628.3137651", "10.14778"),
    ("10.1007/978-3-319-04765-2__2", "10.1007"),
    ("10.1/x/y/z", "10.1"),
])
def test_extract_prefix(raw, prefix):
    assert extract_prefix(parse_doi(raw)) == DoiPrefix(prefix)


@pytest.mark.parametrize("raw", [
    "http://dx.doi.org/10.1016/j.aca.2006.07.086",  # prefix errors have no prefix until cleaned
    "10.1016",
    "doi:10.1016/x",
    "n/a",
])
def test_extract_prefix_rejects(raw):
    with pytest.raises(NoPrefix):
        extract_prefix(parse_doi(raw))
    assert try_prefix(parse_doi(raw)) is None


def test_try_prefix_none():
    assert try_prefix(None) is None


@pytest.mark.parametrize("bad", ["11.1000", "10.1000/x", "1000"])
def test_prefix_value_checked(bad):
    with pytest.raises(NoPrefix):
        DoiPrefix(bad)


def test_doi_rejects_untrimmed_normalized():
    with pytest.raises(EmptyInput):
        Doi(raw="x", normalized=" 10.1/x")


@given(dois, padding, padding)
def test_parse_round_trip(doi, left, right):
    d = parse_doi(left + doi + right)
    assert d.normalized == doi
    assert parse_doi(str(d)) == d
    assert parse_doi(d.normalized).normalized == d.normalized


@given(dois)
def test_prefix_is_leading_segment(doi):
    p = extract_prefix(parse_doi(doi))
    assert doi.startswith(p.value + "/")
    assert "/" not in p.value


@given(st.lists(dois, min_size=3, max_size=3), st.lists(st.booleans(), min_size=3, max_size=3))
def test_equality_is_equivalence(raw, upper):
    a, b, c = (parse_doi(s.upper() if u else s) for s, u in zip(raw, upper))
    assert a == a
    assert (a == b) == (b == a)
    if a == b and b == c:
        assert a == c
    if a == b:
        assert hash(a) == hash(b)


@given(dois)
def test_case_variants_equal(doi):
    assert parse_doi(doi.upper()) == parse_doi(doi.lower())
