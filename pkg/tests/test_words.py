import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from solitary.errors import EmptyAlphabet, PresentationSyntaxError, UnknownGenerator
from solitary.words import (
    Alphabet, Word, format_word, free_product, free_reduce, invert, lift_word, multiply,
    parse_presentation, parse_word, parse_words,
)

AB = Alphabet(("a", "b"))
letters = st.lists(st.integers(0, 3), max_size=12)


def test_parse_free_group():
    p = parse_presentation("<a,b|>")
    assert p.alphabet.names == ("a", "b")
    assert p.relators == ()
    assert p.is_free


def test_parse_relation_becomes_relator(BS12):
    (r,) = BS12.relators
    assert format_word(r) == format_word(BS12.word("t^-1*s*t*s^-2"))


def test_unknown_generator_in_relator():
    with pytest.raises(UnknownGenerator) as info:
        parse_presentation("<a| b>")
    assert info.value.generator == "b"


@pytest.mark.parametrize("text", ["<a,b", "a,b|>", "<a,b|a^>", "<a|a))>", "<a,a|>"])
def test_syntax_errors(text):
    with pytest.raises((PresentationSyntaxError, UnknownGenerator, ValueError)):
        parse_presentation(text)


def test_empty_alphabet():
    with pytest.raises(EmptyAlphabet):
        parse_presentation("<|>")


@pytest.mark.parametrize("text,expected", [("a*a^-1*b", "b"), ("1", "1"), ("a*a^-1", "1"), ("a*b*b^-1*a", "a^2")])
def test_free_reduction_examples(text, expected):
    assert parse_word(AB, text) == parse_word(AB, expected)


def test_products_and_inverses():
    a, b = parse_word(AB, "a"), parse_word(AB, "b")
    assert multiply(a, ~a).is_identity()
    assert invert(a * b) == ~b * ~a
    assert multiply(a * b, ~b * a) == a ** 2


def test_word_list():
    assert parse_words(AB, "") == []
    assert parse_words(AB, "a^2, b") == [parse_word(AB, "a^2"), parse_word(AB, "b")]


def test_power_of_bracket():
    assert parse_word(AB, "(a*b)^2") == parse_word(AB, "a*b*a*b")
    assert parse_word(AB, "(a*b)^-1") == parse_word(AB, "b^-1*a^-1")


def test_free_product_and_lift():
    p, q = parse_presentation("<a| a^2>"), parse_presentation("<t|>")
    pq = free_product(p, q)
    assert pq.alphabet.names == ("a", "t")
    assert len(pq.relators) == 1
    assert lift_word(q.word("t^3"), pq.alphabet) == pq.word("t^3")


@given(letters)
def test_reduction_matches_oracle(xs):
    w = Word(AB, xs)
    pairs = oracles.reduce_pairs([(x >> 1, -1 if x & 1 else 1) for x in xs])
    assert oracles.letters_of(w) == list(pairs)


@given(letters)
def test_reduction_idempotent(xs):
    once = free_reduce(xs)
    assert free_reduce(once) == once


@given(letters, letters, letters)
def test_group_laws(x, y, z):
    u, v, w = Word(AB, x), Word(AB, y), Word(AB, z)
    assert (u * v) * w == u * (v * w)
    assert (u * ~u).is_identity()
    assert ~(~u) == u


@given(letters)
def test_format_parse_round_trip(xs):
    w = Word(AB, xs)
    assert parse_word(AB, format_word(w)) == w
