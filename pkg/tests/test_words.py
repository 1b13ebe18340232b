import pytest
from hypothesis import given, strategies as st

from patterned_rmt.errors import ValidationError
from patterned_rmt.words import is_even_balanced, parse_word, render, star_balance


def test_single_letter_alternating():
    w = parse_word("aAaA")
    assert w.symbols == ((0, False), (0, True), (0, False), (0, True))
    assert w.letters == 1


def test_two_letters():
    assert parse_word("aAb").symbols == ((0, False), (0, True), (1, False))


def test_letters_numbered_by_first_appearance():
    w = parse_word("xYz")
    assert w.symbols == ((0, False), (1, True), (2, False))
    assert parse_word("bBbB") == parse_word("aAaA")


@pytest.mark.parametrize("text", ["", "aA1", "a A", "aä"])
def test_rejects_bad_words(text):
    with pytest.raises(ValidationError):
        parse_word(text)


@pytest.mark.parametrize("text, expected", [
    ("aAaA", {0: (2, 2)}),
    ("aAa", {0: (2, 1)}),
    ("aabBAA", {0: (2, 2), 1: (1, 1)}),
])
def test_star_balance(text, expected):
    assert star_balance(parse_word(text)) == expected


@pytest.mark.parametrize("text, expected", [
    ("aA", True), ("aAa", False), ("aaAA", True), ("aabB", False), ("aBbA", True),
])
def test_even_balanced(text, expected):
    assert is_even_balanced(parse_word(text)) is expected


words = st.text(alphabet="abcABC", min_size=1, max_size=12)


@given(words)
def test_render_round_trip(text):
    w = parse_word(text)
    assert parse_word(render(w)) == w
    assert render(w) == text


@given(words)
def test_balanced_implies_even(text):
    w = parse_word(text)
    if is_even_balanced(w):
        assert len(w) % 2 == 0
