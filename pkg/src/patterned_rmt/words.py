"""Words over starred letters.

``"aAbB"`` reads as ``a a* b b*``: a lowercase character is a letter, its
uppercase form is the adjoint of the same letter.  Letters get ids in order of
first appearance, so ``"bBbB"`` and ``"aAaA"`` parse to the same word.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class Word:
    symbols: tuple  # ((letter_id, starred), ...)
    names: tuple = ()  # original lowercase character of each letter id

    def __post_init__(self):
        if not self.symbols:
            raise ValidationError("a word needs at least one symbol")
        ids = sorted({letter for letter, _ in self.symbols})
        if ids != list(range(len(ids))):
            raise ValidationError("letter ids must form a contiguous range from 0")

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other):
        if not isinstance(other, Word):
            return NotImplemented
        return self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    @property
    def letters(self) -> int:
        return 1 + max(letter for letter, _ in self.symbols)

    @property
    def half_length(self) -> int:
        return len(self.symbols) // 2

    def __str__(self):
        return render(self)


def parse_word(text: str) -> Word:
    if not text:
        raise ValidationError("empty word")
    ids = {}
    symbols = []
    for pos, ch in enumerate(text):
        if ch not in string.ascii_letters:
            raise ValidationError(f"invalid character {ch!r} at position {pos} in word {text!r}")
        name = ch.lower()
        letter = ids.setdefault(name, len(ids))
        symbols.append((letter, ch.isupper()))
    return Word(tuple(symbols), tuple(ids))


def render(w: Word) -> str:
    names = w.names or tuple(string.ascii_lowercase)
    return "".join(names[letter].upper() if starred else names[letter]
                   for letter, starred in w.symbols)


def star_balance(w: Word) -> dict:
    """``{letter_id: (unstarred count, starred count)}``."""
    counts = Counter(w.symbols)
    return {letter: (counts[letter, False], counts[letter, True])
            for letter in range(w.letters)}


def is_even_balanced(w: Word) -> bool:
    """Even length and every letter has as many adjoints as plain occurrences.

    The limiting moment of a word failing this test is exactly zero.
    """
    if len(w) % 2:
        return False
    return all(p == q for p, q in star_balance(w).values())
