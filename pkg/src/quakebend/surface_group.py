"""Fundamental group of a closed orientable surface and word arithmetic.

Generators are indexed ``0 .. 2g-1`` in the order a1, b1, ..., ag, bg. A letter is a pair
``(index, exponent)`` with exponent +1 or -1, and text uses ``a1 b1 A1 B1`` with uppercase
for inverses.
"""

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Tuple

from quakebend.errors import WordError

Letter = Tuple[int, int]

_TOKEN = re.compile(r"([abAB])(\d+)")


def letter_symbol(letter: Letter) -> str:
    index, exponent = letter
    name = "a" if index % 2 == 0 else "b"
    if exponent < 0:
        name = name.upper()
    return f"{name}{index // 2 + 1}"


def _inverse_letter(letter: Letter) -> Letter:
    return (letter[0], -letter[1])


@dataclass(frozen=True)
class Word:
    """A freely reduced word in the standard generators."""

    letters: Tuple[Letter, ...] = ()

    def __post_init__(self) -> None:
        for (index, exponent) in self.letters:
            if index < 0 or exponent not in (1, -1):
                raise WordError(f"Invalid letter ({index}, {exponent})")
        for left, right in zip(self.letters, self.letters[1:]):
            if right == _inverse_letter(left):
                raise WordError(f"Word is not freely reduced: {self.letters}")

    @classmethod
    def reduce(cls, letters) -> "Word":
        """Freely reduce an arbitrary letter sequence."""
        stack: list[Letter] = []
        for letter in letters:
            if stack and stack[-1] == _inverse_letter(letter):
                stack.pop()
            else:
                stack.append(letter)
        return cls(tuple(stack))

    @classmethod
    def generator(cls, index: int, exponent: int = 1) -> "Word":
        return cls(((index, exponent),))

    @classmethod
    def parse(cls, text: str, genus: int | None = None) -> "Word":
        return parse_word(text, genus)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __str__(self) -> str:
        return format_word(self)

    def max_index(self) -> int:
        return max((index for index, _ in self.letters), default=-1)

    def shortlex_key(self) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
        # a1 < A1 < b1 < B1 < a2 ...
        return len(self.letters), tuple((index, -exponent) for index, exponent in self.letters)


EMPTY = Word()


def parse_word(text: str, genus: int | None = None) -> Word:
    """
    Parses the text syntax for words.

    Args:
        text (str): Tokens such as ``"a1 b1 A1 B1"``; whitespace between tokens is optional.
        genus (int | None): When given, generator indices above ``genus`` are rejected.

    Returns:
        Word: The freely reduced word.
    """
    compact = "".join(text.split())
    letters: list[Letter] = []
    position = 0
    while position < len(compact):
        match = _TOKEN.match(compact, position)
        if match is None:
            raise WordError(f"Unknown symbol in word '{text}' at '{compact[position:]}'")
        name, number = match.group(1), int(match.group(2))
        if number < 1 or (genus is not None and number > genus):
            raise WordError(f"Generator '{match.group(0)}' out of range for genus {genus}")
        index = 2 * (number - 1) + (0 if name.lower() == "a" else 1)
        letters.append((index, 1 if name.islower() else -1))
        position = match.end()
    return Word.reduce(letters)


def format_word(word: Word) -> str:
    return " ".join(letter_symbol(letter) for letter in word.letters)


def concat(u: Word, v: Word) -> Word:
    return Word.reduce(u.letters + v.letters)


def invert(u: Word) -> Word:
    return Word(tuple(_inverse_letter(letter) for letter in reversed(u.letters)))


def power(u: Word, k: int) -> Word:
    base = u if k >= 0 else invert(u)
    result = EMPTY
    for _ in range(abs(k)):
        result = concat(result, base)
    return result


def commutator(u: Word, v: Word) -> Word:
    return concat(concat(u, v), concat(invert(u), invert(v)))


def cyclic_reduce(u: Word) -> Tuple[Word, Word]:
    """
    Splits a word as ``conjugator * core * conjugator^-1`` with ``core`` cyclically reduced.

    Returns:
        Tuple[Word, Word]: ``(core, conjugator)``.
    """
    if not u:
        raise WordError("Cannot cyclically reduce the trivial word")
    letters = u.letters
    start, end = 0, len(letters)
    while end - start > 1 and letters[end - 1] == _inverse_letter(letters[start]):
        start += 1
        end -= 1
    return Word(letters[start:end]), Word(letters[:start])


def is_cyclically_reduced(u: Word) -> bool:
    return len(u) <= 1 or u.letters[-1] != _inverse_letter(u.letters[0])


@dataclass(frozen=True)
class SurfacePresentation:
    """Standard one-relator presentation of a closed orientable genus ``g`` surface group."""

    genus: int

    def __post_init__(self) -> None:
        if self.genus < 2:
            raise WordError(f"Genus must be at least 2, got {self.genus}")

    @property
    def rank(self) -> int:
        return 2 * self.genus

    @property
    def generators(self) -> Tuple[str, ...]:
        return tuple(letter_symbol((index, 1)) for index in range(self.rank))

    @property
    def generator_words(self) -> Tuple[Word, ...]:
        return tuple(Word.generator(index) for index in range(self.rank))

    @property
    def letters(self) -> Tuple[Letter, ...]:
        """All generators and their inverses, in shortlex order."""
        return tuple((index, exponent) for index in range(self.rank) for exponent in (1, -1))

    @cached_property
    def relator(self) -> Word:
        result = EMPTY
        for i in range(self.genus):
            a, b = Word.generator(2 * i), Word.generator(2 * i + 1)
            result = Word(result.letters + commutator(a, b).letters)
        return result

    def parse(self, text: str) -> Word:
        return parse_word(text, self.genus)

    def check(self, word: Word) -> Word:
        if word.max_index() >= self.rank:
            raise WordError(f"Word '{word}' uses generators beyond genus {self.genus}")
        return word
