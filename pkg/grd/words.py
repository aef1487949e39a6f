"""Reduced words in the free group F_d.

Letters are pairs ``(i, s)`` with generator index ``i`` in ``1..d`` and sign
``s`` in ``{+1, -1}``. The text encoding is ``'a1 A2'`` (lowercase for the
generator, uppercase for its inverse) and ``'e'`` for the empty word.
"""

import functools
from dataclasses import dataclass
from typing import Any, Callable, Iterator

Letter = tuple[int, int]


def _reduce(letters: list[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for letter in letters:
        if stack and stack[-1][0] == letter[0] and stack[-1][1] == -letter[1]:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


@dataclass(frozen=True, order=True)
class Word:
    """Reduced word of F_d.

    Parameters
    ----------
    rank : int
        The rank d of the free group.
    letters : tuple[tuple[int, int], ...]
        Signed generator indices, already reduced.

    Examples
    --------
    >>> Word.parse('a1 a2', 2) * Word.parse('A2 a1', 2)
    Word('a1 a1', rank=2)
    """

    rank: int
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank <= 0:
            raise ValueError(f'rank must be a positive integer, got {self.rank!r}')
        for i, s in self.letters:
            if not 1 <= i <= self.rank:
                raise ValueError(f'generator index {i} outside 1..{self.rank}')
            if s not in (1, -1):
                raise ValueError(f'letter sign must be +1 or -1, got {s!r}')
        if _reduce(list(self.letters)) != tuple(self.letters):
            raise ValueError(f'word {self.letters} is not reduced')

    @classmethod
    def from_letters(cls, letters, rank: int) -> 'Word':
        """Reduces an arbitrary letter sequence."""
        return cls(rank, _reduce([(int(i), int(s)) for i, s in letters]))

    @classmethod
    def parse(cls, text: str, rank: int) -> 'Word':
        text = text.strip()
        if text in ('', 'e'):
            return cls(rank)
        letters = []
        for token in text.split():
            if len(token) < 2 or token[0] not in 'aA' or not token[1:].isdigit():
                raise ValueError(f'malformed letter {token!r} in word {text!r}')
            letters.append((int(token[1:]), 1 if token[0] == 'a' else -1))
        return cls.from_letters(letters, rank)

    def __str__(self) -> str:
        if not self.letters:
            return 'e'
        return ' '.join(f'{"a" if s == 1 else "A"}{i}' for i, s in self.letters)

    def __repr__(self) -> str:
        return f'Word({str(self)!r}, rank={self.rank})'

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def length(self) -> int:
        return len(self.letters)

    def inverse(self) -> 'Word':
        return Word(self.rank, tuple((i, -s) for i, s in reversed(self.letters)))

    def __mul__(self, other: 'Word') -> 'Word':
        return multiply(self, other)

    @property
    def is_positive(self) -> bool:
        return all(s == 1 for _, s in self.letters)


def _same_rank(func: Callable[..., Any]):
    @functools.wraps(func)
    def wrapper(a: Word, b: Word, *args, **kwargs):
        if not isinstance(a, Word) or not isinstance(b, Word):
            raise TypeError('both operands must be Word instances')
        if a.rank != b.rank:
            raise ValueError(f'rank mismatch: {a.rank} != {b.rank}')
        return func(a, b, *args, **kwargs)

    return wrapper


@_same_rank
def multiply(a: Word, b: Word) -> Word:
    """Reduced concatenation ``a * b``."""
    # both factors are reduced, so cancellation only happens at the junction
    left = list(a.letters)
    right = list(b.letters)
    while left and right and left[-1][0] == right[0][0] and left[-1][1] == -right[0][1]:
        left.pop()
        right.pop(0)
    return Word(a.rank, tuple(left + right))


def identity(rank: int) -> Word:
    return Word(rank)


def generator(i: int, rank: int, sign: int = 1) -> Word:
    return Word(rank, ((i, sign),))


def phi_hom(w: Word, sign: int = 1) -> int:
    """Exponent homomorphism with ``phi_s(a_i) = s``.

    ``phi_hom(w, -1)`` is the convention in which every generator maps to -1.

    Examples
    --------
    >>> phi_hom(Word.parse('a1', 2), -1)
    -1
    """
    if sign not in (1, -1):
        raise ValueError(f'sign must be +1 or -1, got {sign!r}')
    return sign * sum(s for _, s in w.letters)


def uv_normal_form(w: Word) -> tuple[Word, Word] | None:
    """Split ``w = u v^-1`` with u, v positive, or None when impossible."""
    signs = [s for _, s in w.letters]
    cut = 0
    while cut < len(signs) and signs[cut] == 1:
        cut += 1
    if any(s == 1 for s in signs[cut:]):
        return None
    u = Word(w.rank, w.letters[:cut])
    v = Word(w.rank, w.letters[cut:]).inverse()
    return u, v


def has_forbidden_subword(w: Word) -> bool:
    """True when w contains a subword ``a_j^-1 a_i``."""
    return any(
        first[1] == -1 and second[1] == 1 for first, second in zip(w.letters, w.letters[1:])
    )


def sphere(rank: int, radius: int) -> Iterator[Word]:
    """Reduced words of length exactly ``radius``, in lexicographic letter order."""
    if radius < 0:
        raise ValueError(f'radius must be nonnegative, got {radius}')
    letters = [(i, s) for i in range(1, rank + 1) for s in (1, -1)]

    def _extend(prefix: tuple[Letter, ...]) -> Iterator[tuple[Letter, ...]]:
        if len(prefix) == radius:
            yield prefix
            return
        for letter in letters:
            if prefix and prefix[-1][0] == letter[0] and prefix[-1][1] == -letter[1]:
                continue
            yield from _extend(prefix + (letter,))

    for letters_ in _extend(()):
        yield Word(rank, letters_)


def ball(rank: int, radius: int) -> list[Word]:
    """All reduced words with ``length <= radius``, ordered by length then letters."""
    words: list[Word] = []
    for r in range(radius + 1):
        words.extend(sphere(rank, r))
    return words


def ball_size(rank: int, radius: int) -> int:
    if rank == 1:
        return 2 * radius + 1
    return 1 + 2 * rank * ((2 * rank - 1) ** radius - 1) // (2 * rank - 2)


__all__ = [
    'Word',
    'ball',
    'ball_size',
    'generator',
    'has_forbidden_subword',
    'identity',
    'multiply',
    'phi_hom',
    'sphere',
    'uv_normal_form',
]
