import itertools
from abc import ABC, abstractmethod
from typing import Hashable

from grd import words


class GroupModel(ABC):
    """Exact group arithmetic with a word length.

    Finite groups enumerate all elements; infinite ones (``finite = False``)
    need a radius to enumerate a ball.
    """

    name: str
    finite: bool = True

    @property
    @abstractmethod
    def identity(self) -> Hashable: ...

    @abstractmethod
    def multiply(self, a, b) -> Hashable: ...

    @abstractmethod
    def invert(self, a) -> Hashable: ...

    @abstractmethod
    def length(self, a) -> int: ...

    @abstractmethod
    def elements(self, radius: int | None = None) -> list: ...

    def encode(self, a) -> str:
        return str(a)


class CyclicGroup(GroupModel):
    """Z/n with ``l(k) = min(k, n - k)``."""

    def __init__(self, n: int):
        if not isinstance(n, int) or n <= 0:
            raise ValueError(f'n must be a positive integer, got {n!r}')
        self.n = n
        self.name = f'Z/{n}'
        self._width = len(str(n - 1))

    @property
    def identity(self) -> int:
        return 0

    def multiply(self, a: int, b: int) -> int:
        return (a + b) % self.n

    def invert(self, a: int) -> int:
        return (-a) % self.n

    def length(self, a: int) -> int:
        return min(a, self.n - a)

    def elements(self, radius: int | None = None) -> list[int]:
        return [k for k in range(self.n) if radius is None or self.length(k) <= radius]

    def encode(self, a: int) -> str:
        return f'{a:0{self._width}d}'


class IntegerGroup(GroupModel):
    """Z with ``l(k) = |k|``; enumerated as the ball ``-R..R``."""

    name = 'Z'
    finite = False

    @property
    def identity(self) -> int:
        return 0

    def multiply(self, a: int, b: int) -> int:
        return a + b

    def invert(self, a: int) -> int:
        return -a

    def length(self, a: int) -> int:
        return abs(a)

    def elements(self, radius: int | None = None) -> list[int]:
        if radius is None:
            raise ValueError('Z is infinite: a radius is required')
        return list(range(-radius, radius + 1))

    def encode(self, a: int) -> str:
        # fixed width so ids sort deterministically
        return f'{a:+06d}'


class SymmetricGroup(GroupModel):
    """S_n on tuples, with the transposition word length ``n - #cycles``."""

    def __init__(self, n: int):
        if not isinstance(n, int) or n <= 0:
            raise ValueError(f'n must be a positive integer, got {n!r}')
        self.n = n
        self.name = f'S{n}'

    @property
    def identity(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    def multiply(self, a, b) -> tuple[int, ...]:
        # (a b)(i) = a(b(i))
        return tuple(a[b[i]] for i in range(self.n))

    def invert(self, a) -> tuple[int, ...]:
        inv = [0] * self.n
        for i, ai in enumerate(a):
            inv[ai] = i
        return tuple(inv)

    def length(self, a) -> int:
        seen = [False] * self.n
        cycles = 0
        for i in range(self.n):
            if not seen[i]:
                cycles += 1
                j = i
                while not seen[j]:
                    seen[j] = True
                    j = a[j]
        return self.n - cycles

    def elements(self, radius: int | None = None) -> list[tuple[int, ...]]:
        perms = [tuple(p) for p in itertools.permutations(range(self.n))]
        return [p for p in perms if radius is None or self.length(p) <= radius]

    def encode(self, a) -> str:
        return ''.join(str(i) for i in a) if self.n <= 10 else '.'.join(str(i) for i in a)


class FreeGroup(GroupModel):
    """F_d with word length; elements are ``grd.words.Word``."""

    finite = False

    def __init__(self, rank: int):
        if not isinstance(rank, int) or rank <= 0:
            raise ValueError(f'rank must be a positive integer, got {rank!r}')
        self.rank = rank
        self.name = f'F{rank}'

    @property
    def identity(self) -> words.Word:
        return words.identity(self.rank)

    def multiply(self, a: words.Word, b: words.Word) -> words.Word:
        return words.multiply(a, b)

    def invert(self, a: words.Word) -> words.Word:
        return a.inverse()

    def length(self, a: words.Word) -> int:
        return a.length

    def elements(self, radius: int | None = None) -> list[words.Word]:
        if radius is None:
            raise ValueError(f'{self.name} is infinite: a radius is required')
        return words.ball(self.rank, radius)

    def encode(self, a: words.Word) -> str:
        return str(a)
