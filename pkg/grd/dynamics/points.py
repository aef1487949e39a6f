from dataclasses import dataclass
from typing import Sequence


def _primitive(period: tuple[int, ...]) -> tuple[int, ...]:
    n = len(period)
    for q in range(1, n + 1):
        if n % q == 0 and period[:q] * (n // q) == period:
            return period[:q]
    return period


def _least_rotation(period: tuple[int, ...]) -> int:
    return min(range(len(period)), key=lambda r: period[r:] + period[:r])


@dataclass(frozen=True, init=False)
class EvPeriodicPoint:
    """Exact eventually periodic sequence ``pre + period + period + ...``.

    The stored form is canonical: the period is primitive and is its own
    lexicographically least rotation, and the preperiod is the shortest one
    that goes with that period. Two points are equal iff they represent the
    same sequence.

    Examples
    --------
    >>> EvPeriodicPoint((1, 0), (0,)) == EvPeriodicPoint((1,), (0, 0))
    True
    >>> EvPeriodicPoint((), (1, 0)).encode()
    '1(01)'
    """

    pre: tuple[int, ...]
    period: tuple[int, ...]

    def __init__(self, pre: Sequence[int], period: Sequence[int]):
        pre = tuple(int(s) for s in pre)
        period = tuple(int(s) for s in period)
        if not period:
            raise ValueError('period must be nonempty')
        period = _primitive(period)
        while pre and pre[-1] == period[-1]:
            pre = pre[:-1]
            period = (period[-1],) + period[:-1]
        r = _least_rotation(period)
        pre, period = pre + period[:r], period[r:] + period[:r]
        object.__setattr__(self, 'pre', pre)
        object.__setattr__(self, 'period', period)

    @classmethod
    def constant(cls, symbol: int) -> 'EvPeriodicPoint':
        return cls((), (symbol,))

    def __str__(self) -> str:
        return self.encode()

    def encode(self) -> str:
        symbols = self.pre + self.period
        sep = '' if all(0 <= s < 10 for s in symbols) else '.'
        return f'{sep.join(map(str, self.pre))}({sep.join(map(str, self.period))})'

    def symbol(self, index: int) -> int:
        if index < len(self.pre):
            return self.pre[index]
        return self.period[(index - len(self.pre)) % len(self.period)]

    def prefix(self, n: int) -> tuple[int, ...]:
        return tuple(self.symbol(i) for i in range(n))

    def starts_with(self, symbols: Sequence[int]) -> bool:
        return all(self.symbol(i) == s for i, s in enumerate(symbols))

    def shift(self, n: int = 1) -> 'EvPeriodicPoint':
        """The point ``T^n(x)`` of the one-sided shift."""
        if n < 0:
            raise ValueError(f'n must be nonnegative, got {n}')
        if n <= len(self.pre):
            return EvPeriodicPoint(self.pre[n:], self.period)
        k = (n - len(self.pre)) % len(self.period)
        return EvPeriodicPoint((), self.period[k:] + self.period[:k])

    def prepend(self, symbols: Sequence[int]) -> 'EvPeriodicPoint':
        return EvPeriodicPoint(tuple(symbols) + self.pre, self.period)
