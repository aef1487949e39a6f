from abc import ABC, abstractmethod
from typing import Callable, Mapping

import numpy as np

from grd.groupoid import Arrow, FiniteGroupoidView
from grd.linalg import operator_norm


Sigma = Callable[[Arrow, Arrow], complex]


class ConcreteBundle(ABC):
    """Fell bundle with matrix fibers over an enumerated groupoid.

    The fiber over an arrow is the space of complex matrices of shape
    ``rank(rng) x rank(src)``. Subclasses provide ``rank``, ``mult`` and
    ``invol``; ``regular_block`` and ``slot_dim`` describe the left regular
    representation used for reduced norms.
    """

    kind: str = 'abstract'

    def __init__(self, view: FiniteGroupoidView):
        if not isinstance(view, FiniteGroupoidView):
            raise TypeError(f'view must be a FiniteGroupoidView, got {type(view).__name__}')
        self.view = view

    def __repr__(self) -> str:
        return f'{type(self).__name__}({self.view.name!r})'

    @property
    def name(self) -> str:
        return f'{self.kind}[{self.view.name}]'

    @abstractmethod
    def rank(self, unit: str) -> int: ...

    def shape(self, arrow: Arrow) -> tuple[int, int]:
        return self.rank(arrow.rng), self.rank(arrow.src)

    def zero(self, arrow: Arrow) -> np.ndarray:
        return np.zeros(self.shape(arrow), dtype=complex)

    def element(self, arrow: Arrow, value) -> np.ndarray:
        """Validated fiber element over ``arrow``."""
        a = np.atleast_2d(np.asarray(value, dtype=complex))
        if a.shape != self.shape(arrow):
            raise ValueError(
                f'fiber element over {arrow.id} must have shape {self.shape(arrow)}, got {a.shape}'
            )
        return a

    def _composable(self, gamma: Arrow, eta: Arrow):
        if gamma.src != eta.rng:
            raise ValueError(f'{gamma.id} and {eta.id} are not composable')

    @abstractmethod
    def mult(self, gamma: Arrow, eta: Arrow, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Product of ``a`` in E_gamma and ``b`` in E_eta, an element of E_(gamma eta)."""

    @abstractmethod
    def invol(self, gamma: Arrow, a: np.ndarray) -> np.ndarray:
        """Adjoint of ``a`` in E_gamma, an element of E_(gamma^-1)."""

    def norm(self, gamma: Arrow, a: np.ndarray) -> float:
        return operator_norm(a)

    def regular_block(self, gamma: Arrow, eta: Arrow, zeta: Arrow, a: np.ndarray) -> np.ndarray:
        """Block of the regular representation of ``a`` in E_gamma from slot eta to zeta."""
        return a

    def slot_dim(self, eta: Arrow) -> int:
        return self.rank(eta.rng)

    def random_element(self, gamma: Arrow, rng: np.random.Generator) -> np.ndarray:
        shape = self.shape(gamma)
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    def restrict(self, view: FiniteGroupoidView) -> 'ConcreteBundle':
        """The same bundle over a subgroupoid view."""
        return RestrictedBundle(self, view)


class TrivialBundle(ConcreteBundle):
    """Trivial bundle with fibers ``M_{n(r), n(s)}`` and matrix operations."""

    kind = 'trivial'

    def __init__(self, view: FiniteGroupoidView, n: int | Mapping[str, int] = 1):
        super().__init__(view)
        if isinstance(n, Mapping):
            ranks = {u: int(n[u]) for u in view.units}
        else:
            ranks = {u: int(n) for u in view.units}
        for unit, r in ranks.items():
            if r <= 0:
                raise ValueError(f'rank at unit {unit} must be positive, got {r}')
        self._ranks = ranks
        self.dim = int(n) if not isinstance(n, Mapping) else None

    @property
    def name(self) -> str:
        return f'trivial({self.dim})[{self.view.name}]'

    def rank(self, unit: str) -> int:
        return self._ranks[unit]

    def mult(self, gamma, eta, a, b):
        self._composable(gamma, eta)
        return a @ b

    def invol(self, gamma, a):
        return a.conj().T


class TwistedLineBundle(ConcreteBundle):
    """Line bundle with multiplication twisted by a 2-cocycle ``sigma``.

    The involution is ``a* = conj(sigma(g, g^-1)) conj(a)``.
    """

    kind = 'twisted'

    def __init__(self, view: FiniteGroupoidView, sigma: Sigma):
        super().__init__(view)
        self.sigma = sigma

    def rank(self, unit: str) -> int:
        return 1

    def mult(self, gamma, eta, a, b):
        self._composable(gamma, eta)
        return self.sigma(gamma, eta) * (a @ b)

    def invol(self, gamma, a):
        inverse = self.view.inverse(gamma)
        return np.conj(self.sigma(gamma, inverse)) * a.conj().T

    def regular_block(self, gamma, eta, zeta, a):
        return self.sigma(gamma, eta) * a

    def slot_dim(self, eta):
        return 1


class ActionBundle(ConcreteBundle):
    """Bundle ``A x G`` with ``A = M_n`` and ``(a, g)(b, h) = (a alpha_g(b), gh)``.

    ``alpha_g(b) = u_g b u_g^*`` for the unitary ``u_g`` attached to each arrow
    id (identity when absent).
    """

    kind = 'action'

    def __init__(self, view: FiniteGroupoidView, n: int, unitaries: Mapping[str, np.ndarray]):
        super().__init__(view)
        if not isinstance(n, int) or n <= 0:
            raise ValueError(f'n must be a positive integer, got {n!r}')
        self.dim = n
        self._unitaries: dict[str, np.ndarray] = {}
        for arrow_id, u in unitaries.items():
            u = np.asarray(u, dtype=complex)
            if u.shape != (n, n):
                raise ValueError(f'unitary for {arrow_id} must be {n}x{n}, got {u.shape}')
            if not np.allclose(u.conj().T @ u, np.eye(n), atol=1e-12):
                raise ValueError(f'matrix for {arrow_id} is not unitary')
            self._unitaries[arrow_id] = u

    @property
    def name(self) -> str:
        return f'action({self.dim})[{self.view.name}]'

    def unitary(self, gamma: Arrow) -> np.ndarray:
        return self._unitaries.get(gamma.id, np.eye(self.dim, dtype=complex))

    def alpha(self, gamma: Arrow, b: np.ndarray) -> np.ndarray:
        u = self.unitary(gamma)
        return u @ b @ u.conj().T

    def rank(self, unit: str) -> int:
        return self.dim

    def mult(self, gamma, eta, a, b):
        self._composable(gamma, eta)
        return a @ self.alpha(gamma, b)

    def invol(self, gamma, a):
        return self.alpha(self.view.inverse(gamma), a.conj().T)

    def regular_block(self, gamma, eta, zeta, a):
        return self.alpha(self.view.inverse(zeta), a)

    def slot_dim(self, eta):
        return self.dim


class RestrictedBundle(ConcreteBundle):
    """A bundle seen over a subgroupoid of its view."""

    def __init__(self, parent: ConcreteBundle, view: FiniteGroupoidView):
        super().__init__(view)
        missing = [a.id for a in view.arrows if a not in parent.view]
        if missing:
            raise ValueError(f'{missing[0]} is not an arrow of {parent.view.name!r}')
        self.parent = parent
        self.kind = parent.kind

    @property
    def name(self) -> str:
        return f'{self.parent.name}|{self.view.name}'

    def rank(self, unit):
        return self.parent.rank(unit)

    def mult(self, gamma, eta, a, b):
        return self.parent.mult(gamma, eta, a, b)

    def invol(self, gamma, a):
        return self.parent.invol(gamma, a)

    def norm(self, gamma, a):
        return self.parent.norm(gamma, a)

    def regular_block(self, gamma, eta, zeta, a):
        return self.parent.regular_block(gamma, eta, zeta, a)

    def slot_dim(self, eta):
        return self.parent.slot_dim(eta)

    def random_element(self, gamma, rng):
        return self.parent.random_element(gamma, rng)
