import itertools
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Hashable, Mapping

import networkx as nx

from grd.dynamics.points import EvPeriodicPoint


class LocalSystem(ABC):
    """Local homeomorphism T with exact forward map and finite preimage sets."""

    name: str

    @abstractmethod
    def apply(self, x) -> Hashable: ...

    @abstractmethod
    def preimages(self, x) -> tuple: ...

    @abstractmethod
    def sample_points(self, count: int) -> list: ...

    def encode(self, x) -> str:
        return x.encode() if isinstance(x, EvPeriodicPoint) else str(x)

    def exact_radius(self, x) -> int | None:
        """Largest radius up to which enumerations at x are exact (None: always)."""
        return None

    def iterate(self, x, n: int):
        for _ in range(n):
            x = self.apply(x)
        return x


class FullShift(LocalSystem):
    """One-sided full shift on ``{0..d-1}^N``; every point has d preimages."""

    def __init__(self, d: int):
        if not isinstance(d, int) or d < 1:
            raise ValueError(f'arity must be a positive integer, got {d!r}')
        self.d = d
        self.name = f'full-shift({d})'

    def apply(self, x: EvPeriodicPoint) -> EvPeriodicPoint:
        return x.shift(1)

    def preimages(self, x: EvPeriodicPoint) -> tuple[EvPeriodicPoint, ...]:
        return tuple(x.prepend((s,)) for s in range(self.d))

    def base_point(self) -> EvPeriodicPoint:
        return EvPeriodicPoint.constant(0)

    def prefix_points(self, depth: int) -> list[EvPeriodicPoint]:
        """The ``d**depth`` points ``w 0^inf`` with ``|w| = depth``."""
        if depth < 0:
            raise ValueError(f'depth must be nonnegative, got {depth}')
        base = self.base_point()
        return [base.prepend(w) for w in itertools.product(range(self.d), repeat=depth)]

    def sample_points(self, count: int) -> list[EvPeriodicPoint]:
        points: list[EvPeriodicPoint] = []
        seen: set[EvPeriodicPoint] = set()
        base = self.base_point()
        depth = 0
        while len(points) < count:
            for w in itertools.product(range(self.d), repeat=depth):
                point = base.prepend(w)
                if point not in seen:
                    seen.add(point)
                    points.append(point)
                    if len(points) == count:
                        break
            depth += 1
        return points


class FiniteMap(LocalSystem):
    """Map on a finite state set given by a table ``state -> T(state)``.

    Parameters
    ----------
    table : Mapping[str, str]
        The map T. Every image must be a state.
    name : str
        Descriptor used in reports.
    exact_radius : Mapping[str, int], optional
        Per state, the radius up to which enumerations are exact when the
        table truncates an infinite family of states.
    """

    def __init__(
        self,
        table: Mapping[str, str],
        name: str = 'finite-map',
        exact_radius: Mapping[str, int] | None = None,
    ):
        for state, image in table.items():
            if image not in table:
                raise ValueError(f'image {image!r} of state {state!r} is not a state')
        self.table = dict(table)
        self.name = name
        self._exact = dict(exact_radius or {})
        inverse: dict[str, list[str]] = {s: [] for s in self.table}
        for state in sorted(self.table):
            inverse[self.table[state]].append(state)
        self._inverse = {s: tuple(v) for s, v in inverse.items()}

    def apply(self, x: str) -> str:
        try:
            return self.table[x]
        except KeyError:
            raise ValueError(f'unknown state {x!r} in {self.name}')

    def preimages(self, x: str) -> tuple[str, ...]:
        return self._inverse[x]

    def sample_points(self, count: int) -> list[str]:
        return sorted(self.table)[:count]

    def exact_radius(self, x: str) -> int | None:
        return self._exact.get(x)


def af_system(truncation: int = 16) -> FiniteMap:
    """T(a) = a, T(b_0) = a, T(b_n) = b_{n-1}, truncated at b_K.

    ``b_K`` has no preimage in the model, so ``|T^-N(a)| = N + 1`` holds
    exactly for ``N <= K + 1``.
    """
    if not isinstance(truncation, int) or truncation < 0:
        raise ValueError(f'truncation must be a nonnegative integer, got {truncation!r}')
    table = {'a': 'a', 'b0': 'a'}
    for n in range(1, truncation + 1):
        table[f'b{n}'] = f'b{n - 1}'
    exact = {'a': truncation + 1, **{f'b{n}': truncation - n for n in range(truncation + 1)}}
    return FiniteMap(table, name=f'af(K={truncation})', exact_radius=exact)


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    label: str


class GraphPaths(LocalSystem):
    """Shift on the infinite path space of a finite graph without sinks.

    The graph is held as a ``networkx.MultiDiGraph`` whose edge keys are edge
    indices. Points are eventually periodic sequences of edge indices
    ``e_0 e_1 ...`` with ``dst(e_k) = src(e_{k+1})``.
    """

    def __init__(self, vertices: list[str], edges: list[Edge], name: str = 'graph'):
        if len(set(vertices)) != len(vertices):
            raise ValueError('graph vertices must be unique')
        known = set(vertices)
        for edge in edges:
            for end in (edge.src, edge.dst):
                if end not in known:
                    raise ValueError(f'edge {edge.label!r} references unknown vertex {end!r}')
        labels = [e.label for e in edges]
        if len(set(labels)) != len(labels):
            raise ValueError('graph edge labels must be unique')

        self.name = name
        self.vertices = sorted(vertices)
        self.edges = sorted(edges, key=lambda e: (e.src, e.dst, e.label))
        self.graph = nx.MultiDiGraph(name=name)
        self.graph.add_nodes_from(self.vertices)
        for index, edge in enumerate(self.edges):
            self.graph.add_edge(edge.src, edge.dst, key=index, label=edge.label)
        sinks = sorted(v for v, degree in self.graph.out_degree() if degree == 0)
        if sinks:
            raise ValueError(f'graph has a sink at vertex {sinks[0]!r}')

    def out_edges(self, vertex: str) -> list[int]:
        return sorted(key for _, _, key in self.graph.out_edges(vertex, keys=True))

    def in_edges(self, vertex: str) -> list[int]:
        return sorted(key for _, _, key in self.graph.in_edges(vertex, keys=True))

    def apply(self, x: EvPeriodicPoint) -> EvPeriodicPoint:
        return x.shift(1)

    def preimages(self, x: EvPeriodicPoint) -> tuple[EvPeriodicPoint, ...]:
        start = self.edges[x.symbol(0)].src
        return tuple(x.prepend((e,)) for e in self.in_edges(start))

    def is_path(self, x: EvPeriodicPoint) -> bool:
        span = len(x.pre) + len(x.period) + 1
        seq = x.prefix(span)
        return all(self.edges[a].dst == self.edges[b].src for a, b in zip(seq, seq[1:]))

    def cycles_without_exit(self) -> bool:
        """True iff no cycle of the graph has an exit (bounded fiber growth)."""
        for component in nx.strongly_connected_components(self.graph):
            sub = self.graph.subgraph(component)
            if sub.number_of_edges() == 0:
                continue
            if any(self.graph.out_degree(v) > sub.out_degree(v) for v in component):
                return False
            if any(sub.out_degree(v) > 1 for v in component):
                return False
        return True

    def greedy_point(self, first_edge: int) -> EvPeriodicPoint:
        """Path starting with ``first_edge`` that always takes the smallest outgoing edge."""
        path = [first_edge]
        seen = {self.edges[first_edge].dst: 0}
        while True:
            vertex = self.edges[path[-1]].dst
            path.append(self.out_edges(vertex)[0])
            nxt = self.edges[path[-1]].dst
            if nxt in seen:
                start = seen[nxt] + 1
                return EvPeriodicPoint(path[:start], path[start:])
            seen[nxt] = len(path) - 1

    def sample_points(self, count: int) -> list[EvPeriodicPoint]:
        points: list[EvPeriodicPoint] = []
        for index in range(len(self.edges)):
            point = self.greedy_point(index)
            if point not in points:
                points.append(point)
            if len(points) == count:
                break
        return points


def graph_from_dict(data: Mapping[str, Any], name: str = 'graph') -> GraphPaths:
    """Graph from ``{"vertices": [ids], "edges": [{"src", "dst", "label"}]}``."""
    if not isinstance(data, Mapping):
        raise ValueError('graph input must be a JSON object')
    try:
        raw_vertices, raw_edges = data['vertices'], data['edges']
    except KeyError as exc:
        raise ValueError(f'graph input misses the key {exc.args[0]!r}')
    for key, value in (('vertices', raw_vertices), ('edges', raw_edges)):
        if not isinstance(value, list):
            raise ValueError(f'graph {key} must be a JSON array, got {type(value).__name__}')
    vertices = [str(v) for v in raw_vertices]
    edges = []
    for index, raw in enumerate(raw_edges):
        if not isinstance(raw, Mapping) or 'src' not in raw or 'dst' not in raw:
            raise ValueError(f'edge #{index} must be an object with src and dst')
        edges.append(Edge(str(raw['src']), str(raw['dst']), str(raw.get('label', f'e{index}'))))
    return GraphPaths(vertices, edges, name=name)


def load_graph(path: str | Path) -> GraphPaths:
    path = Path(path)
    with path.open(encoding='utf-8') as fh:
        data = json.load(fh)
    return graph_from_dict(data, name=f'graph({path.stem})')


def single_loop() -> GraphPaths:
    return graph_from_dict({'vertices': ['v'], 'edges': [{'src': 'v', 'dst': 'v', 'label': 'e'}]})


def bouquet(d: int) -> GraphPaths:
    """One vertex with d loops; its path space is the full d-shift."""
    edges = [{'src': 'v', 'dst': 'v', 'label': f'e{i}'} for i in range(d)]
    return graph_from_dict({'vertices': ['v'], 'edges': edges}, name=f'bouquet({d})')
