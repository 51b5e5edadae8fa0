"""
Labeling data model for the complete bidirected graph.

A labeling assigns a function [d] -> [d] to every ordered pair of distinct
vertices. Vertices and values are 0-based in memory; the text formats in
core.formats shift them to the 1-based form used on disk.

Walk semantics: walking edge by edge pushes the value forward, so a path
u1 -> u2 -> ... -> uk maps x to f_{k-1}(...f_1(x)).
"""

import logging
from dataclasses import dataclass
from typing import Callable, FrozenSet, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from core.errors import LabelingError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
VertexValue = Tuple[int, int]


@dataclass(frozen=True)
class FunctionLabel:
    """A total function [d] -> [d], stored as its table (table[x] = f(x))."""

    table: Tuple[int, ...]

    def __post_init__(self):
        table = tuple(int(y) for y in self.table)
        object.__setattr__(self, "table", table)
        d = len(table)
        if d == 0:
            raise LabelingError("a label needs at least one value")
        for x, y in enumerate(table):
            if not 0 <= y < d:
                raise LabelingError(f"label entry f({x + 1}) = {y + 1} lies outside [1, {d}]")

    @classmethod
    def identity(cls, d: int) -> "FunctionLabel":
        return cls(tuple(range(d)))

    @classmethod
    def shift(cls, d: int, k: int) -> "FunctionLabel":
        """The cyclic shift x -> x + k (mod d)."""
        return cls(tuple((x + k) % d for x in range(d)))

    @property
    def d(self) -> int:
        return len(self.table)

    def __call__(self, x: int) -> int:
        return self.table[x]

    @property
    def is_permutation(self) -> bool:
        return len(set(self.table)) == self.d

    @property
    def is_identity(self) -> bool:
        return self.table == tuple(range(self.d))

    def fixed_points(self) -> List[int]:
        return [x for x, y in enumerate(self.table) if x == y]

    def then(self, other: "FunctionLabel") -> "FunctionLabel":
        """Apply self first, then other."""
        if other.d != self.d:
            raise LabelingError(f"cannot compose labels on [{self.d}] and [{other.d}]")
        return FunctionLabel(tuple(other.table[y] for y in self.table))

    def inverse(self) -> "FunctionLabel":
        if not self.is_permutation:
            raise LabelingError("only permutation labels have inverses")
        inv = [0] * self.d
        for x, y in enumerate(self.table):
            inv[y] = x
        return FunctionLabel(tuple(inv))


class Labeling:
    """
    A d-labeling of the complete bidirected graph on n vertices.

    Tables live in a read-only (n, n, d) integer array. The diagonal holds the
    identity and is never read as an edge. Instances are immutable; every
    transformation returns a new labeling.
    """

    __slots__ = ("_tables",)

    def __init__(self, tables):
        """
        Build a labeling from an (n, n, d) table array.

        Args:
            tables: Array-like with tables[u, v, x] = label of u -> v applied to x

        Raises:
            LabelingError: If the shape is wrong or an off-diagonal entry lies outside [d]
        """
        arr = np.array(tables, dtype=np.int64)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1]:
            raise LabelingError(f"label tables must have shape (n, n, d), got {arr.shape}")
        n, _, d = arr.shape
        if n < 1 or d < 1:
            raise LabelingError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
        entries = arr[~np.eye(n, dtype=bool)]
        if entries.size and (entries.min() < 0 or entries.max() >= d):
            raise LabelingError(f"label entries must lie in [1, {d}]")
        arr[np.arange(n), np.arange(n)] = np.arange(d)
        arr.setflags(write=False)
        self._tables = arr

    @classmethod
    def from_labels(cls, n: int, d: int, labels: Mapping[Edge, Sequence[int]]) -> "Labeling":
        """
        Build a labeling from one table per ordered pair.

        Args:
            n: Vertex count
            d: Value-domain size
            labels: Map (u, v) -> table of length d, exactly one entry per ordered pair u != v

        Returns:
            The labeling
        """
        if n < 1 or d < 1:
            raise LabelingError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
        tables = np.zeros((n, n, d), dtype=np.int64)
        seen = set()
        for (u, v), table in labels.items():
            if not (0 <= u < n and 0 <= v < n):
                raise LabelingError(f"edge ({u + 1}, {v + 1}) has an unknown vertex")
            if u == v:
                raise LabelingError(f"self-loop at vertex {u + 1}")
            if len(table) != d:
                raise LabelingError(f"edge ({u + 1}, {v + 1}) has {len(table)} entries, expected {d}")
            tables[u, v] = table
            seen.add((u, v))
        if len(seen) != n * (n - 1):
            raise LabelingError(f"expected {n * (n - 1)} labeled edges, got {len(seen)}")
        return cls(tables)

    @classmethod
    def from_function(cls, n: int, d: int, rule: Callable[[int, int], Sequence[int]]) -> "Labeling":
        return cls.from_labels(n, d, {(u, v): rule(u, v) for u in range(n) for v in range(n) if u != v})

    @classmethod
    def identity(cls, n: int, d: int) -> "Labeling":
        return cls(np.broadcast_to(np.arange(d), (n, n, d)))

    @property
    def n(self) -> int:
        return self._tables.shape[0]

    @property
    def d(self) -> int:
        return self._tables.shape[2]

    @property
    def tables(self) -> np.ndarray:
        return self._tables

    def check_vertex(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise LabelingError(f"unknown vertex {v + 1} (n = {self.n})")
        return v

    def check_value(self, x: int) -> int:
        if not 0 <= x < self.d:
            raise LabelingError(f"value {x + 1} lies outside [1, {self.d}]")
        return x

    def label(self, u: int, v: int) -> FunctionLabel:
        self.check_vertex(u)
        self.check_vertex(v)
        if u == v:
            raise LabelingError(f"no self-loop at vertex {u + 1}")
        return FunctionLabel(tuple(self._tables[u, v].tolist()))

    def edges(self) -> Iterator[Edge]:
        """Ordered pairs in lexicographic order."""
        for u in range(self.n):
            for v in range(self.n):
                if u != v:
                    yield u, v

    def non_permutation_edges(self) -> List[Edge]:
        return [(u, v) for u, v in self.edges() if len(np.unique(self._tables[u, v])) != self.d]

    def is_permutation_labeling(self) -> bool:
        if self.n < 2:
            return True
        ordered = np.sort(self._tables, axis=2)
        return bool((ordered == np.arange(self.d)).all())

    def writable_copy(self) -> np.ndarray:
        return np.array(self._tables)

    def with_labels(self, updates: Mapping[Edge, Sequence[int]]) -> "Labeling":
        tables = self.writable_copy()
        for (u, v), table in updates.items():
            self.check_vertex(u)
            self.check_vertex(v)
            if u == v:
                raise LabelingError(f"no self-loop at vertex {u + 1}")
            tables[u, v] = table
        return Labeling(tables)

    def induced(self, vertices: Sequence[int]) -> "Labeling":
        """The sub-labeling on the given vertices, renumbered in the given order."""
        order = [self.check_vertex(v) for v in vertices]
        if len(set(order)) != len(order):
            raise LabelingError("induced sub-labeling needs distinct vertices")
        if not order:
            raise LabelingError("induced sub-labeling needs at least one vertex")
        return Labeling(self._tables[np.ix_(order, order)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Labeling):
            return NotImplemented
        return self._tables.shape == other._tables.shape and bool(np.array_equal(self._tables, other._tables))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Labeling(n={self.n}, d={self.d})"


@dataclass(frozen=True)
class ValuedWalk:
    """A sequence of (vertex, value) pairs where each edge maps the value forward."""

    steps: Tuple[VertexValue, ...]

    def __post_init__(self):
        steps = tuple((int(v), int(x)) for v, x in self.steps)
        if not steps:
            raise LabelingError("a valued walk needs at least one step")
        object.__setattr__(self, "steps", steps)

    @property
    def vertices(self) -> Tuple[int, ...]:
        return tuple(v for v, _ in self.steps)

    @property
    def values(self) -> Tuple[int, ...]:
        return tuple(x for _, x in self.steps)

    @property
    def start(self) -> VertexValue:
        return self.steps[0]

    @property
    def end(self) -> VertexValue:
        return self.steps[-1]

    @property
    def is_path(self) -> bool:
        return len(set(self.vertices)) == len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def first_mismatch(self, l: Labeling) -> Optional[int]:
        """Index i of the first step (i -> i+1) the labeling does not support, or None."""
        for i in range(len(self.steps) - 1):
            (u, x), (v, y) = self.steps[i], self.steps[i + 1]
            if not (0 <= u < l.n and 0 <= v < l.n and u != v and 0 <= x < l.d):
                return i
            if int(l.tables[u, v, x]) != y:
                return i
        return None

    def is_consistent_with(self, l: Labeling) -> bool:
        return self.first_mismatch(l) is None


@dataclass(frozen=True)
class CycleCertificate:
    """
    Witness of a fixed-point cycle: vertices v1..vk and the value at each
    vertex, closing back on the start (trace has k + 1 entries).
    """

    vertices: Tuple[int, ...]
    fixed_value: int
    trace: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        object.__setattr__(self, "trace", tuple(int(x) for x in self.trace))
        object.__setattr__(self, "fixed_value", int(self.fixed_value))

    @property
    def length(self) -> int:
        return len(self.vertices)


class CertificateCheck(NamedTuple):
    """Outcome of verify_certificate; truthy iff the certificate holds."""

    ok: bool
    reason: str = ""
    step: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def _check_simple(l: Labeling, vertices: Sequence[int]) -> None:
    for v in vertices:
        l.check_vertex(v)
    if len(set(vertices)) != len(vertices):
        raise LabelingError(f"path {[v + 1 for v in vertices]} repeats a vertex")


def _normalize_cycle(l: Labeling, cycle: Sequence[int]) -> Tuple[int, ...]:
    cycle = tuple(int(v) for v in cycle)
    if len(cycle) >= 2 and cycle[0] == cycle[-1]:
        cycle = cycle[:-1]
    if len(set(cycle)) < 2:
        raise LabelingError(f"degenerate cycle {[v + 1 for v in cycle]}: need at least 2 distinct vertices")
    _check_simple(l, cycle)
    return cycle


def _composite(l: Labeling, vertices: Sequence[int]) -> np.ndarray:
    composite = np.arange(l.d)
    for u, v in zip(vertices, vertices[1:]):
        composite = l.tables[u, v][composite]
    return composite


def compose_path(l: Labeling, path: Sequence[int]) -> FunctionLabel:
    """
    Compose the labels along a path (or a closed cycle).

    Args:
        l: The labeling
        path: Vertex sequence; vertices pairwise distinct except that the last may equal the first

    Returns:
        The composite label; a single-vertex path gives the identity
    """
    path = tuple(int(v) for v in path)
    if not path:
        raise LabelingError("empty path")
    if len(path) >= 3 and path[0] == path[-1]:
        _check_simple(l, path[:-1])
        l.check_vertex(path[-1])
    else:
        _check_simple(l, path)
    return FunctionLabel(tuple(_composite(l, path).tolist()))


def evaluate_walk(l: Labeling, path: Sequence[int], start: int) -> ValuedWalk:
    """Push `start` along the vertex sequence, recording the value at every step."""
    l.check_value(start)
    x = start
    steps = []
    previous = None
    for v in path:
        l.check_vertex(v)
        if previous is not None:
            if previous == v:
                raise LabelingError(f"no self-loop at vertex {v + 1}")
            x = int(l.tables[previous, v, x])
        steps.append((v, x))
        previous = v
    return ValuedWalk(tuple(steps))


def is_fixed_point_cycle(l: Labeling, cycle: Sequence[int]) -> Optional[int]:
    """
    Smallest fixed value of the cycle's composite, or None.

    Args:
        l: The labeling
        cycle: Vertices v1..vk, optionally followed by v1 again

    Returns:
        Smallest x with composite(x) = x, or None when the cycle is not a fixed-point cycle
    """
    cycle = _normalize_cycle(l, cycle)
    composite = _composite(l, cycle + (cycle[0],))
    fixed = np.flatnonzero(composite == np.arange(l.d))
    return int(fixed[0]) if fixed.size else None


def certify(l: Labeling, cycle: Sequence[int]) -> Optional[CycleCertificate]:
    """Certificate for a vertex cycle using its smallest fixed value, or None."""
    cycle = _normalize_cycle(l, cycle)
    fixed_value = is_fixed_point_cycle(l, cycle)
    if fixed_value is None:
        return None
    walk = evaluate_walk(l, cycle + (cycle[0],), fixed_value)
    return CycleCertificate(cycle, fixed_value, walk.values)


def verify_certificate(l: Labeling, c: CycleCertificate) -> CertificateCheck:
    """
    Check a certificate against a labeling.

    Returns:
        CertificateCheck, truthy iff the vertices are distinct, every trace step
        matches the labeling and the trace closes on the fixed value
    """
    k = len(c.vertices)
    if k < 2:
        return CertificateCheck(False, f"cycle has {k} vertices, need at least 2")
    for v in c.vertices:
        if not 0 <= v < l.n:
            return CertificateCheck(False, f"unknown vertex {v + 1} (n = {l.n})")
    if len(set(c.vertices)) != k:
        return CertificateCheck(False, "cycle repeats a vertex")
    if len(c.trace) != k + 1:
        return CertificateCheck(False, f"trace has {len(c.trace)} values, expected {k + 1}")
    for x in c.trace:
        if not 0 <= x < l.d:
            return CertificateCheck(False, f"trace value {x + 1} lies outside [1, {l.d}]")
    if c.trace[0] != c.fixed_value or c.trace[k] != c.fixed_value:
        return CertificateCheck(False, "trace does not start and end on the fixed value")
    for i in range(k):
        u, v = c.vertices[i], c.vertices[(i + 1) % k]
        expected = int(l.tables[u, v, c.trace[i]])
        if expected != c.trace[i + 1]:
            return CertificateCheck(
                False,
                f"step {i}: edge {u + 1} -> {v + 1} maps {c.trace[i] + 1} to {expected + 1}, "
                f"trace says {c.trace[i + 1] + 1}",
                i,
            )
    return CertificateCheck(True)


def imageset(l: Labeling, v: int) -> FrozenSet[int]:
    """Values that some edge into v can produce."""
    l.check_vertex(v)
    if l.n < 2:
        raise LabelingError("imageset needs at least 2 vertices")
    others = [u for u in range(l.n) if u != v]
    return frozenset(np.unique(l.tables[others, v]).tolist())


def routes(l: Labeling, w: int, src: VertexValue, dst: VertexValue) -> bool:
    """True iff <u,x> -> <w,z> -> <v,y> for some z."""
    (u, x), (v, y) = src, dst
    for vertex in (w, u, v):
        l.check_vertex(vertex)
    l.check_value(x)
    l.check_value(y)
    if w in (u, v):
        raise LabelingError(f"router {w + 1} must differ from both endpoints")
    z = int(l.tables[u, w, x])
    return int(l.tables[w, v, z]) == y


def rotate_certificate(c: CycleCertificate, offset: int) -> CycleCertificate:
    k = len(c.vertices)
    offset %= k
    body = c.trace[:k]
    body = body[offset:] + body[:offset]
    return CycleCertificate(c.vertices[offset:] + c.vertices[:offset], body[0], body + (body[0],))


def lift_certificate(
    c: CycleCertificate, vertex_map: Sequence[int], value_maps: Sequence[Sequence[int]]
) -> CycleCertificate:
    """
    Map a certificate found on a derived labeling back to its source.

    Args:
        c: Certificate on the derived labeling
        vertex_map: vertex_map[v] = source vertex of derived vertex v
        value_maps: value_maps[v][x] = source value of derived value x at derived vertex v

    Returns:
        The certificate expressed in source vertices and values
    """
    k = len(c.vertices)
    trace = tuple(int(value_maps[c.vertices[i % k]][x]) for i, x in enumerate(c.trace))
    return CycleCertificate(tuple(int(vertex_map[v]) for v in c.vertices), trace[0], trace)
