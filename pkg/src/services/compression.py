"""
Service for imageset compression.

Two valued paths that leave a vertex w with distinct imageset values and meet
in the same (vertex, value) pair can be merged into one new vertex whose
imageset is strictly smaller. Every compression leaves an UndoRecord so a
cycle found afterwards can be carried back to the labeling before it.
"""

import logging
from dataclasses import dataclass
from math import isqrt
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import CertificateError, InvariantViolation, LabelingError
from core.labeling import (
    CycleCertificate,
    Labeling,
    ValuedWalk,
    compose_path,
    evaluate_walk,
    imageset,
    rotate_certificate,
    verify_certificate,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PathPair:
    """
    Two valued paths from <w, i1> and <w, i2> to the same pair <endpoint, value>.

    first maps i1 to value, second maps i2 to value.
    """

    endpoint: int
    i1: int
    i2: int
    value: int
    first: ValuedWalk
    second: ValuedWalk

    @property
    def source(self) -> int:
        return self.first.start[0]

    def relabel(self, vertex_map: Sequence[int]) -> "PathPair":
        """The same pair with every vertex v replaced by vertex_map[v]."""

        def walk(w: ValuedWalk) -> ValuedWalk:
            return ValuedWalk(tuple((vertex_map[v], x) for v, x in w.steps))

        return PathPair(vertex_map[self.endpoint], self.i1, self.i2, self.value, walk(self.first), walk(self.second))


@dataclass(frozen=True)
class UndoRecord:
    """
    Everything needed to carry a certificate through a compression backwards.

    vertex_map[v] is the source vertex of result vertex v for every v except
    star, which stands for the removed paths.
    """

    source: Labeling
    result: Labeling
    vertex_map: Tuple[int, ...]
    star: int
    first: ValuedWalk
    second: ValuedWalk
    w: int
    endpoint: int
    i1: int
    i2: int
    j: int
    f: Tuple[int, ...]
    image: FrozenSet[int]

    @property
    def removed(self) -> FrozenSet[int]:
        return frozenset(self.first.vertices) | frozenset(self.second.vertices)

    def undo(self, c: CycleCertificate) -> CycleCertificate:
        """
        Turn a certificate on the compressed labeling into one on the source.

        A cycle through star enters it with some value x from its predecessor;
        the source edge into w maps x to z in im(w), and the path that carries z
        to the star value (the second path when z = i2, the first otherwise)
        takes star's place.

        Raises:
            CertificateError: If c does not verify on the compressed labeling
        """
        check = verify_certificate(self.result, c)
        if not check:
            raise CertificateError(f"certificate does not verify on the compressed labeling: {check.reason}")

        if self.star not in c.vertices:
            lifted = CycleCertificate(tuple(self.vertex_map[v] for v in c.vertices), c.fixed_value, c.trace)
        else:
            c = rotate_certificate(c, c.vertices.index(self.star))
            predecessor, entering = c.vertices[-1], c.trace[-2]
            z = int(self.source.tables[self.vertex_map[predecessor], self.w, entering])
            path = self.second if z == self.i2 else self.first
            walk = evaluate_walk(self.source, path.vertices, z)
            vertices = walk.vertices + tuple(self.vertex_map[v] for v in c.vertices[1:])
            trace = walk.values + c.trace[1:-1] + (z,)
            lifted = CycleCertificate(vertices, z, trace)

        check = verify_certificate(self.source, lifted)
        if not check:
            raise InvariantViolation(f"undoing a compression produced an invalid certificate: {check.reason}")
        return lifted


def compress(l: Labeling, w: int, first: ValuedWalk, second: ValuedWalk) -> Tuple[Labeling, int, UndoRecord]:
    """
    Compress two value-converging paths from w into a new vertex.

    Args:
        l: The labeling
        w: Start vertex of both paths
        first: Valued path from <w, i1> to <w', j>
        second: Valued path from <w, i2> to <w', j>, with i1 != i2 both in im(w)

    Returns:
        (compressed labeling, index of the new vertex, undo record). The vertices
        of both paths are removed, the remaining vertices keep their relative
        order and the new vertex comes last.

    Raises:
        LabelingError: If the paths do not satisfy the preconditions
    """
    l.check_vertex(w)
    for name, path in (("first", first), ("second", second)):
        if path.start[0] != w:
            raise LabelingError(f"{name} path starts at vertex {path.start[0] + 1}, expected {w + 1}")
        if len(path) < 2:
            raise LabelingError(f"{name} path needs at least one edge")
        if not path.is_path:
            raise LabelingError(f"{name} path repeats a vertex")
        mismatch = path.first_mismatch(l)
        if mismatch is not None:
            raise LabelingError(f"{name} path is not consistent with the labeling at step {mismatch}")
    if first.end != second.end:
        raise LabelingError("paths must end at the same vertex with the same value")
    endpoint, j = first.end
    if endpoint == w:
        raise LabelingError("paths must end at a vertex other than their start")
    i1, i2 = first.start[1], second.start[1]
    if i1 == i2:
        raise LabelingError(f"paths must start with distinct values, both start with {i1 + 1}")
    image = imageset(l, w)
    if i1 not in image or i2 not in image:
        raise LabelingError(f"start values {i1 + 1} and {i2 + 1} must both lie in im({w + 1})")

    carried = compose_path(l, first.vertices).table
    f = [j] * l.d
    for x in image:
        if x != i2:
            f[x] = carried[x]
    f_array = np.array(f, dtype=np.int64)

    removed = set(first.vertices) | set(second.vertices)
    kept = [v for v in range(l.n) if v not in removed]
    if not kept:
        raise LabelingError("compression would leave the new vertex without neighbours")
    star = len(kept)

    tables = np.zeros((star + 1, star + 1, l.d), dtype=np.int64)
    tables[:star, :star] = l.tables[np.ix_(kept, kept)]
    tables[:star, star] = f_array[l.tables[kept, w]]
    tables[star, :star] = l.tables[endpoint, kept]
    result = Labeling(tables)

    before, after = len(image), len(imageset(result, star))
    if after > before - 1:
        raise InvariantViolation(f"compressed vertex has |im| = {after}, expected at most {before - 1}")
    logger.debug(
        f"Compressed {len(removed)} vertices from {w + 1} to {endpoint + 1}: n {l.n} -> {result.n}, |im| {before} -> {after}"
    )

    record = UndoRecord(
        source=l,
        result=result,
        vertex_map=tuple(kept),
        star=star,
        first=first,
        second=second,
        w=w,
        endpoint=endpoint,
        i1=i1,
        i2=i2,
        j=j,
        f=tuple(f),
        image=image,
    )
    return result, star, record


def undo_compression(c: CycleCertificate, r: UndoRecord) -> CycleCertificate:
    return r.undo(c)


class CompressionState:
    """
    A labeling under repeated compression.

    targets are the vertices being compressed, spares the pool the paths are
    drawn from. Both are renumbered after every compression; a compressed
    target is replaced by its new vertex in place.
    """

    def __init__(self, labeling: Labeling, targets: Sequence[int], spares: Sequence[int]):
        self.labeling = labeling
        self.targets: List[int] = [labeling.check_vertex(t) for t in targets]
        self.spares: List[int] = [labeling.check_vertex(s) for s in spares]
        if set(self.targets) & set(self.spares):
            raise LabelingError("targets and spares must be disjoint")
        self.records: List[UndoRecord] = []
        self._levels: Dict[int, int] = {t: len(imageset(labeling, t)) for t in self.targets}

    def level(self, v: int) -> int:
        return self._levels[v]

    @property
    def depth(self) -> int:
        return len(self.records)

    def compress(self, pair: PathPair) -> int:
        """Apply a compression at a target; returns the new vertex."""
        w = pair.source
        if w not in self._levels:
            raise LabelingError(f"vertex {w + 1} is not a compression target")
        labeling, star, record = compress(self.labeling, w, pair.first, pair.second)

        index = {old: new for new, old in enumerate(record.vertex_map)}
        targets = []
        for t in self.targets:
            if t == w:
                targets.append(star)
            elif t in index:
                targets.append(index[t])
            else:
                raise InvariantViolation(f"compression at {w + 1} consumed target {t + 1}")

        levels = {}
        for old, new in zip(self.targets, targets):
            levels[new] = len(imageset(labeling, new))
            if levels[new] > self._levels[old]:
                raise InvariantViolation(f"target {old + 1} grew from level {self._levels[old]} to {levels[new]}")
        if levels[star] > self._levels[w] - 1:
            raise InvariantViolation(f"compression at {w + 1} did not lower its level {self._levels[w]}")

        self.labeling = labeling
        self.targets = targets
        self.spares = [index[s] for s in self.spares if s in index]
        self._levels = levels
        self.records.append(record)
        return star

    def unwind(self, c: CycleCertificate) -> CycleCertificate:
        """Carry a certificate on the current labeling back to the original one, newest record first."""
        for record in reversed(self.records):
            c = record.undo(c)
        return c


def restrict_fully_compressed(
    l: Labeling, F: Sequence[int], d_prime: Optional[int] = None
) -> Tuple[Labeling, Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
    """
    Shrink the value domain on the sub-labeling induced by F.

    Each vertex u keeps a block of d' values containing im(u), padded with the
    smallest missing values; the block is renumbered onto [d'] in sorted order.
    Edges u -> v land in im(v), so every restricted label is well defined.

    Args:
        l: The labeling
        F: Vertices, each with |im| <= d' inside the sub-labeling they induce
        d_prime: Target domain size, floor(sqrt(d)) by default

    Returns:
        (restricted labeling, vertex map, per-vertex value maps), suitable for lift_certificate

    Raises:
        LabelingError: If some vertex of F is not d'-compressed
    """
    vertices = tuple(l.check_vertex(int(v)) for v in F)
    if len(vertices) < 2:
        raise LabelingError("restriction needs at least two vertices")
    size = isqrt(l.d) if d_prime is None else d_prime
    if not 1 <= size <= l.d:
        raise LabelingError(f"restricted domain size must lie in [1, {l.d}], got {size}")
    sub = l.induced(vertices)
    m = len(vertices)

    blocks = []
    for a in range(m):
        image = imageset(sub, a)
        if len(image) > size:
            raise LabelingError(f"vertex {vertices[a] + 1} has |im| = {len(image)} > {size}; not fully compressed")
        padding = [x for x in range(l.d) if x not in image][: size - len(image)]
        blocks.append(sorted(image | set(padding)))
    value_maps = np.array(blocks, dtype=np.int64)

    position = np.full((m, l.d), -1, dtype=np.int64)
    position[np.arange(m)[:, None], value_maps] = np.arange(size)
    rows = np.arange(m)[:, None, None]
    cols = np.arange(m)[None, :, None]
    images = sub.tables[rows, cols, value_maps[:, None, :]]
    restricted = position[cols, images]
    off_diagonal = ~np.eye(m, dtype=bool)
    if (restricted[off_diagonal] < 0).any():
        raise InvariantViolation("restricted label leaves the target value block")

    logger.debug(f"Restricted {m} fully compressed vertices from d={l.d} to d'={size}")
    return Labeling(restricted), vertices, tuple(tuple(block) for block in blocks)
