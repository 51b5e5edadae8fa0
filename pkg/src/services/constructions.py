"""
Service for building labelings: the extremal lower-bound construction, the
integer and group reductions, and seeded random instances.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import CertificateError, FormatError, GroupError, InvariantViolation, LabelingError
from core.formats import content_lines, expect_header, parse_ints, parse_keyed_ints
from core.labeling import CycleCertificate, Edge, FunctionLabel, Labeling, verify_certificate

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

GROUP_TABLE_MAGIC = "GRPT"
GROUP_LABELING_MAGIC = "GLBL"

# Associativity is checked exhaustively up to this order.
ASSOCIATIVITY_CHECK_LIMIT = 64


class LabelClass(str, Enum):
    GENERAL = "general"
    PERMUTATION = "permutation"
    CYCLIC_GROUP = "cyclic_group"


def make_rng(seed: int) -> np.random.Generator:
    """
    The pinned generator behind every random instance.

    Philox is numpy's 64-bit counter-based bit generator; its stream for a
    given seed is fixed across platforms, so seeded instances are portable.
    """
    return np.random.Generator(np.random.Philox(int(seed)))


def lower_bound_labeling(d: int) -> Labeling:
    """
    The fixed-point-free labeling on d vertices.

    Edges (i, j) with i < j carry the identity, all other edges x -> x + 1 (mod d).
    Every simple cycle uses between 1 and d - 1 backward edges, so no composite
    has a fixed point.
    """
    if d < 1:
        raise LabelingError(f"lower-bound construction needs d >= 1, got {d}")
    identity = list(range(d))
    shifted = [(x + 1) % d for x in range(d)]
    return Labeling.from_function(d, d, lambda i, j: identity if i < j else shifted)


def integer_labels_to_labeling(n: int, d: int, labels: Mapping[Edge, int]) -> Labeling:
    """
    Replace each integer label k (mod d) by the shift x -> x + k.

    Zero-sum cycles of the integer labeling are exactly the fixed-point cycles
    of the result.
    """
    tables = {}
    for edge, k in labels.items():
        if not 0 <= k < d:
            raise LabelingError(f"integer label {k} on edge ({edge[0] + 1}, {edge[1] + 1}) outside [0, {d - 1}]")
        tables[edge] = FunctionLabel.shift(d, k).table
    return Labeling.from_labels(n, d, tables)


@dataclass(frozen=True)
class GroupTable:
    """
    A finite group given by its Cayley table; elements are 0..order-1 in memory.

    mul[a][b] is the product a * b (row = left operand).
    """

    mul: Tuple[Tuple[int, ...], ...]
    identity: int

    def __post_init__(self):
        mul = tuple(tuple(int(x) for x in row) for row in self.mul)
        object.__setattr__(self, "mul", mul)
        self._validate()

    @property
    def order(self) -> int:
        return len(self.mul)

    def _validate(self) -> None:
        d = self.order
        if d < 1:
            raise GroupError("a group needs at least one element")
        if any(len(row) != d for row in self.mul):
            raise GroupError(f"Cayley table must be {d} x {d}")
        table = np.array(self.mul, dtype=np.int64)
        if table.min() < 0 or table.max() >= d:
            raise GroupError(f"Cayley table entries must lie in [1, {d}]")
        if not 0 <= self.identity < d:
            raise GroupError(f"identity {self.identity + 1} lies outside [1, {d}]")
        elements = np.arange(d)
        if not (np.array_equal(table[self.identity], elements) and np.array_equal(table[:, self.identity], elements)):
            raise GroupError(f"element {self.identity + 1} does not act as the identity")
        if not ((np.sort(table, axis=0) == elements[:, None]).all() and (np.sort(table, axis=1) == elements).all()):
            raise GroupError("Cayley table is not a Latin square")
        if d <= ASSOCIATIVITY_CHECK_LIMIT:
            left = table[table]
            right = table[elements[:, None, None], table[None, :, :]]
            if not np.array_equal(left, right):
                a, b, c = (int(i) for i in np.argwhere(left != right)[0])
                raise GroupError(f"not associative: ({a + 1}*{b + 1})*{c + 1} != {a + 1}*({b + 1}*{c + 1})")

    def multiply(self, a: int, b: int) -> int:
        return self.mul[a][b]

    def product(self, elements: Iterable[int]) -> int:
        return reduce(self.multiply, elements, self.identity)

    def right_multiplication(self, k: int) -> FunctionLabel:
        """The permutation x -> x * k."""
        return FunctionLabel(tuple(self.mul[x][k] for x in range(self.order)))


def group_product(group: GroupTable, elements: Iterable[int]) -> int:
    """Ordered product e1 * e2 * ... * ek; the identity for no elements."""
    return group.product(elements)


def cyclic_group(d: int) -> GroupTable:
    """Z_d with element i+1 on disk standing for the residue i."""
    if d < 1:
        raise GroupError(f"cyclic group needs d >= 1, got {d}")
    return GroupTable(tuple(tuple((a + b) % d for b in range(d)) for a in range(d)), 0)


def symmetric_group(m: int) -> GroupTable:
    """
    The symmetric group on [m], of order m!.

    Elements are the permutations of [m] in lexicographic order (so the
    identity is element 1 on disk); the product p * q applies p first, then q,
    matching the way labels compose along a path.
    """
    if m < 1:
        raise GroupError(f"symmetric group needs m >= 1, got {m}")
    perms = list(itertools.permutations(range(m)))
    index = {p: i for i, p in enumerate(perms)}
    mul = tuple(tuple(index[tuple(q[p[x]] for x in range(m))] for q in perms) for p in perms)
    return GroupTable(mul, index[tuple(range(m))])


def symmetric_group_elements(m: int) -> Tuple[Tuple[int, ...], ...]:
    """The permutations behind symmetric_group(m), in element order."""
    return tuple(itertools.permutations(range(m)))


@dataclass(frozen=True)
class GroupLabeling:
    """A complete bidirected graph on n vertices with a group element per ordered pair."""

    n: int
    group: GroupTable
    labels: Mapping[Edge, int]

    def __post_init__(self):
        if self.n < 1:
            raise LabelingError(f"need n >= 1, got {self.n}")
        expected = {(u, v) for u in range(self.n) for v in range(self.n) if u != v}
        if set(self.labels) != expected:
            raise LabelingError(f"group labeling must cover exactly the {len(expected)} ordered pairs")
        for (u, v), k in self.labels.items():
            if not 0 <= k < self.group.order:
                raise GroupError(f"edge ({u + 1}, {v + 1}) carries unknown element {k + 1}")

    @property
    def d(self) -> int:
        return self.group.order

    def element(self, u: int, v: int) -> int:
        return self.labels[(u, v)]


def group_labels_to_labeling(gl: GroupLabeling) -> Labeling:
    """Give every edge labeled k the right-multiplication permutation x -> x * k."""
    right = [gl.group.right_multiplication(k).table for k in range(gl.d)]
    return Labeling.from_labels(gl.n, gl.d, {edge: right[k] for edge, k in gl.labels.items()})


def recover_identity_product_cycle(gl: GroupLabeling, c: CycleCertificate) -> Tuple[int, ...]:
    """
    Read a fixed-point cycle of the reduced labeling as an identity-product cycle.

    Args:
        gl: The group labeling
        c: A certificate against group_labels_to_labeling(gl)

    Returns:
        The certificate's vertex cycle, whose ordered label product is the identity

    Raises:
        CertificateError: If the certificate does not verify against the reduction
    """
    check = verify_certificate(group_labels_to_labeling(gl), c)
    if not check:
        raise CertificateError(f"certificate does not verify against the reduced labeling: {check.reason}")
    vertices = c.vertices
    k = len(vertices)
    product = group_product(gl.group, (gl.element(vertices[i], vertices[(i + 1) % k]) for i in range(k)))
    if product != gl.group.identity:
        raise InvariantViolation(f"fixed-point cycle {[v + 1 for v in vertices]} has product {product + 1}")
    return vertices


def permutation_labeling_to_group_labeling(l: Labeling) -> GroupLabeling:
    """
    View a permutation labeling of [d] as a labeling over the symmetric group S_d.

    A cycle of the result with identity product is a cycle of l whose labels
    compose to the identity permutation.
    """
    bad = l.non_permutation_edges()
    if bad:
        u, v = bad[0]
        raise LabelingError(f"edge ({u + 1}, {v + 1}) is not a permutation")
    group = symmetric_group(l.d)
    index = {p: i for i, p in enumerate(symmetric_group_elements(l.d))}
    labels = {(u, v): index[tuple(l.tables[u, v].tolist())] for u, v in l.edges()}
    return GroupLabeling(l.n, group, labels)


def random_labeling(n: int, d: int, seed: int, label_class: Union[str, LabelClass] = LabelClass.GENERAL) -> Labeling:
    """
    Seeded random labeling.

    Args:
        n: Vertex count
        d: Value-domain size
        seed: Philox seed
        label_class: general (entries uniform in [d]), permutation (uniform permutations)
            or cyclic_group (uniform shifts x -> x + k)

    Returns:
        The labeling; identical for identical arguments
    """
    if n < 1 or d < 1:
        raise LabelingError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    label_class = LabelClass(label_class)
    rng = make_rng(seed)
    if label_class is LabelClass.GENERAL:
        tables = rng.integers(0, d, size=(n, n, d))
    elif label_class is LabelClass.PERMUTATION:
        tables = np.array([rng.permutation(d) for _ in range(n * n)]).reshape(n, n, d)
    else:
        shifts = rng.integers(0, d, size=(n, n))
        tables = (np.arange(d)[None, None, :] + shifts[:, :, None]) % d
    logger.debug(f"Generated random {label_class.value} labeling n={n} d={d} seed={seed}")
    return Labeling(tables)


def random_integer_labels(n: int, d: int, seed: int) -> Dict[Edge, int]:
    rng = make_rng(seed)
    draws = rng.integers(0, d, size=(n, n))
    return {(u, v): int(draws[u, v]) for u in range(n) for v in range(n) if u != v}


def random_group_labeling(n: int, group: GroupTable, seed: int) -> GroupLabeling:
    rng = make_rng(seed)
    draws = rng.integers(0, group.order, size=(n, n))
    return GroupLabeling(n, group, {(u, v): int(draws[u, v]) for u in range(n) for v in range(n) if u != v})


def group_from_spec(spec: str) -> GroupTable:
    """Parse 'cyclic:<d>' or 'symmetric:<m>'."""
    kind, _, size = spec.partition(":")
    try:
        value = int(size)
    except ValueError:
        raise GroupError(f"group spec must look like cyclic:<d> or symmetric:<m>, got {spec!r}") from None
    if kind == "cyclic":
        return cyclic_group(value)
    if kind == "symmetric":
        return symmetric_group(value)
    raise GroupError(f"unknown group family {kind!r}")


def format_group_table(group: GroupTable) -> str:
    lines = [f"{GROUP_TABLE_MAGIC} 1", f"d {group.order} id {group.identity + 1}"]
    lines.extend(" ".join(str(x + 1) for x in row) for row in group.mul)
    return "\n".join(lines) + "\n"


def parse_group_table(text: str) -> GroupTable:
    """Parse a GRPT v1 document; the identity is declared, never inferred."""
    lines = content_lines(text)
    rest = list(expect_header(lines, GROUP_TABLE_MAGIC))
    if not rest:
        raise FormatError("missing 'd <d> id <e>' line")
    d, identity = parse_keyed_ints(rest[0], ("d", "id"))
    rows = rest[1:]
    if len(rows) != d:
        raise FormatError(f"expected {d} Cayley-table rows, got {len(rows)}")
    mul = []
    for number, line in rows:
        row = parse_ints(line.split(), number)
        if len(row) != d:
            raise FormatError(f"Cayley-table row needs {d} entries", number)
        mul.append(tuple(x - 1 for x in row))
    return GroupTable(tuple(mul), identity - 1)


def format_group_labeling(gl: GroupLabeling, group_ref: str) -> str:
    lines = [f"{GROUP_LABELING_MAGIC} 1", f"n {gl.n} d {gl.d}", f"group {group_ref}"]
    for (u, v) in sorted(gl.labels):
        lines.append(f"{u + 1} {v + 1} : {gl.labels[(u, v)] + 1}")
    return "\n".join(lines) + "\n"


def parse_group_labeling(text: str, base_dir: Optional[PathLike] = None) -> GroupLabeling:
    """
    Parse a GLBL v1 document.

    Args:
        text: The document
        base_dir: Directory against which a relative GRPT reference is resolved

    Returns:
        The group labeling, with its group loaded from the referenced GRPT file
    """
    lines = content_lines(text)
    rest = list(expect_header(lines, GROUP_LABELING_MAGIC))
    if len(rest) < 2:
        raise FormatError("missing 'n <n> d <d>' or 'group <file>' line")
    n, d = parse_keyed_ints(rest[0], ("n", "d"))
    number, group_line = rest[1]
    keyword, _, ref = group_line.partition(" ")
    if keyword != "group" or not ref.strip():
        raise FormatError(f"expected 'group <file>', got {group_line!r}", number)
    group_path = Path(ref.strip())
    if base_dir is not None and not group_path.is_absolute():
        group_path = Path(base_dir) / group_path
    group = read_group_table(group_path)
    if group.order != d:
        raise FormatError(f"group file has order {group.order}, labeling declares d = {d}", number)

    labels = {}
    for number, line in rest[2:]:
        head, sep, tail = line.partition(":")
        pair = parse_ints(head.split(), number)
        element = parse_ints(tail.split(), number)
        if not sep or len(pair) != 2 or len(element) != 1:
            raise FormatError(f"expected '<u> <v> : <k>', got {line!r}", number)
        u, v = pair
        if not (1 <= u <= n and 1 <= v <= n) or u == v:
            raise FormatError(f"invalid edge ({u}, {v}) for n = {n}", number)
        if (u - 1, v - 1) in labels:
            raise FormatError(f"edge ({u}, {v}) labeled twice", number)
        if not 1 <= element[0] <= d:
            raise FormatError(f"element {element[0]} outside [1, {d}]", number)
        labels[(u - 1, v - 1)] = element[0] - 1
    if len(labels) != n * (n - 1):
        raise FormatError(f"expected {n * (n - 1)} edge lines, got {len(labels)}")
    return GroupLabeling(n, group, labels)


def read_group_table(path: PathLike) -> GroupTable:
    logger.debug(f"Reading group table from {path}")
    return parse_group_table(Path(path).read_text())


def write_group_table(path: PathLike, group: GroupTable) -> None:
    Path(path).write_text(format_group_table(group))
    logger.info(f"Wrote group table of order {group.order} to {path}")


def read_group_labeling(path: PathLike) -> GroupLabeling:
    path = Path(path)
    logger.debug(f"Reading group labeling from {path}")
    return parse_group_labeling(path.read_text(), base_dir=path.parent)


def write_group_labeling(path: PathLike, gl: GroupLabeling, group_path: PathLike) -> None:
    """Write the GLBL file and its GRPT file, referencing the latter relative to the former."""
    path, group_path = Path(path), Path(group_path)
    write_group_table(group_path, gl.group)
    try:
        ref = str(group_path.resolve().relative_to(path.resolve().parent))
    except ValueError:
        ref = str(group_path.resolve())
    path.write_text(format_group_labeling(gl, ref))
    logger.info(f"Wrote group labeling n={gl.n} d={gl.d} to {path}")


def cycle_products(gl: GroupLabeling, cycles: Iterable[Sequence[int]]) -> Dict[Tuple[int, ...], int]:
    """Ordered label product of each vertex cycle (used by the reduction cross-checks)."""
    products = {}
    for cycle in cycles:
        cycle = tuple(cycle)
        k = len(cycle)
        products[cycle] = group_product(gl.group, (gl.element(cycle[i], cycle[(i + 1) % k]) for i in range(k)))
    return products
