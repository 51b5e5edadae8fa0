"""
Service for permutation labels.

Finds a fixed-point cycle in any permutation labeling on at least 2d - 1
vertices. The search keeps the input untouched: it shifts a private copy of
the tables, logs every shift, and replays the log backwards so the returned
certificate is checked against the original labeling.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import InvariantViolation, LabelingError
from core.labeling import (
    CycleCertificate,
    Edge,
    Labeling,
    certify,
    lift_certificate,
    verify_certificate,
)
from core.results import SolverResult, SolveStatus
from services.bounds import permutation_threshold
from services.constructions import (
    group_labels_to_labeling,
    permutation_labeling_to_group_labeling,
    recover_identity_product_cycle,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShiftRecord:
    """
    A shift at edge u -> v that replaced the label sigma of u -> v by the identity.

    Incoming labels g at v became g followed by sigma^-1, outgoing labels h
    became sigma followed by h; composites along cycles did not change.
    """

    edge: Edge
    sigma: Tuple[int, ...]

    def undo(self, l: Labeling) -> Labeling:
        """Restore the labeling as it was before the shift."""
        tables = l.writable_copy()
        _unshift(tables, self.edge[1], np.array(self.sigma))
        return Labeling(tables)

    def lift_trace(self, vertices: Sequence[int], trace: Sequence[int]) -> Tuple[int, ...]:
        """Re-express a trace of the shifted labeling in the unshifted one."""
        v = self.edge[1]
        k = len(vertices)
        return tuple(self.sigma[x] if vertices[i % k] == v else x for i, x in enumerate(trace))


def _apply_shift(tables: np.ndarray, u: int, v: int) -> Tuple[int, ...]:
    sigma = tables[u, v].copy()
    inverse = np.argsort(sigma)
    others = np.arange(tables.shape[0]) != v
    tables[others, v] = inverse[tables[others, v]]
    tables[v, others] = tables[v, others][:, sigma]
    return tuple(sigma.tolist())


def _unshift(tables: np.ndarray, v: int, sigma: np.ndarray) -> None:
    inverse = np.argsort(sigma)
    others = np.arange(tables.shape[0]) != v
    tables[others, v] = sigma[tables[others, v]]
    tables[v, others] = tables[v, others][:, inverse]


def _require_permutations(l: Labeling) -> None:
    bad = l.non_permutation_edges()
    if bad:
        u, v = bad[0]
        raise LabelingError(f"edge ({u + 1}, {v + 1}) is not a permutation; shifting needs inverses")


def shift_at(l: Labeling, u: int, v: int) -> Tuple[Labeling, ShiftRecord]:
    """
    Shift at u -> v.

    Args:
        l: A permutation labeling
        u: Tail of the edge
        v: Head of the edge; only edges incident to v change

    Returns:
        The shifted labeling, in which u -> v carries the identity, and the record to undo it
    """
    l.check_vertex(u)
    l.check_vertex(v)
    if u == v:
        raise LabelingError(f"no edge from vertex {u + 1} to itself")
    _require_permutations(l)
    tables = l.writable_copy()
    sigma = _apply_shift(tables, u, v)
    return Labeling(tables), ShiftRecord((u, v), sigma)


def unshift_certificate(c: CycleCertificate, records: Sequence[ShiftRecord]) -> CycleCertificate:
    """Replay shift records backwards so the certificate holds before the first shift."""
    trace = c.trace
    for record in reversed(records):
        trace = record.lift_trace(c.vertices, trace)
    return CycleCertificate(c.vertices, trace[0], trace)


def restrict_to_complement(
    l: Labeling, W: Sequence[int], A: Sequence[int]
) -> Tuple[Labeling, Tuple[int, ...], Tuple[int, ...]]:
    """
    Restrict to the vertices W and the values A, when every edge inside W maps A into A.

    Args:
        l: The labeling
        W: Vertex set
        A: Value set closed under every edge inside W

    Returns:
        (restricted labeling on |W| vertices with d' = |A|, vertex map, value map); the maps
        send restricted ids back to ids of l
    """
    vertex_map = tuple(sorted(l.check_vertex(int(v)) for v in set(W)))
    value_map = tuple(sorted(l.check_value(int(x)) for x in set(A)))
    if not vertex_map or not value_map:
        raise LabelingError("restriction needs at least one vertex and one value")
    sub = l.tables[np.ix_(vertex_map, vertex_map)][:, :, list(value_map)]
    index = np.full(l.d, -1, dtype=np.int64)
    index[list(value_map)] = np.arange(len(value_map))
    restricted = index[sub]
    leaks = np.argwhere(restricted < 0)
    if leaks.size:
        a, b, x = (int(i) for i in leaks[0])
        u, v = vertex_map[a], vertex_map[b]
        raise LabelingError(
            f"edge {u + 1} -> {v + 1} maps {value_map[x] + 1} outside the value block; restriction hypothesis violated"
        )
    return Labeling(restricted), vertex_map, value_map


def lift_restricted(c: CycleCertificate, vertex_map: Sequence[int], value_map: Sequence[int]) -> CycleCertificate:
    return lift_certificate(c, vertex_map, [value_map] * len(vertex_map))


class PermutationSolver:
    """
    Fixed-point cycles in permutation labelings.

    d = 2 is settled by checking the 2- and 3-cycles on three vertices. For
    d >= 3 a chain u1, (v1,) u2, (v2,) ... is grown from the lowest vertex;
    after shifting, the chain edges carry the identity and the set of values
    reachable from value 1 grows by at least one per step. When no edge among
    the unused vertices leaves the reachable set, the unused vertices keep the
    complementary values among themselves and the search recurses there.
    """

    def __init__(self, check_progress: bool = True):
        """
        Initialize the solver.

        Args:
            check_progress: Assert the reachable-set growth after every chain step
        """
        self.check_progress = check_progress

    def solve(self, l: Labeling) -> SolverResult:
        _require_permutations(l)
        stats: Dict[str, int] = {"shifts": 0, "chain_length": 0, "depth": 0}
        guaranteed = l.n >= permutation_threshold(l.d)
        certificate = self._solve(l, 0, stats)

        if certificate is None:
            if guaranteed:
                raise InvariantViolation(f"no fixed-point cycle found on n={l.n} >= 2d-1 for d={l.d}")
            detail = f"no fixed-point cycle found; n={l.n} is below the guarantee threshold {permutation_threshold(l.d)}"
            logger.info(detail)
            return SolverResult.failure(SolveStatus.BELOW_THRESHOLD, detail, **stats)

        check = verify_certificate(l, certificate)
        if not check:
            raise InvariantViolation(f"permutation solver produced an invalid certificate: {check.reason}")
        logger.info(f"Found fixed-point cycle on {certificate.length} vertices (n={l.n}, d={l.d})")
        return SolverResult.success(certificate, **stats)

    def _solve(self, l: Labeling, depth: int, stats: Dict[str, int]) -> Optional[CycleCertificate]:
        stats["depth"] = max(stats["depth"], depth)
        if l.n < 2:
            return None
        if l.d == 1:
            return certify(l, (0, 1))
        if l.d == 2:
            return self._solve_two(l)
        return self._grow_chain(l, depth, stats)

    def _solve_two(self, l: Labeling) -> Optional[CycleCertificate]:
        # Opposite edges must differ, so the swap appears exactly 3 times on K3
        # and one of the two directed triangles composes to the identity.
        m = min(l.n, 3)
        candidates = [(a, b) for a in range(m) for b in range(a + 1, m)]
        if m == 3:
            candidates += [(0, 1, 2), (0, 2, 1)]
        for cycle in candidates:
            certificate = certify(l, cycle)
            if certificate is not None:
                return certificate
        return None

    def _grow_chain(self, l: Labeling, depth: int, stats: Dict[str, int]) -> Optional[CycleCertificate]:
        n, d = l.n, l.d
        tables = l.writable_copy()
        records: List[ShiftRecord] = []
        start = 0
        chain = [start]
        used = {start}
        # value reachable at the chain head -> vertex path from the start mapping value 1 to it
        reach: Dict[int, Tuple[int, ...]] = {0: (start,)}

        while True:
            head = chain[-1]
            if self.check_progress and len(reach) < len(chain):
                raise InvariantViolation(f"chain step {len(chain)} reaches only {len(reach)} values")

            if len(reach) == d:
                back = int(np.flatnonzero(tables[head, start] == 0)[0])
                cycle = reach[back]
                shifted = Labeling(tables)
                certificate = certify(shifted, cycle)
                if certificate is None:
                    raise InvariantViolation(f"closed chain {[v + 1 for v in cycle]} is not a fixed-point cycle")
                stats["chain_length"] = max(stats["chain_length"], len(chain))
                logger.debug(f"Chain closed after {len(chain)} steps at depth {depth}")
                return unshift_certificate(certificate, records)

            unused = [u for u in range(n) if u not in used]
            if len(unused) < 2:
                logger.debug(f"Chain ran out of vertices at depth {depth} with {len(reach)} values reached")
                return None
            for u in unused:
                records.append(ShiftRecord((head, u), _apply_shift(tables, head, u)))
            stats["shifts"] += len(unused)

            reached = sorted(reach)
            inside = np.zeros(d, dtype=bool)
            inside[reached] = True
            block = tables[np.ix_(unused, unused)][:, :, reached]
            leaving = ~inside[block]
            diagonal = np.arange(len(unused))
            leaving[diagonal, diagonal, :] = False
            hits = np.argwhere(leaving)

            if hits.size:
                a, b, s = (int(i) for i in hits[0])
                v, u = unused[a], unused[b]
                extended = {x: path + (u,) for x, path in reach.items()}
                for x, path in reach.items():
                    y = int(tables[v, u, x])
                    if y not in extended:
                        extended[y] = path + (v, u)
                logger.debug(
                    f"Chain step {len(chain)}: {v + 1} -> {u + 1} maps {reached[s] + 1} out of the reachable set "
                    f"({len(reach)} -> {len(extended)} values)"
                )
                chain.append(u)
                used.update((u, v))
                reach = extended
                continue

            # Every edge among the unused vertices keeps the reachable values,
            # hence also the complementary ones.
            complement = [x for x in range(d) if x not in reach]
            restricted, vertex_map, value_map = restrict_to_complement(Labeling(tables), unused, complement)
            stats["chain_length"] = max(stats["chain_length"], len(chain))
            logger.debug(
                f"Chain blocked at step {len(chain)}; recursing on {len(unused)} vertices with d'={len(complement)}"
            )
            sub_certificate = self._solve(restricted, depth + 1, stats)
            if sub_certificate is None:
                return None
            return unshift_certificate(lift_restricted(sub_certificate, vertex_map, value_map), records)


def find_cycle_permutation(l: Labeling) -> SolverResult:
    return PermutationSolver().solve(l)


def find_identity_composite_cycle(l: Labeling) -> SolverResult:
    """
    A cycle whose permutation labels compose to the identity.

    The labeling is read over the symmetric group S_d and reduced to a
    permutation labeling on d! points; any n >= 2 d! - 1 guarantees success.

    Args:
        l: A permutation labeling

    Returns:
        SolverResult whose certificate cycle composes to the identity permutation
    """
    group_labeling = permutation_labeling_to_group_labeling(l)
    result = PermutationSolver().solve(group_labels_to_labeling(group_labeling))
    if not result.found:
        return result
    cycle = recover_identity_product_cycle(group_labeling, result.certificate)
    certificate = certify(l, cycle)
    if certificate is None:
        raise InvariantViolation(f"identity-product cycle {[v + 1 for v in cycle]} has no fixed point")
    return SolverResult.success(certificate, **result.stats)
