"""
Service for general function labels on at least d^3 - d^2 + d + 1 vertices.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import InvariantViolation
from core.labeling import CycleCertificate, Labeling, evaluate_walk, verify_certificate
from core.results import SolverResult, SolveStatus
from services.bounds import cubic_threshold

logger = logging.getLogger(__name__)

Triple = Tuple[int, int, int]


class ResponsibilityTable:
    """
    One marked router per triple (i, x, y).

    A vertex u is responsible for (i, x, y) when it routes <v_i, x> to
    <v_{i+1}, y>; triples are visited in lexicographic order and each takes
    the lowest unmarked router, so no vertex answers for two triples.
    """

    def __init__(self, responsible: Dict[Triple, int]):
        self._responsible = dict(responsible)
        self._marked = frozenset(self._responsible.values())
        if len(self._marked) != len(self._responsible):
            raise InvariantViolation("a vertex is responsible for more than one triple")

    @classmethod
    def build(cls, l: Labeling, designated: Sequence[int], pool: Sequence[int]) -> "ResponsibilityTable":
        """
        Mark routers for every consecutive pair of designated vertices.

        Args:
            l: The labeling
            designated: v_1, ..., v_m
            pool: Candidate routers, disjoint from designated

        Returns:
            The table of responsible vertices
        """
        pool = list(pool)
        responsible: Dict[Triple, int] = {}
        if not pool:
            return cls(responsible)
        unmarked = np.ones(len(pool), dtype=bool)
        rows = np.arange(len(pool))[:, None]
        for i in range(len(designated) - 1):
            into = l.tables[designated[i], pool]
            # each router sends <v_i, x> to exactly one value at v_{i+1}
            arrives = l.tables[pool, designated[i + 1]][rows, into]
            for x in range(l.d):
                for y in range(l.d):
                    candidates = np.flatnonzero(unmarked & (arrives[:, x] == y))
                    if candidates.size:
                        chosen = int(candidates[0])
                        unmarked[chosen] = False
                        responsible[(i, x, y)] = pool[chosen]
        return cls(responsible)

    def responsible(self, i: int, x: int, y: int) -> Optional[int]:
        return self._responsible.get((i, x, y))

    def is_marked(self, u: int) -> bool:
        return u in self._marked

    @property
    def marked(self):
        return self._marked

    def __len__(self) -> int:
        return len(self._responsible)


class CubicSolver:
    """
    Fixed-point cycles through a center vertex.

    The walk alternates between an unmarked center c and the designated
    vertices v_1, ..., v_m. Among the m + 1 values seen at c two must agree
    once m = d; the circuit between them becomes a simple cycle by routing
    every interior visit to c through the vertex responsible for that step.
    """

    def solve(self, l: Labeling) -> SolverResult:
        n, d = l.n, l.d
        guaranteed = n >= cubic_threshold(d)
        stats = {"marked": 0, "centers_tried": 0}
        if n < 2:
            return SolverResult.failure(SolveStatus.BELOW_THRESHOLD, "need at least two vertices", **stats)

        designated = list(range(min(d, n - 1)))
        pool = list(range(len(designated), n))
        table = ResponsibilityTable.build(l, designated, pool)
        stats["marked"] = len(table)
        centers = [u for u in pool if not table.is_marked(u)]
        logger.debug(f"Marked {len(table)} of {len(pool)} routers; {len(centers)} candidate centers")

        if not centers and guaranteed:
            raise InvariantViolation(f"no unmarked center left among {len(pool)} routers for d={d}")

        for center in centers:
            stats["centers_tried"] += 1
            certificate = self._cycle_through(l, center, designated, table)
            if certificate is not None:
                check = verify_certificate(l, certificate)
                if not check:
                    raise InvariantViolation(f"cubic solver produced an invalid certificate: {check.reason}")
                logger.info(f"Found fixed-point cycle on {certificate.length} vertices through center {center + 1}")
                return SolverResult.success(certificate, **stats)
            if guaranteed:
                raise InvariantViolation(f"center {center + 1} produced no repeated value with d={d} designated vertices")

        status = SolveStatus.BELOW_THRESHOLD if not guaranteed else SolveStatus.NOT_FOUND
        detail = f"no fixed-point cycle found; n={n} is below the guarantee threshold {cubic_threshold(d)}"
        logger.info(detail)
        return SolverResult.failure(status, detail, **stats)

    def _cycle_through(
        self, l: Labeling, center: int, designated: Sequence[int], table: ResponsibilityTable
    ) -> Optional[CycleCertificate]:
        at_center = [0]
        at_designated: List[int] = []
        first_seen = {0: 0}
        for k, v in enumerate(designated):
            x = int(l.tables[center, v, at_center[-1]])
            c = int(l.tables[v, center, x])
            at_designated.append(x)
            at_center.append(c)
            if c in first_seen:
                return self._splice(l, center, designated, table, first_seen[c], k + 1, at_center, at_designated)
            first_seen[c] = k + 1
        return None

    def _splice(
        self,
        l: Labeling,
        center: int,
        designated: Sequence[int],
        table: ResponsibilityTable,
        i: int,
        j: int,
        at_center: Sequence[int],
        at_designated: Sequence[int],
    ) -> CycleCertificate:
        # designated[k] carries value at_designated[k]; the circuit visits v_{i+1}..v_j
        cycle = [center]
        for k in range(i, j):
            cycle.append(designated[k])
            if k + 1 < j:
                router = table.responsible(k, at_designated[k], at_designated[k + 1])
                if router is None:
                    raise InvariantViolation(
                        f"no vertex is responsible for ({k + 1}, {at_designated[k] + 1}, {at_designated[k + 1] + 1})"
                    )
                cycle.append(router)
        walk = evaluate_walk(l, cycle + [center], at_center[i])
        if walk.end[1] != at_center[i]:
            raise InvariantViolation(f"spliced circuit through {center + 1} does not close on its value")
        return CycleCertificate(tuple(cycle), at_center[i], walk.values)


def find_cycle_cubic(l: Labeling) -> SolverResult:
    return CubicSolver().solve(l)
