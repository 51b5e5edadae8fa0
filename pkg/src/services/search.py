"""
Service for exhaustive checks: brute-force fixed-point-cycle oracles and the
backtracking search for fixed-point-free labelings of small complete graphs.
"""

import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import Manager
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import FormatError, FrontierExceeded, InvariantViolation, LabelingError, OracleLimitExceeded
from core.formats import content_lines, format_labeling, parse_keyed_ints, parse_labeling
from core.labeling import CycleCertificate, Labeling, evaluate_walk, is_fixed_point_cycle
from services.constructions import LabelClass

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DEFAULT_ORACLE_MAX_N = 10
DEFAULT_MAX_ASSIGNMENTS = 1_000_000

# Nodes between two looks at the shared stop flag.
STOP_CHECK_INTERVAL = 1024


def simple_cycles(n: int) -> Iterator[Tuple[int, ...]]:
    """Every simple cycle of K_n with at least 2 vertices, once each, smallest vertex first."""
    for size in range(2, n + 1):
        for subset in itertools.combinations(range(n), size):
            for rest in itertools.permutations(subset[1:]):
                yield (subset[0],) + rest


def _check_limit(l: Labeling, max_n: int) -> None:
    if l.n > max_n:
        raise OracleLimitExceeded(f"brute force is limited to n <= {max_n}, got n = {l.n}")


def _dfs_fixed_point_cycles(l: Labeling) -> Iterator[Tuple[Tuple[int, ...], int]]:
    tables = l.tables
    values = np.arange(l.d)

    def extend(path: List[int], composite: np.ndarray, used: List[bool]) -> Iterator[Tuple[Tuple[int, ...], int]]:
        start, u = path[0], path[-1]
        for v in range(start + 1, l.n):
            if used[v]:
                continue
            carried = tables[u, v][composite]
            closed = tables[v, start][carried]
            fixed = np.flatnonzero(closed == values)
            path.append(v)
            if fixed.size:
                yield tuple(path), int(fixed[0])
            used[v] = True
            yield from extend(path, carried, used)
            used[v] = False
            path.pop()

    for start in range(l.n):
        used = [False] * l.n
        used[start] = True
        yield from extend([start], values, used)


def brute_force_cycle(l: Labeling, max_n: int = DEFAULT_ORACLE_MAX_N) -> Optional[CycleCertificate]:
    """
    Exhaustive depth-first search over all simple cycles.

    Each cycle is rooted at its smallest vertex; the composite along the
    current path is carried down the search, so every extension costs O(d).

    Args:
        l: The labeling
        max_n: Largest vertex count accepted

    Returns:
        A certificate for the first fixed-point cycle in search order, or None when there is none

    Raises:
        OracleLimitExceeded: If l.n > max_n
    """
    _check_limit(l, max_n)
    for cycle, fixed_value in _dfs_fixed_point_cycles(l):
        walk = evaluate_walk(l, cycle + (cycle[0],), fixed_value)
        return CycleCertificate(cycle, fixed_value, walk.values)
    return None


def all_fixed_point_cycles(l: Labeling, max_n: int = DEFAULT_ORACLE_MAX_N) -> List[Tuple[int, ...]]:
    """
    Second oracle: every fixed-point cycle, found by enumerating vertex subsets
    and their orderings and composing each cycle from scratch.
    """
    _check_limit(l, max_n)
    return [cycle for cycle in simple_cycles(l.n) if is_fixed_point_cycle(l, cycle) is not None]


def verify_no_fixed_point(l: Labeling, max_n: int = DEFAULT_ORACLE_MAX_N) -> bool:
    return brute_force_cycle(l, max_n) is None


@dataclass
class SearchReport:
    """Outcome of an extremal search; witness is a fixed-point-free labeling when one exists."""

    n: int
    d: int
    label_class: LabelClass
    witness: Optional[Labeling]
    nodes: int
    time_ms: int

    @property
    def exists(self) -> bool:
        return self.witness is not None

    def to_text(self) -> str:
        lines = [
            f"PARAMS n {self.n} d {self.d} class {self.label_class.value}",
            f"RESULT {'exists' if self.exists else 'none'}",
            f"NODES {self.nodes}",
            f"TIME_MS {self.time_ms}",
        ]
        text = "\n".join(lines) + "\n"
        if self.witness is not None:
            text += format_labeling(self.witness)
        return text

    @classmethod
    def parse(cls, text: str) -> "SearchReport":
        lines = content_lines(text)
        if len(lines) < 4:
            raise FormatError("search report needs PARAMS, RESULT, NODES and TIME_MS lines")
        number, params = lines[0]
        tokens = params.split()
        if len(tokens) != 7 or tokens[0] != "PARAMS" or tokens[5] != "class":
            raise FormatError(f"expected 'PARAMS n <n> d <d> class <class>', got {params!r}", number)
        n, d = parse_keyed_ints((number, " ".join(tokens[1:5])), ("n", "d"))
        try:
            label_class = LabelClass(tokens[6])
        except ValueError:
            raise FormatError(f"unknown label class {tokens[6]!r}", number) from None

        number, result = lines[1]
        if result not in ("RESULT exists", "RESULT none"):
            raise FormatError(f"expected 'RESULT <exists|none>', got {result!r}", number)
        (nodes,) = parse_keyed_ints(lines[2], ("NODES",))
        (time_ms,) = parse_keyed_ints(lines[3], ("TIME_MS",))

        witness = None
        if result == "RESULT exists":
            witness = parse_labeling("\n".join(line for _, line in lines[4:]))
        elif len(lines) > 4:
            raise FormatError("a report with RESULT none carries no witness", lines[4][0])
        return cls(n, d, label_class, witness, nodes, time_ms)


def write_report(path: PathLike, report: SearchReport) -> None:
    Path(path).write_text(report.to_text())
    logger.info(f"Wrote search report to {path}")


def read_report(path: PathLike) -> SearchReport:
    return SearchReport.parse(Path(path).read_text())


def candidate_labels(d: int, label_class: Union[str, LabelClass]) -> List[np.ndarray]:
    """Every label of the class, in lexicographic table order."""
    label_class = LabelClass(label_class)
    if label_class is LabelClass.GENERAL:
        tables = itertools.product(range(d), repeat=d)
    elif label_class is LabelClass.PERMUTATION:
        tables = itertools.permutations(range(d))
    else:
        tables = (tuple((x + k) % d for x in range(d)) for k in range(d))
    return [np.array(table, dtype=np.int64) for table in tables]


class _Stopped(Exception):
    pass


class ExtremalSearch:
    """
    Backtracking over edge-label assignments of K_n.

    Edges are assigned in lexicographic order. With pruning, a cycle is
    checked as soon as its last edge in that order is assigned, so 2-cycles
    are checked when both directions of a pair are set; without pruning all
    cycles are checked at the leaves only.
    """

    def __init__(
        self,
        n: int,
        d: int,
        label_class: Union[str, LabelClass] = LabelClass.GENERAL,
        prune: bool = True,
        workers: int = 1,
        max_assignments: int = DEFAULT_MAX_ASSIGNMENTS,
        override: bool = False,
    ):
        if n < 1 or d < 1:
            raise LabelingError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
        self.n = n
        self.d = d
        self.label_class = LabelClass(label_class)
        self.prune = prune
        self.workers = max(1, workers)
        self.max_assignments = max_assignments
        self.override = override

        self.candidates = candidate_labels(d, self.label_class)
        self.edges = [(u, v) for u in range(n) for v in range(n) if u != v]
        position = {edge: i for i, edge in enumerate(self.edges)}
        self._closing: List[List[Tuple[Tuple[int, int], ...]]] = [[] for _ in self.edges]
        self._all_cycles: List[Tuple[Tuple[int, int], ...]] = []
        for cycle in simple_cycles(n):
            cycle_edges = tuple(zip(cycle, cycle[1:] + cycle[:1]))
            self._closing[max(position[e] for e in cycle_edges)].append(cycle_edges)
            self._all_cycles.append(cycle_edges)
        self._values = np.arange(d)
        self._nodes = 0

    @property
    def frontier(self) -> int:
        """Number of complete assignments a search without pruning would visit."""
        return len(self.candidates) ** len(self.edges)

    def run(self) -> SearchReport:
        """
        Search for a fixed-point-free labeling.

        Raises:
            FrontierExceeded: If the frontier is above max_assignments and override is off
        """
        if self.frontier > self.max_assignments and not self.override:
            raise FrontierExceeded(
                f"search space has {self.frontier} assignments, limit is {self.max_assignments}; pass the override to run anyway"
            )
        logger.info(
            f"Searching {self.label_class.value} labelings of K_{self.n} with d={self.d} "
            f"({self.frontier} assignments, prune={self.prune}, workers={self.workers})"
        )
        started = time.perf_counter()
        if self.workers == 1 or not self.edges:
            witness, nodes = self.search_subtree(())
        else:
            witness, nodes = self._run_parallel()
        elapsed = int(round((time.perf_counter() - started) * 1000))

        if witness is not None and self.n <= DEFAULT_ORACLE_MAX_N and not verify_no_fixed_point(witness):
            raise InvariantViolation("search witness has a fixed-point cycle")
        report = SearchReport(self.n, self.d, self.label_class, witness, nodes, elapsed)
        logger.info(f"Search finished: RESULT {'exists' if report.exists else 'none'}, {nodes} nodes, {elapsed} ms")
        return report

    def partition(self) -> List[Tuple[int, ...]]:
        """Independent subtrees, one per label of the first edge."""
        if not self.edges:
            return [()]
        return [(i,) for i in range(len(self.candidates))]

    def search_subtree(self, prefix: Sequence[int], stop=None) -> Tuple[Optional[Labeling], int]:
        """
        Search below a fixed assignment of the first len(prefix) edges.

        Args:
            prefix: Candidate indices for the leading edges
            stop: Optional shared event; the search gives up once it is set

        Returns:
            (witness or None, nodes visited)
        """
        self._nodes = 0
        tables = np.zeros((self.n, self.n, self.d), dtype=np.int64)
        tables[np.arange(self.n), np.arange(self.n)] = self._values
        for index, choice in enumerate(prefix):
            u, v = self.edges[index]
            tables[u, v] = self.candidates[choice]
            self._nodes += 1
            if self.prune and not self._avoids(tables, self._closing[index]):
                return None, self._nodes
        try:
            found = self._extend(tables, len(prefix), stop)
        except _Stopped:
            return None, self._nodes
        return (Labeling(tables) if found else None), self._nodes

    def _extend(self, tables: np.ndarray, index: int, stop) -> bool:
        if index == len(self.edges):
            return self.prune or self._avoids(tables, self._all_cycles)
        u, v = self.edges[index]
        for candidate in self.candidates:
            tables[u, v] = candidate
            self._nodes += 1
            if stop is not None and self._nodes % STOP_CHECK_INTERVAL == 0 and stop.is_set():
                raise _Stopped()
            if self.prune and not self._avoids(tables, self._closing[index]):
                continue
            if self._extend(tables, index + 1, stop):
                return True
        return False

    def _avoids(self, tables: np.ndarray, cycles: Sequence[Tuple[Tuple[int, int], ...]]) -> bool:
        for cycle_edges in cycles:
            composite = self._values
            for u, v in cycle_edges:
                composite = tables[u, v][composite]
            if (composite == self._values).any():
                return False
        return True

    def _run_parallel(self) -> Tuple[Optional[Labeling], int]:
        prefixes = self.partition()
        params = (self.n, self.d, self.label_class.value, self.prune)
        with Manager() as manager:
            stop = manager.Event()
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = [pool.submit(_search_worker, params, prefix, stop) for prefix in prefixes]
                results = [future.result() for future in futures]
        tables = next((t for t, _ in results if t is not None), None)
        witness = Labeling(tables) if tables is not None else None
        return witness, sum(nodes for _, nodes in results)


def _search_worker(params, prefix, stop) -> Tuple[Optional[np.ndarray], int]:
    n, d, label_class, prune = params
    search = ExtremalSearch(n, d, label_class, prune=prune, override=True)
    if stop.is_set():
        return None, 0
    witness, nodes = search.search_subtree(prefix, stop)
    if witness is None:
        return None, nodes
    stop.set()
    return witness.writable_copy(), nodes


def extremal_search(
    n: int,
    d: int,
    label_class: Union[str, LabelClass] = LabelClass.GENERAL,
    prune: bool = True,
    workers: int = 1,
    max_assignments: int = DEFAULT_MAX_ASSIGNMENTS,
    override: bool = False,
) -> SearchReport:
    return ExtremalSearch(n, d, label_class, prune, workers, max_assignments, override).run()
