"""
Service for general function labels with large d.

The paths-or-cycle step either finds a fixed-point cycle or two short paths
that let a compressed vertex be compressed further. The recursive solver
applies it to a small set of target vertices until every target has an
imageset of size at most floor(sqrt(d)), then solves the targets on that
smaller value domain and carries the cycle back.
"""

import logging
from math import isqrt
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from core.errors import InvariantViolation, LabelingError
from core.labeling import (
    CycleCertificate,
    Labeling,
    ValuedWalk,
    certify,
    imageset,
    lift_certificate,
    verify_certificate,
)
from core.results import SolverResult, SolveStatus
from services.bounds import (
    RECURSION_GUARANTEE_MIN_D,
    bound,
    ceil_div,
    recursion_threshold,
    win_win_path_limit,
    win_win_threshold,
)
from services.compression import CompressionState, PathPair, restrict_fully_compressed
from services.cubic_solver import CubicSolver
from services.search import DEFAULT_ORACLE_MAX_N, brute_force_cycle

logger = logging.getLogger(__name__)

Step = Tuple[int, int]


def _reroute(
    l: Labeling,
    steps: Sequence[Step],
    center: int,
    keep: Set[int],
    designated: Sequence[int],
    pool: Sequence[int],
    arrives: np.ndarray,
) -> Optional[List[Step]]:
    """Replace every visit to center outside keep by a fresh router for the same step, or None if one runs out."""
    index_of = {v: i for i, v in enumerate(designated)}
    used: Set[int] = set()
    rerouted = list(steps)
    for p, (v, _) in enumerate(steps):
        if v != center or p in keep:
            continue
        (before, x), (_, y) = steps[p - 1], steps[p + 1]
        i = index_of[before]
        router = next(
            (pool[t] for t in np.flatnonzero(arrives[i, :, x] == y) if pool[t] != center and pool[t] not in used),
            None,
        )
        if router is None:
            return None
        used.add(router)
        rerouted[p] = (router, int(l.tables[before, router, x]))
    return rerouted


def find_paths_or_cycle(
    l: Labeling,
    w: int,
    k: Optional[int] = None,
    start_values: Optional[Iterable[int]] = None,
    enforce_threshold: bool = True,
) -> Optional[Union[CycleCertificate, PathPair]]:
    """
    Find a fixed-point cycle, or two paths from w that converge on the same value.

    Walks start at the q = 2 ceil(d/k) + 1 lowest vertices other than w, one
    per start value, and step through them in order, detouring through a
    center c whenever c is valid for the step (it routes it and at least q - 1
    routers do). The first repeated (vertex, value) pair decides the outcome:
    across two walks it yields a PathPair, inside one walk a cycle through c.

    Args:
        l: The labeling
        w: The compressed vertex
        k: Optional compression level of w, only checked against the start values. The
            walks always run at level len(start values); im(w) is a subset of the start
            values, so w is compressed to that level and the path bound uses it.
        start_values: Values the walks start from, a superset of im(w); defaults to im(w)
        enforce_threshold: Raise when n is below the guarantee; otherwise run best-effort

    Returns:
        A verified CycleCertificate, a PathPair whose paths have at most 4 ceil(d/k) + 2
        vertices, or None when a best-effort run finds neither

    Raises:
        LabelingError: If w is not k-compressed, or n is below the guarantee and enforce_threshold is set
        InvariantViolation: If the counting argument fails above the guarantee
    """
    l.check_vertex(w)
    if l.n < 2:
        raise LabelingError("paths-or-cycle needs at least two vertices")
    image = imageset(l, w)
    values = sorted(image) if start_values is None else sorted({l.check_value(int(x)) for x in start_values})
    if not image <= set(values):
        raise LabelingError(f"start values must contain im({w + 1})")
    if k is not None and len(values) > k:
        raise LabelingError(f"vertex {w + 1} has {len(values)} start values; it is not {k}-compressed")
    others = [v for v in range(l.n) if v != w]

    if len(values) == 1:
        certificate = certify(l, (w, others[0]))
        if certificate is None:
            raise InvariantViolation(f"1-compressed vertex {w + 1} gave no fixed-point 2-cycle")
        return certificate

    d, k = l.d, len(values)
    q = 2 * ceil_div(d, k) + 1
    threshold = win_win_threshold(d, k)
    guaranteed = l.n >= threshold
    if not guaranteed and enforce_threshold:
        raise LabelingError(f"paths-or-cycle needs n >= {threshold} for d={d}, k={k}; got n={l.n}")
    if len(others) < q + 1:
        return None

    designated, pool = others[:q], others[q:]
    rows = np.arange(len(pool))[:, None]
    arrives = np.stack(
        [l.tables[pool, designated[i + 1]][rows, l.tables[designated[i], pool]] for i in range(q - 1)]
    )
    steps_index = np.broadcast_to(np.arange(q - 1)[:, None, None], arrives.shape)
    value_index = np.broadcast_to(np.arange(d)[None, None, :], arrives.shape)
    counts = np.zeros((q - 1, d, d), dtype=np.int64)
    np.add.at(counts, (steps_index, value_index, arrives), 1)
    valid = counts[steps_index, value_index, arrives] >= q - 1
    invalid = (~valid).sum(axis=(0, 2))

    eligible = np.flatnonzero(invalid < d)
    if not eligible.size:
        if guaranteed:
            raise InvariantViolation(f"no center with fewer than {d} invalid steps among {len(pool)} vertices")
        return None
    ci = int(eligible[0])
    center = pool[ci]

    walks: List[List[Step]] = []
    for i in values:
        steps: List[Step] = [(designated[0], int(l.tables[w, designated[0], i]))]
        for j in range(1, q):
            before, x = designated[j - 1], steps[-1][1]
            if valid[j - 1, ci, x]:
                y = int(l.tables[before, center, x])
                steps.append((center, y))
                steps.append((designated[j], int(l.tables[center, designated[j], y])))
            else:
                steps.append((designated[j], int(l.tables[before, designated[j], x])))
        if len(steps) > 2 * q - 1:
            raise InvariantViolation(f"walk has {len(steps)} vertices, more than {2 * q - 1}")
        walks.append(steps)

    seen: Dict[Step, Tuple[int, int]] = {}
    for a, steps in enumerate(walks):
        for p, pair in enumerate(steps):
            if pair not in seen:
                seen[pair] = (a, p)
                continue
            b, r = seen[pair]
            if b == a:
                return _close_cycle(l, steps[r : p + 1], center, designated, pool, arrives, guaranteed)
            return _pair_paths(
                l, w, (values[b], walks[b][: r + 1]), (values[a], steps[: p + 1]), center, designated, pool, arrives, guaranteed
            )

    if guaranteed:
        raise InvariantViolation("no vertex-value pair repeats across the walks")
    return None


def _pair_paths(l, w, first, second, center, designated, pool, arrives, guaranteed) -> Optional[PathPair]:
    q = len(designated)
    paths = []
    for start, steps in (first, second):
        last = len(steps) - 1
        if steps[last][0] == center:
            keep = {last}
        else:
            keep = {p for p, (v, _) in enumerate(steps) if v == center}
            keep = {min(keep)} if keep else set()
        rerouted = _reroute(l, steps, center, keep, designated, pool, arrives)
        if rerouted is None:
            if guaranteed:
                raise InvariantViolation("ran out of valid routers while shortening a walk")
            return None
        path = ValuedWalk(((w, start),) + tuple(rerouted))
        if not path.is_path or len(path) > 2 * q:
            raise InvariantViolation(f"compression path on {len(path)} vertices is not a simple path of at most {2 * q}")
        paths.append(path)
    endpoint, value = paths[0].end
    pair = PathPair(endpoint, first[0], second[0], value, paths[0], paths[1])
    logger.debug(
        f"Paths from <{w + 1},{pair.i1 + 1}> and <{w + 1},{pair.i2 + 1}> meet at <{endpoint + 1},{value + 1}> "
        f"({len(paths[0])} and {len(paths[1])} vertices)"
    )
    return pair


def _close_cycle(l, steps, center, designated, pool, arrives, guaranteed) -> Optional[CycleCertificate]:
    rerouted = _reroute(l, steps, center, {0, len(steps) - 1}, designated, pool, arrives)
    if rerouted is None:
        if guaranteed:
            raise InvariantViolation("ran out of valid routers while closing a walk")
        return None
    certificate = CycleCertificate(tuple(v for v, _ in rerouted[:-1]), rerouted[0][1], tuple(x for _, x in rerouted))
    check = verify_certificate(l, certificate)
    if not check:
        raise InvariantViolation(f"closed walk is not a fixed-point cycle: {check.reason}")
    logger.debug(f"Walk revisits <{center + 1},{rerouted[0][1] + 1}>; cycle on {certificate.length} vertices")
    return certificate


class RecursiveSolver:
    """
    Compress targets, then recurse on a smaller value domain.

    Targets are the bound(floor(sqrt d)) + 1 lowest vertices, everything else
    is spare. Each round either ends with a cycle or lowers the level of one
    target; when no round is possible the run stops with a status instead of
    looping. Small instances go to the brute-force oracle, d <= 3 to the
    cubic solver. For d <= 3 the oracle limit is raised to bound(d) + 1, so a
    fully compressed restriction is always solved exhaustively.
    """

    def __init__(self, oracle_max_n: int = DEFAULT_ORACLE_MAX_N):
        """
        Initialize the solver.

        Args:
            oracle_max_n: Instances up to this many vertices are solved exhaustively
        """
        self.oracle_max_n = oracle_max_n

    def solve(self, l: Labeling) -> SolverResult:
        stats = {"compressions": 0, "win_win_calls": 0, "depth": 0}
        guaranteed = l.d >= RECURSION_GUARANTEE_MIN_D and l.n >= recursion_threshold(l.d)
        certificate, status, detail = self._solve(l, 0, stats)

        if certificate is None:
            if guaranteed:
                raise InvariantViolation(f"recursive solver ended with {status.value} inside its guarantee: {detail}")
            logger.info(f"Recursive solver ended with {status.value}: {detail}")
            return SolverResult.failure(status, detail, **stats)

        check = verify_certificate(l, certificate)
        if not check:
            raise InvariantViolation(f"recursive solver produced an invalid certificate: {check.reason}")
        logger.info(
            f"Found fixed-point cycle on {certificate.length} vertices after {stats['compressions']} compressions"
        )
        return SolverResult.success(certificate, **stats)

    def _solve(
        self, l: Labeling, depth: int, stats: Dict[str, int]
    ) -> Tuple[Optional[CycleCertificate], SolveStatus, str]:
        stats["depth"] = max(stats["depth"], depth)
        if l.n < 2:
            return None, SolveStatus.BELOW_THRESHOLD, "need at least two vertices"
        exhaustive_max_n = self.oracle_max_n
        if l.d <= 3:
            # bound(d) = d here, so bound(d) + 1 vertices always carry a cycle and the search stays tiny
            exhaustive_max_n = max(exhaustive_max_n, bound(l.d) + 1)
        if l.n <= exhaustive_max_n:
            certificate = brute_force_cycle(l, exhaustive_max_n)
            if certificate is None:
                return None, SolveStatus.NOT_FOUND, f"no fixed-point cycle on n={l.n} (exhaustive)"
            return certificate, SolveStatus.FOUND, ""
        if l.d <= 3:
            result = CubicSolver().solve(l)
            return result.certificate, result.status, result.detail
        return self._compress_and_recurse(l, depth, stats)

    def _compress_and_recurse(
        self, l: Labeling, depth: int, stats: Dict[str, int]
    ) -> Tuple[Optional[CycleCertificate], SolveStatus, str]:
        d = l.d
        r = isqrt(d)
        size = bound(r) + 1
        if l.n < size + 2:
            return None, SolveStatus.BELOW_THRESHOLD, f"need more than {size + 1} vertices for d={d}, got {l.n}"
        state = CompressionState(l, range(size), range(size, l.n))
        logger.debug(f"Depth {depth}: compressing {size} targets to level {r} with {l.n - size} spares")

        while True:
            current = state.labeling
            for t in state.targets:
                if state.level(t) == 1:
                    partner = next(v for v in range(current.n) if v != t)
                    certificate = certify(current, (t, partner))
                    if certificate is None:
                        raise InvariantViolation(f"1-compressed vertex {t + 1} gave no fixed-point 2-cycle")
                    return state.unwind(certificate), SolveStatus.FOUND, ""

            pending = [t for t in state.targets if state.level(t) > r]
            if not pending:
                break
            w = pending[0]
            if not state.spares:
                return None, SolveStatus.STALLED, f"spares exhausted after {state.depth} compressions"
            values = imageset(current, w)
            vertices = [w] + state.spares
            stats["win_win_calls"] += 1
            outcome = find_paths_or_cycle(current.induced(vertices), 0, start_values=values, enforce_threshold=False)

            if outcome is None:
                needed = win_win_threshold(d, len(values))
                detail = (
                    f"paths-or-cycle step stalled at level {len(values)} with {len(vertices)} vertices "
                    f"(guarantee needs {needed})"
                )
                return None, SolveStatus.STALLED, detail
            if isinstance(outcome, CycleCertificate):
                certificate = CycleCertificate(
                    tuple(vertices[v] for v in outcome.vertices), outcome.fixed_value, outcome.trace
                )
                return state.unwind(certificate), SolveStatus.FOUND, ""

            if max(len(outcome.first), len(outcome.second)) > win_win_path_limit(d, len(values)):
                raise InvariantViolation("compression path exceeds its length bound")
            state.compress(outcome.relabel(vertices))
            stats["compressions"] += 1

        restricted, vertex_map, value_maps = restrict_fully_compressed(state.labeling, state.targets, r)
        sub_certificate, status, detail = self._solve(restricted, depth + 1, stats)
        if sub_certificate is None:
            if status is SolveStatus.NOT_FOUND:
                status = SolveStatus.STALLED
                detail = f"restriction of {len(state.targets)} targets to d'={r} has no fixed-point cycle"
            return None, status, detail

        lifted = lift_certificate(sub_certificate, vertex_map, value_maps)
        check = verify_certificate(state.labeling, lifted)
        if not check:
            raise InvariantViolation(f"lifted certificate fails on the compressed labeling: {check.reason}")
        return state.unwind(lifted), SolveStatus.FOUND, ""


def find_cycle_recursive(l: Labeling, oracle_max_n: int = DEFAULT_ORACLE_MAX_N) -> SolverResult:
    return RecursiveSolver(oracle_max_n).solve(l)
