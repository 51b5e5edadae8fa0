#!/usr/bin/env python3
"""
Tests for shifting and the permutation solver.
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src")))

from core.errors import LabelingError
from core.labeling import Labeling, certify, compose_path, verify_certificate
from core.results import SolveStatus
from services.constructions import lower_bound_labeling, make_rng, random_labeling
from services.perm_solver import (
    PermutationSolver,
    find_cycle_permutation,
    find_identity_composite_cycle,
    restrict_to_complement,
    shift_at,
    unshift_certificate,
)
from services.search import simple_cycles
from strategies import labelings


def composites(l: Labeling, head: int):
    """Composite of every simple cycle, read from its first vertex other than head."""
    table = {}
    for cycle in simple_cycles(l.n):
        if cycle[0] == head:
            cycle = cycle[1:] + cycle[:1]
        table[cycle] = compose_path(l, cycle + (cycle[0],)).table
    return table


def test_shift_makes_edge_identity():
    l = random_labeling(5, 4, seed=1, label_class="permutation")
    shifted, record = shift_at(l, 3, 1)
    assert shifted.tables[3, 1].tolist() == [0, 1, 2, 3]
    assert record.edge == (3, 1)
    assert record.undo(shifted) == l


def test_shift_only_touches_edges_at_head():
    l = random_labeling(5, 3, seed=2, label_class="permutation")
    shifted, _ = shift_at(l, 0, 2)
    for u, v in l.edges():
        if 2 not in (u, v):
            assert np.array_equal(shifted.tables[u, v], l.tables[u, v])


def test_shift_requires_permutations():
    with pytest.raises(LabelingError):
        shift_at(Labeling(np.zeros((3, 3, 3), dtype=np.int64)), 0, 1)
    with pytest.raises(LabelingError):
        shift_at(Labeling.identity(3, 2), 1, 1)


@pytest.mark.slow
def test_shifting_preserves_cycle_composites():
    for seed in range(100):
        l = random_labeling(5, 4, seed=seed, label_class="permutation")
        rng = make_rng(10_000 + seed)
        current = l
        for _ in range(10):
            u, v = (int(x) for x in rng.choice(5, size=2, replace=False))
            shifted, _ = shift_at(current, u, v)
            assert composites(shifted, v) == composites(current, v)
            current = shifted


@settings(max_examples=100, deadline=None)
@given(labelings(min_n=3, max_n=5, min_d=2, max_d=4, permutation=True), st.data())
def test_unshift_carries_certificates_back(l, data):
    records = []
    current = l
    for _ in range(data.draw(st.integers(1, 4))):
        u, v = data.draw(st.permutations(range(l.n)))[:2]
        current, record = shift_at(current, u, v)
        records.append(record)
    for cycle in simple_cycles(l.n):
        certificate = certify(current, cycle)
        assert (certificate is None) == (certify(l, cycle) is None)
        if certificate is not None:
            assert verify_certificate(l, unshift_certificate(certificate, records))


def test_restrict_to_complement():
    # values {0, 1} and {2} are closed on every edge
    tables = np.zeros((3, 3, 3), dtype=np.int64)
    tables[:, :] = (1, 0, 2)
    l = Labeling(tables)
    restricted, vertex_map, value_map = restrict_to_complement(l, [2, 0], [1, 0])
    assert vertex_map == (0, 2)
    assert value_map == (0, 1)
    assert restricted.tables[0, 1].tolist() == [1, 0]
    with pytest.raises(LabelingError, match="outside the value block"):
        restrict_to_complement(l, [0, 1], [0, 2])


def test_two_values_settled_on_three_vertices():
    # every 2-cycle composes to the swap, so only a triangle can close
    l = Labeling.from_function(3, 2, lambda u, v: [0, 1] if u < v else [1, 0])
    result = find_cycle_permutation(l)
    assert result.found
    assert result.certificate.length == 3
    assert verify_certificate(l, result.certificate)


def test_one_value_uses_a_two_cycle():
    result = find_cycle_permutation(Labeling.identity(2, 1))
    assert result.certificate.vertices == (0, 1)


def test_identity_labeling_gives_two_cycle():
    result = find_cycle_permutation(Labeling.identity(3, 2))
    assert result.found
    assert result.certificate.length == 2


@pytest.mark.parametrize("d", range(2, 6))
def test_lower_bound_is_below_threshold(d):
    result = find_cycle_permutation(lower_bound_labeling(d))
    assert not result.found
    assert result.status is SolveStatus.BELOW_THRESHOLD


def test_solver_rejects_general_labels():
    with pytest.raises(LabelingError):
        PermutationSolver().solve(Labeling(np.zeros((3, 3, 2), dtype=np.int64)))


@pytest.mark.slow
@pytest.mark.parametrize("d", range(2, 9))
def test_permutation_guarantee_on_2d_minus_1_vertices(d):
    n = 2 * d - 1
    for seed in range(200):
        l = random_labeling(n, d, seed=seed, label_class="permutation")
        result = find_cycle_permutation(l)
        assert result.found, f"seed {seed}: {result.detail}"
        assert verify_certificate(l, result.certificate)
        assert result.stats["chain_length"] <= d


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_permutation_guarantee_property(d, seed):
    l = random_labeling(2 * d - 1, d, seed=seed, label_class="permutation")
    result = find_cycle_permutation(l)
    assert verify_certificate(l, result.certificate)


@pytest.mark.parametrize("seed", range(5))
def test_identity_composite_cycle(seed):
    l = random_labeling(11, 3, seed=seed, label_class="permutation")
    result = find_identity_composite_cycle(l)
    assert result.found
    c = result.certificate
    assert verify_certificate(l, c)
    assert compose_path(l, c.vertices + (c.vertices[0],)).is_identity
