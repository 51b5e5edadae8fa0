#!/usr/bin/env python3
"""
Tests for the brute-force oracles and the extremal search.
"""

import os
import sys
from math import comb, factorial

import pytest
from hypothesis import given, settings

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src")))

from core.errors import FormatError, FrontierExceeded, OracleLimitExceeded
from core.labeling import Labeling, is_fixed_point_cycle, verify_certificate
from services.constructions import LabelClass, lower_bound_labeling, random_labeling
from services.search import (
    ExtremalSearch,
    SearchReport,
    all_fixed_point_cycles,
    brute_force_cycle,
    candidate_labels,
    extremal_search,
    read_report,
    simple_cycles,
    verify_no_fixed_point,
    write_report,
)
from strategies import labelings


@pytest.mark.parametrize("n", range(1, 7))
def test_simple_cycle_count(n):
    cycles = list(simple_cycles(n))
    assert len(cycles) == sum(comb(n, k) * factorial(k - 1) for k in range(2, n + 1))
    assert len(set(cycles)) == len(cycles)
    assert all(cycle[0] == min(cycle) for cycle in cycles)


def test_simple_cycles_on_three_vertices():
    assert list(simple_cycles(3)) == [(0, 1), (0, 2), (1, 2), (0, 1, 2), (0, 2, 1)]


@settings(max_examples=200, deadline=None)
@given(labelings(max_n=6))
def test_oracles_agree(l):
    certificate = brute_force_cycle(l)
    cycles = all_fixed_point_cycles(l)
    if certificate is None:
        assert cycles == []
    else:
        assert verify_certificate(l, certificate)
        assert certificate.vertices in cycles


def test_oracle_refuses_large_instances():
    with pytest.raises(OracleLimitExceeded):
        brute_force_cycle(Labeling.identity(11, 2))
    with pytest.raises(OracleLimitExceeded):
        all_fixed_point_cycles(Labeling.identity(5, 2), max_n=4)


@pytest.mark.parametrize("d", range(2, 7))
def test_lower_bound_has_no_fixed_point_cycle(d):
    assert verify_no_fixed_point(lower_bound_labeling(d))


def test_candidate_labels():
    assert len(candidate_labels(3, "general")) == 27
    assert len(candidate_labels(3, "permutation")) == 6
    assert [c.tolist() for c in candidate_labels(3, LabelClass.CYCLIC_GROUP)] == [[0, 1, 2], [1, 2, 0], [2, 0, 1]]


def test_search_two_vertices_two_values_finds_witness():
    report = extremal_search(2, 2, "general")
    assert report.exists
    assert verify_no_fixed_point(report.witness)


def test_search_three_vertices_two_values_finds_none():
    search = ExtremalSearch(3, 2, "general")
    assert search.frontier == 4096
    report = search.run()
    assert not report.exists
    assert report.nodes > 0


def test_search_without_pruning_agrees():
    report = extremal_search(3, 2, "general", prune=False)
    assert not report.exists
    report = extremal_search(2, 2, "permutation", prune=False)
    assert report.exists


@pytest.mark.slow
def test_search_cyclic_group_four_vertices_three_values_finds_none():
    report = extremal_search(4, 3, "cyclic_group")
    assert not report.exists


def test_search_three_vertices_three_values_exists():
    report = extremal_search(3, 3, "cyclic_group")
    assert report.exists
    assert verify_no_fixed_point(report.witness)


def test_search_refuses_large_frontier():
    with pytest.raises(FrontierExceeded):
        extremal_search(3, 2, "general", max_assignments=100)
    report = extremal_search(3, 2, "general", max_assignments=100, override=True)
    assert not report.exists


def test_partition_covers_first_edge():
    search = ExtremalSearch(3, 2, "permutation")
    prefixes = search.partition()
    assert prefixes == [(0,), (1,)]
    witnesses = [search.search_subtree(prefix)[0] for prefix in prefixes]
    assert all(w is None for w in witnesses)


def test_parallel_search_agrees():
    report = extremal_search(2, 2, "general", workers=2)
    assert report.exists
    assert verify_no_fixed_point(report.witness)
    report = extremal_search(3, 2, "permutation", workers=2)
    assert not report.exists


def test_report_text_round_trip(tmp_path):
    report = extremal_search(2, 3, "cyclic_group")
    text = report.to_text()
    assert text.startswith("PARAMS n 2 d 3 class cyclic_group\nRESULT exists\n")
    path = tmp_path / "search.txt"
    write_report(path, report)
    loaded = read_report(path)
    assert loaded.exists
    assert loaded.witness == report.witness
    assert (loaded.n, loaded.d, loaded.label_class) == (2, 3, LabelClass.CYCLIC_GROUP)


def test_report_parse_rejects_garbage():
    with pytest.raises(FormatError):
        SearchReport.parse("RESULT none\n")
    with pytest.raises(FormatError):
        SearchReport.parse("PARAMS n 2 d 2 class general\nRESULT maybe\nNODES 1\nTIME_MS 0\n")


def test_random_small_instances_match_oracle():
    for seed in range(20):
        l = random_labeling(5, 3, seed=seed)
        assert (brute_force_cycle(l) is None) == (all_fixed_point_cycles(l) == [])


def witnesses():
    yield lower_bound_labeling(5)
    for n, d, label_class in ((2, 2, "general"), (3, 3, "cyclic_group"), (3, 3, "permutation")):
        report = extremal_search(n, d, label_class)
        if report.exists:
            yield report.witness


def test_witness_restrictions_stay_fixed_point_free():
    checked = 0
    for witness in witnesses():
        assert verify_no_fixed_point(witness)
        for dropped in range(witness.n):
            kept = [v for v in range(witness.n) if v != dropped]
            assert verify_no_fixed_point(witness.induced(kept))
            checked += 1
    assert checked >= 10


@pytest.mark.slow
def test_pruning_does_not_change_cyclic_group_outcome():
    pruned = extremal_search(4, 3, "cyclic_group", prune=True)
    exhaustive = extremal_search(4, 3, "cyclic_group", prune=False)
    assert pruned.exists == exhaustive.exists
    assert not exhaustive.exists


@pytest.mark.parametrize("d", range(2, 7))
def test_lower_bound_cycles_use_between_one_and_d_minus_one_back_edges(d):
    l = lower_bound_labeling(d)
    for cycle in simple_cycles(d):
        k = len(cycle)
        back = sum(cycle[i] > cycle[(i + 1) % k] for i in range(k))
        assert 1 <= back <= d - 1
        assert is_fixed_point_cycle(l, cycle) is None
