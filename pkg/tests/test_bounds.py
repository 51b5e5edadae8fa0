#!/usr/bin/env python3
"""
Tests for the bound and threshold arithmetic.
"""

import os
import sys

import pytest

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src")))

from core.errors import LabelingError
from services.bounds import (
    bound,
    ceil_log2,
    cubic_bound,
    cubic_threshold,
    permutation_bound,
    permutation_threshold,
    recursion_threshold,
    win_win_path_limit,
    win_win_threshold,
)


@pytest.mark.parametrize("d, expected", [(1, 1), (2, 2), (3, 3), (4, 52), (5, 105)])
def test_small_bounds(d, expected):
    assert bound(d) == expected


def test_cubic_branch_still_wins_at_two_to_the_twenty():
    d = 2**20
    assert bound(d) == d**3 - d**2 + d


def test_polylog_branch_at_two_to_the_sixty_four():
    assert bound(2**64) == 2**168


def test_bound_is_monotone_and_at_least_d():
    values = [bound(d) for d in range(1, 2**10 + 1)]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert all(value >= d for d, value in enumerate(values, 1))


def test_bound_rejects_empty_domain():
    with pytest.raises(LabelingError):
        bound(0)
    with pytest.raises(LabelingError):
        permutation_bound(0)


def test_permutation_bound():
    assert permutation_bound(1) == 1
    assert [permutation_bound(d) for d in range(2, 6)] == [2, 4, 6, 8]
    assert permutation_threshold(5) == 9


def test_thresholds():
    assert cubic_bound(3) == 21
    assert cubic_threshold(2) == 7
    assert cubic_threshold(3) == 22
    assert win_win_threshold(4, 4) == 22
    assert win_win_threshold(8, 2) == 4 * 8 * 16 + 8 + 2
    assert win_win_path_limit(8, 3) == 14
    assert recursion_threshold(4) == 296


def test_ceil_log2():
    assert [ceil_log2(x) for x in (1, 2, 3, 4, 5, 1024, 1025)] == [0, 1, 2, 2, 3, 10, 11]
    with pytest.raises(ValueError):
        ceil_log2(0)
