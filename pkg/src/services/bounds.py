"""
Proven upper bounds on the largest fixed-point-free vertex counts, and the
vertex thresholds at which each solver's guarantee applies.

All arithmetic is exact integer arithmetic; where a real-valued bound is
rounded, it is rounded up so the result stays a valid upper bound.
"""

from math import isqrt

from core.errors import LabelingError


def ceil_log2(x: int) -> int:
    """Smallest e with 2**e >= x, for x >= 1."""
    if x < 1:
        raise ValueError(f"ceil_log2 needs x >= 1, got {x}")
    return (x - 1).bit_length()


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def cubic_bound(d: int) -> int:
    return d**3 - d**2 + d


def cubic_threshold(d: int) -> int:
    """Vertex count from which the cubic solver always succeeds."""
    return cubic_bound(d) + 1


def polylog_bound(d: int) -> int:
    """16 d^2 2^((log2 log2 d)^2), with the exponent rounded up to (ceil log2 ceil log2 d)^2."""
    exponent = ceil_log2(ceil_log2(d)) ** 2
    return 16 * d * d * 2**exponent


def bound(d: int) -> int:
    """
    A proven upper bound B(d) on the largest fixed-point-free vertex count for
    general function labels.

    Args:
        d: Value-domain size, d >= 1

    Returns:
        d for d <= 3, otherwise min(d^3 - d^2 + d, 16 d^2 2^((log2 log2 d)^2))
    """
    if d < 1:
        raise LabelingError(f"bound needs d >= 1, got {d}")
    if d <= 3:
        return d
    return min(cubic_bound(d), polylog_bound(d))


def permutation_bound(d: int) -> int:
    """Upper bound for permutation labels: 2d - 2 for d >= 2."""
    if d < 1:
        raise LabelingError(f"bound needs d >= 1, got {d}")
    return 1 if d == 1 else 2 * d - 2


def permutation_threshold(d: int) -> int:
    return permutation_bound(d) + 1


def win_win_threshold(d: int, k: int) -> int:
    """Vertex count from which the paths-or-cycle step is guaranteed for a k-compressed vertex."""
    m = ceil_div(d, k)
    return 4 * d * m * m + 2 * m + 2


def win_win_path_limit(d: int, k: int) -> int:
    """Most vertices either compression path may use."""
    return 4 * ceil_div(d, k) + 2


def recursion_threshold(d: int) -> int:
    """5 d^2 + 9 d log2(d) (B(floor(sqrt d)) + 1), with log2 rounded up."""
    return 5 * d * d + 9 * d * ceil_log2(d) * (bound(isqrt(d)) + 1)


# Below this d the recursive solver has no guarantee.
RECURSION_GUARANTEE_MIN_D = 2**9
