"""Seeded permutation samplers for building reordered parity benchmarks.

A permutation of [n] is a tuple ``p`` with ``p[i-1] = sigma(i)``.
All samplers draw from a ``random.Random`` (Mersenne Twister), which is
stable across platforms and Python versions for the calls used here.
"""

from __future__ import annotations

import math
import random
from typing import Sequence

from .errors import EmptyDomain, InvalidParameter

RNG_VERSION = "py-mt19937-v1"


def make_rng(seed) -> random.Random:
    return random.Random(seed)


def identity(n: int) -> tuple:
    return tuple(range(1, n + 1))


def is_permutation(p: Sequence[int]) -> bool:
    return sorted(p) == list(range(1, len(p) + 1))


def inverse(p: Sequence[int]) -> tuple:
    inv = [0] * len(p)
    for i, v in enumerate(p, start=1):
        inv[v - 1] = i
    return tuple(inv)


def uniform_permutation(n: int, rng: random.Random) -> tuple:
    if n < 1:
        raise EmptyDomain("n must be at least 1")
    p = list(range(1, n + 1))
    rng.shuffle(p)
    return tuple(p)


def _insertion_offset(i: int, q: float, rng: random.Random) -> int:
    # P(j) = q^j (1-q) / (1-q^i) for j in 0..i-1; uniform when q == 1
    if q == 1.0:
        return rng.randrange(i)
    u = rng.random()
    j = int(math.floor(math.log1p(-u * (1.0 - q ** i)) / math.log(q)))
    return min(max(j, 0), i - 1)


def mallows_process(n: int, q: float, rng: random.Random) -> tuple:
    """q-Mallows insertion process.

    Element i (i = 1..n) is inserted at offset j from the end of the current
    sequence with probability proportional to q^j, creating exactly j new
    inversions.
    """
    if not 0.0 < q <= 1.0:
        raise InvalidParameter(f"q must lie in (0, 1], got {q}")
    if n < 1:
        raise EmptyDomain("n must be at least 1")
    seq = []
    for i in range(1, n + 1):
        j = _insertion_offset(i, q, rng)
        seq.insert(len(seq) - j, i)
    return tuple(seq)


def adjacent_swaps(n: int, num_swaps: int, rng: random.Random) -> tuple:
    if num_swaps < 0:
        raise InvalidParameter("num_swaps must be non-negative")
    if n < 1:
        raise EmptyDomain("n must be at least 1")
    p = list(range(1, n + 1))
    if n == 1:
        return tuple(p)
    for _ in range(num_swaps):
        i = rng.randrange(n - 1)
        p[i], p[i + 1] = p[i + 1], p[i]
    return tuple(p)


def max_displacement(p: Sequence[int]) -> int:
    return max((abs(v - i) for i, v in enumerate(p, start=1)), default=0)


def bounded_displacement(n: int, max_disp: int, rng: random.Random) -> tuple:
    """Random adjacent swaps until some element first sits max_disp away."""
    if max_disp < 1:
        raise InvalidParameter("max_disp must be at least 1")
    if max_disp >= n:
        raise InvalidParameter(f"displacement {max_disp} unreachable for n={n}")
    p = list(range(1, n + 1))
    while True:
        i = rng.randrange(n - 1)
        p[i], p[i + 1] = p[i + 1], p[i]
        # only the two swapped entries changed displacement
        if abs(p[i] - (i + 1)) >= max_disp or abs(p[i + 1] - (i + 2)) >= max_disp:
            return tuple(p)


def inversions(p: Sequence[int]) -> int:
    """Number of pairs i < j with p[i] > p[j] (merge-sort count)."""
    def sort_count(a):
        if len(a) <= 1:
            return a, 0
        mid = len(a) // 2
        left, x = sort_count(a[:mid])
        right, y = sort_count(a[mid:])
        merged, count = [], x + y
        i = j = 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                merged.append(right[j])
                count += len(left) - i
                j += 1
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, count

    return sort_count(list(p))[1]
