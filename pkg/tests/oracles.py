"""Independent reference implementations used to freeze expected values.

Nothing here imports the package under test. Sets are plain frozensets of
1-based ints, weights are Fractions, and every routine is written the slow
obvious way so disagreement points at the fast implementation.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations


def oracle_norm(sets, weights, member_filter):
    """Sum of weights over members passing the filter, as an exact Fraction."""
    total = Fraction(0)
    for s, w in zip(sets, weights):
        if member_filter(s):
            total += Fraction(w)
    return total


def oracle_gamma(n, sets, weights, b):
    """All-subsets spread check.

    Walks every nonempty subset S of {1..n} in lex order of sorted tuples and
    tests ||F[S]|| * b^|S| < ||F|| exactly (b taken at its exact binary
    value). Returns (holds, witness_elements_or_None, worst_ratio).
    """
    sets = [frozenset(s) for s in sets]
    weights = [Fraction(w) for w in weights]
    bf = Fraction(b)
    total = oracle_norm(sets, weights, lambda s: True)
    if total <= 0:
        raise ValueError("oracle needs positive total norm")
    subsets = []
    for size in range(1, n + 1):
        for comb in combinations(range(1, n + 1), size):
            subsets.append(comb)
    subsets.sort()
    worst = None
    for comb in subsets:
        s = frozenset(comb)
        link = oracle_norm(sets, weights, lambda u: s <= u)
        ratio = link * bf ** len(s) / total
        if worst is None or ratio > worst:
            worst = ratio
        if ratio >= 1:
            return False, tuple(comb), float(ratio)
    return True, None, float(worst)


def oracle_sunflower_exists(sets, k):
    """Exhaustive scan over k-subsets for a common pairwise intersection."""
    sets = [frozenset(s) for s in sets]
    for combo in combinations(sets, k):
        inters = {a & b for a, b in combinations(combo, 2)}
        if len(inters) == 1:
            return True
    return False


def check_sunflower(petals, core):
    """Direct certificate check used against reported sunflowers."""
    petals = [frozenset(p) for p in petals]
    core = frozenset(core)
    if len(set(petals)) != len(petals) or len(petals) < 2:
        return False
    return all(a & b == core for a, b in combinations(petals, 2))


def oracle_extension(n, sets, l):
    """All l-subsets of {1..n} containing at least one member."""
    sets = [frozenset(s) for s in sets]
    out = []
    for comb in combinations(range(1, n + 1), l):
        y = frozenset(comb)
        if any(s <= y for s in sets):
            out.append(tuple(comb))
    return out


def oracle_partitions(n, num_strips):
    """All unordered partitions of {1..n} into equal strips.

    Recursive: the smallest unassigned element starts a strip. Independent
    of the package's enumerator even though the idea is the same; kept as a
    cross-check on both counting and membership.
    """
    size = n // num_strips
    if size * num_strips != n:
        raise ValueError("strips must divide n")

    def rec(pool):
        if not pool:
            yield []
            return
        head = pool[0]
        rest = pool[1:]
        for mates in combinations(rest, size - 1):
            strip = frozenset((head,) + mates)
            remaining = tuple(e for e in rest if e not in strip)
            for tail in rec(remaining):
                yield [strip] + tail

    yield from rec(tuple(range(1, n + 1)))


def oracle_on_split_count(sets, strips):
    """Members meeting every strip exactly once."""
    sets = [frozenset(s) for s in sets]
    cnt = 0
    for s in sets:
        if all(len(s & strip) == 1 for strip in strips):
            cnt += 1
    return cnt


def oracle_split_mean(n, m, sets):
    """Exact average on-split count over all unordered splits."""
    counts = [oracle_on_split_count(sets, parts) for parts in oracle_partitions(n, m)]
    return Fraction(sum(counts), len(counts))


def oracle_sparsity(n, m, num_sets):
    if num_sets == 0:
        return math.inf
    return math.log(math.comb(n, m)) - math.log(num_sets)
