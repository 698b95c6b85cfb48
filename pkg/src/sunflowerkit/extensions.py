"""l-extensions of a family and the sparsity inequalities they satisfy.

The l-extension of an m-uniform family F is the (unweighted) family of all
l-sets on the same ground set that contain at least one member of F.
Extension never increases sparsity (log C(n, l) - log of the family size),
and for the complements there is a doubling bound at l = 2m:

    kappa(all 2m-sets minus Ext(F, 2m)) >= 2 * kappa(all m-sets minus F)

both read in the extended reals. `check_kappa_monotone` and `check_phase2`
decide these inequalities in exact integer arithmetic (they cross-multiply
instead of comparing logs) while reporting float values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from .bitsets import full_mask, iter_bits
from .family import SetFamily, sparsity

_NUMPY_CLOSURE_MIN = 2048


def log_ratio(total: int, count: int) -> float:
    """ln(total / count) with count = 0 mapped to +inf."""
    if count == 0:
        return math.inf
    return math.log(total) - math.log(count)


@dataclass(frozen=True)
class ExtensionResult:
    family: SetFamily  # l-uniform, unit weights
    source_m: int
    l: int
    kappa_steps: tuple[tuple[int, float], ...] = ()  # (size, kappa) trail

    def __len__(self) -> int:
        return len(self.family)


def _closure_python(masks: Iterable[int], n: int, steps: int) -> set[int]:
    frontier = set(masks)
    universe = full_mask(n)
    for _ in range(steps):
        nxt = set()
        for t in frontier:
            for b in iter_bits(universe & ~t):
                nxt.add(t | b)
        frontier = nxt
    return frontier


def _closure_numpy(masks: Iterable[int], n: int, steps: int) -> set[int]:
    bits = np.array([1 << i for i in range(n)], dtype=np.uint64)
    frontier = np.unique(np.fromiter(masks, dtype=np.uint64))
    size = int(np.bitwise_count(frontier[0])) if frontier.size else 0
    for _ in range(steps):
        cand = np.unique((frontier[:, None] | bits[None, :]).ravel())
        size += 1
        frontier = cand[np.bitwise_count(cand) == size]
    return {int(v) for v in frontier}


def extend(family: SetFamily, l: int, strategy: str = "auto") -> ExtensionResult:
    """All l-sets containing at least one member (unit weights).

    strategy: 'closure' grows members one element at a time with
    deduplication; 'filter' scans all C(n, l) sets; 'auto' picks by a cost
    estimate. Both produce identical families.
    """
    n, m = family.ground.n, family.m
    if l < m:
        raise ValueError(f"extension size l={l} below member size m={m}")
    if l > n:
        raise ValueError(f"extension size l={l} exceeds ground set size n={n}")
    if len(family) == 0 or l == m:
        fam = SetFamily(family.ground, l, family.masks, None)
        return ExtensionResult(fam, m, l)

    if strategy == "auto":
        closure_cost = len(family) * math.comb(n - m, l - m)
        strategy = "closure" if closure_cost <= 2 * math.comb(n, l) else "filter"
    if strategy == "closure":
        steps = l - m
        if n <= 63 and len(family) >= _NUMPY_CLOSURE_MIN:
            masks = _closure_numpy(family.masks, n, steps)
        else:
            masks = _closure_python(family.masks, n, steps)
    elif strategy == "filter":
        members = family.masks
        masks = set()
        for combo in combinations(range(n), l):
            y = 0
            for i in combo:
                y |= 1 << i
            if any(y & u == u for u in members):
                masks.add(y)
    else:
        raise ValueError(f"unknown extension strategy {strategy!r}")
    return ExtensionResult(SetFamily(family.ground, l, tuple(masks), None), m, l)


def iterated_extend(family: SetFamily, target_l: int) -> ExtensionResult:
    """Extend m -> 2m -> 4m -> ... capped at target_l, padding the last step.

    Equals extend(family, target_l); the kappa_steps trail records the
    sparsity after each hop (never increasing).
    """
    m = family.m
    if target_l < m:
        raise ValueError(f"target size {target_l} below member size {m}")
    steps = [(m, sparsity(family))]
    cur = family
    while cur.m < target_l:
        nxt_l = min(cur.m * 2, target_l) if cur.m > 0 else target_l
        cur = extend(cur, nxt_l).family
        steps.append((nxt_l, sparsity(cur)))
    return ExtensionResult(cur, m, target_l, tuple(steps))


@dataclass(frozen=True)
class KappaCheck:
    holds: bool
    kappa_source: float
    kappa_extension: float
    extension_size: int


def check_kappa_monotone(family: SetFamily, l: int) -> KappaCheck:
    """Decide kappa(Ext(F, l)) <= kappa(F) exactly; F must be nonempty."""
    if len(family) == 0:
        raise ValueError("kappa comparison needs a nonempty family")
    n, m = family.ground.n, family.m
    ext = extend(family, l).family
    # ln(C(n,l)/|Ext|) <= ln(C(n,m)/|F|)  <=>  C(n,l)*|F| <= C(n,m)*|Ext|
    holds = math.comb(n, l) * len(family) <= math.comb(n, m) * len(ext)
    return KappaCheck(holds, sparsity(family), sparsity(ext), len(ext))


@dataclass(frozen=True)
class Phase2Check:
    holds: bool
    lhs: float  # kappa of the 2m-sets missing from Ext(F, 2m)
    rhs: float  # twice the kappa of the m-sets missing from F
    missing_m: int
    missing_2m: int


def check_phase2(family: SetFamily) -> Phase2Check:
    """Decide the complement doubling bound at l = 2m (requires 2m <= n)."""
    n, m = family.ground.n, family.m
    if 2 * m > n:
        raise ValueError(f"doubling bound needs 2m <= n, got m={m}, n={n}")
    total_m = math.comb(n, m)
    total_2m = math.comb(n, 2 * m)
    c1 = total_m - len(family)
    ext = extend(family, 2 * m).family
    c2 = total_2m - len(ext)
    # ln(T2/c2) >= 2 ln(T1/c1)  <=>  T2*c1^2 >= T1^2*c2   (0s agree with +inf)
    holds = total_2m * c1 * c1 >= total_m * total_m * c2
    return Phase2Check(
        holds=holds,
        lhs=log_ratio(total_2m, c2),
        rhs=2.0 * log_ratio(total_m, c1),
        missing_m=c1,
        missing_2m=c2,
    )
