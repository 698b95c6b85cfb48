"""Sunflower detection, search, extremal families and size bounds.

A k-sunflower is k distinct sets whose pairwise intersections all equal one
common core (the petals minus the core are pairwise disjoint and may be
empty). `find_sunflower` is complete: any sunflower's core is the
intersection of two of its petals, so scanning all pairwise intersections
(plus the empty core) as core candidates cannot miss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Optional, Sequence

from .bitsets import elements_of, mask_of
from .family import SetFamily


def _pairwise_core(sets: Sequence[int]) -> Optional[int]:
    """Common pairwise intersection, or None if the sets do not share one."""
    core = sets[0] & sets[1]
    for a, b in combinations(sets, 2):
        if a & b != core:
            return None
    return core


def is_sunflower(sets: Sequence[int]) -> Optional[int]:
    """Core mask if the distinct sets form a sunflower, else None.

    Needs at least two sets; duplicates are rejected (ValueError) since
    sunflower petals are distinct by definition.
    """
    if len(sets) < 2:
        raise ValueError(f"a sunflower needs >= 2 petals, got {len(sets)}")
    if len(set(sets)) != len(sets):
        raise ValueError("duplicate petals")
    return _pairwise_core(sets)


@dataclass(frozen=True)
class SunflowerCertificate:
    petals: tuple[int, ...]
    core: int

    def __post_init__(self):
        object.__setattr__(
            self, "petals", tuple(sorted(self.petals, key=elements_of))
        )

    @property
    def k(self) -> int:
        return len(self.petals)

    def verify(self) -> bool:
        return is_sunflower(self.petals) == self.core

    def to_doc(self) -> dict:
        return {
            "k": self.k,
            "core": list(elements_of(self.core)),
            "petals": [list(elements_of(p)) for p in self.petals],
        }


def find_sunflower(family: SetFamily, k: int) -> Optional[SunflowerCertificate]:
    """First k-sunflower among the members, or None.

    Core candidates (pairwise intersections and the empty set) are tried in
    lex order; for each, petals reduced by the core must pack disjointly,
    searched by backtracking with low-conflict candidates first. Output is
    deterministic for a given family.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    members = family.masks
    if len(members) < k:
        return None

    cores = {0} if len(members) >= 2 else set()
    for a, b in combinations(members, 2):
        cores.add(a & b)

    for core in sorted(cores, key=elements_of):
        carriers = [u for u in members if u & core == core]
        if len(carriers) < k:
            continue
        reduced = [(u & ~core, u) for u in carriers]
        # fewer conflicts first shrinks the branching near the root
        conflicts = {
            u: sum(1 for rv, v in reduced if v != u and rv & ru)
            for ru, u in reduced
        }
        order = sorted(reduced, key=lambda t: (conflicts[t[1]], elements_of(t[1])))

        chosen: list[int] = []

        def dfs(start: int, used: int) -> bool:
            if len(chosen) == k:
                return True
            if len(chosen) + (len(order) - start) < k:
                return False
            for i in range(start, len(order)):
                ru, u = order[i]
                if ru & used:
                    continue
                chosen.append(u)
                if dfs(i + 1, used | ru):
                    return True
                chosen.pop()
            return False

        if dfs(0, 0):
            return SunflowerCertificate(tuple(chosen), core)
    return None


def exhaustive_sunflower_search(family: SetFamily, k: int) -> Optional[SunflowerCertificate]:
    """Reference search: try every k-subset of members in lex order."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    for combo in combinations(family.masks, k):
        core = _pairwise_core(combo)
        if core is not None:
            return SunflowerCertificate(combo, core)
    return None


@dataclass(frozen=True)
class ExtremalResult:
    size: int
    masks: tuple[int, ...]
    exact: bool  # False when the node budget ran out (size is a lower bound)
    nodes: int


def _orbit_reps_after_first(n: int, m: int, all_sets: Sequence[int]) -> set[int]:
    """Lex-least representatives of m-sets under permutations fixing {1..m}.

    Used to prune the second member of the search: any family containing
    {1..m} can be relabeled, without breaking that containment, so that its
    lex-smallest remaining member is one of these representatives.
    """
    first = tuple(range(1, m + 1))
    rest = tuple(range(m + 1, n + 1))
    maps = []
    for pa in permutations(first):
        for pb in permutations(rest):
            table = {}
            for src, dst in zip(first, pa):
                table[src] = dst
            for src, dst in zip(rest, pb):
                table[src] = dst
            maps.append(table)
    reps = set()
    for u in all_sets:
        elems = elements_of(u)
        best = u
        for table in maps:
            img = mask_of(table[e] for e in elems)
            if elements_of(img) < elements_of(best):
                best = img
        reps.add(best)
    return reps


def max_sunflower_free(
    n: int, m: int, k: int, node_budget: int = 1_000_000
) -> ExtremalResult:
    """Largest m-uniform family on [n] with no k-sunflower (branch and bound).

    For n <= 8 the search space is cut by symmetry: the first member is
    fixed to {1..m} (every nonempty family relabels onto one containing it)
    and the second is restricted to orbit representatives under the
    stabilizer of {1..m}. If the node budget runs out, `exact` is False and
    the reported family is only a best-found lower bound.
    """
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if m < 1 or m > n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    all_sets = [mask_of(c) for c in combinations(range(1, n + 1), m)]

    use_symmetry = n <= 8
    second_reps = _orbit_reps_after_first(n, m, all_sets) if use_symmetry else None

    def extends_sunflower(chosen: list[int], new: int) -> bool:
        if k == 2:
            return len(chosen) >= 1  # any second distinct set pairs into one
        for tail in combinations(chosen, k - 1):
            if _pairwise_core((*tail, new)) is not None:
                return True
        return False

    # greedy pass for a starting bound
    greedy: list[int] = []
    for u in all_sets:
        if not extends_sunflower(greedy, u):
            greedy.append(u)
    best = list(greedy)

    nodes = 0
    exhausted = False

    def dfs(start: int, chosen: list[int]) -> None:
        nonlocal best, nodes, exhausted
        if exhausted:
            return
        if len(chosen) > len(best):
            best = list(chosen)
        for i in range(start, len(all_sets)):
            if len(chosen) + (len(all_sets) - i) <= len(best):
                return
            if use_symmetry:
                if not chosen and i > 0:
                    return  # WLOG the first member is {1..m}
                if len(chosen) == 1 and all_sets[i] not in second_reps:
                    continue
            nodes += 1
            if nodes > node_budget:
                exhausted = True
                return
            u = all_sets[i]
            if extends_sunflower(chosen, u):
                continue
            chosen.append(u)
            dfs(i + 1, chosen)
            chosen.pop()
            if exhausted:
                return

    dfs(0, [])
    return ExtremalResult(len(best), tuple(best), not exhausted, nodes)


@dataclass(frozen=True)
class BoundRow:
    k: int
    m: int
    classical: int  # m! (k-1)^m, exact
    spread_based: float  # (c k ln(k+1))^m, natural log


def bound_table(k_range: Iterable[int], m_range: Iterable[int], c: float = 1.0) -> list[BoundRow]:
    """Sunflower-free size bounds: any larger m-uniform family has a k-sunflower."""
    rows = []
    for k in k_range:
        if k < 2:
            raise ValueError(f"need k >= 2, got {k}")
        for m in m_range:
            if m < 0:
                raise ValueError(f"need m >= 0, got {m}")
            rows.append(
                BoundRow(
                    k=k,
                    m=m,
                    classical=math.factorial(m) * (k - 1) ** m,
                    spread_based=(c * k * math.log(k + 1)) ** m,
                )
            )
    return rows
