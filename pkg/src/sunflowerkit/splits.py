"""Splits of the ground set into equal strips, and families "on" them.

A split partitions {1..n} into m strips of size n/m. A subsplit selects
some of those strips (order preserved, rank = number chosen; rank 0 is
allowed). A set S is on a subsplit when S lies inside the union of the
chosen strips and meets each strip in at most one element, so an m-set on a
full m-split is a transversal: one element per strip.

Every m-set is on an average-density split: the mean on-split member count
over all splits is (n/m)**m * |F| / C(n, m) exactly, which is what
`find_dense_split` hunts for (random probes first, exhaustive sweep when
the split count is small enough).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterator, Optional, Sequence

import numpy as np

from . import kernels
from .bitsets import elements_of, mask_of, mask_to_blocks, masks_to_blocks, n_blocks, popcount
from .family import GroundSet, SetFamily


@dataclass(frozen=True)
class Split:
    """Partition of the ground set into equal-size strips."""

    ground: GroundSet
    strips: tuple[int, ...]

    def __post_init__(self):
        if not self.strips:
            raise ValueError("a split needs at least one strip")
        n = self.ground.n
        if n % len(self.strips):
            raise ValueError(f"{len(self.strips)} strips do not divide n={n}")
        size = n // len(self.strips)
        seen = 0
        for s in self.strips:
            if popcount(s) != size:
                raise ValueError(
                    f"strip {elements_of(s)} has size {popcount(s)}, expected {size}"
                )
            if s & seen:
                raise ValueError("strips overlap")
            seen |= s
        if seen != self.ground.full:
            raise ValueError("strips do not cover the ground set")

    @classmethod
    def from_strip_lists(cls, n: int, strips: Sequence[Sequence[int]]) -> "Split":
        return cls(GroundSet(n), tuple(mask_of(s) for s in strips))

    @property
    def num_strips(self) -> int:
        return len(self.strips)

    @property
    def strip_size(self) -> int:
        return self.ground.n // len(self.strips)

    def strip_lists(self) -> list[list[int]]:
        return [list(elements_of(s)) for s in self.strips]

    def strips_hit(self, mask: int) -> tuple[int, ...]:
        """Indices of strips the mask intersects."""
        return tuple(i for i, s in enumerate(self.strips) if s & mask)


@dataclass(frozen=True)
class Subsplit:
    """An order-preserving selection of strips from a split (rank may be 0)."""

    split: Split
    indices: tuple[int, ...]

    def __post_init__(self):
        prev = -1
        for i in self.indices:
            if i <= prev:
                raise ValueError(f"strip indices must strictly increase, got {self.indices}")
            if not 0 <= i < self.split.num_strips:
                raise ValueError(f"strip index {i} out of range")
            prev = i

    @property
    def rank(self) -> int:
        return len(self.indices)

    @property
    def strips(self) -> tuple[int, ...]:
        return tuple(self.split.strips[i] for i in self.indices)

    @cached_property
    def union(self) -> int:
        u = 0
        for s in self.strips:
            u |= s
        return u


def full_subsplit(split: Split) -> Subsplit:
    return Subsplit(split, tuple(range(split.num_strips)))


def is_on_subsplit(mask: int, sub: Subsplit) -> bool:
    """mask inside the chosen strips, at most one element per strip."""
    if mask & ~sub.union:
        return False
    return all(popcount(mask & s) <= 1 for s in sub.strips)


def family_on_subsplit(family: SetFamily, sub: Subsplit) -> SetFamily:
    """Subfamily of members on the subsplit (weights carried over)."""
    if len(family) == 0:
        return family
    nb = n_blocks(family.ground.n)
    strips = masks_to_blocks(sub.strips, nb) if sub.strips else np.zeros((0, nb), dtype=np.uint64)
    flags = kernels.on_subsplit_mask(family.blocks, strips, mask_to_blocks(sub.union, nb))
    return family.take(u for u, ok in zip(family.masks, flags) if ok)


def subsplit_minus_set(sub: Subsplit, mask: int) -> Subsplit:
    """Drop the strips the mask touches."""
    return Subsplit(sub.split, tuple(i for i in sub.indices if not (sub.split.strips[i] & mask)))


def random_split(n: int, num_strips: int, rng: np.random.Generator) -> Split:
    if num_strips < 1 or n % num_strips:
        raise ValueError(f"cannot cut [{n}] into {num_strips} equal strips")
    size = n // num_strips
    perm = rng.permutation(n) + 1
    strips = tuple(mask_of(perm[i * size : (i + 1) * size]) for i in range(num_strips))
    return Split(GroundSet(n), strips)


def count_splits(n: int, num_strips: int) -> int:
    """Number of splits up to strip order."""
    size = n // num_strips
    total = math.factorial(n) // (math.factorial(size) ** num_strips)
    return total // math.factorial(num_strips)


def all_splits(n: int, num_strips: int) -> Iterator[Split]:
    """All splits, one per unordered partition; strips sorted by least element.

    Recursion: the smallest unassigned element opens the next strip and picks
    its strip-mates from the remaining pool, which yields each partition once.
    """
    if num_strips < 1 or n % num_strips:
        raise ValueError(f"cannot cut [{n}] into {num_strips} equal strips")
    size = n // num_strips
    ground = GroundSet(n)

    def rec(pool: tuple[int, ...], acc: list[int]) -> Iterator[tuple[int, ...]]:
        if not pool:
            yield tuple(acc)
            return
        head, rest = pool[0], pool[1:]
        for mates in combinations(rest, size - 1):
            mask = mask_of((head, *mates))
            remaining = tuple(e for e in rest if e not in mates)
            acc.append(mask)
            yield from rec(remaining, acc)
            acc.pop()

    for strips in rec(tuple(range(1, n + 1)), []):
        yield Split(ground, strips)


@dataclass(frozen=True)
class DenseSplitResult:
    split: Split
    on_split: SetFamily
    achieved: int
    target: Fraction
    mode: str
    tries: int


class DenseSplitError(Exception):
    """No split reached the average-density target within budget."""

    def __init__(self, best_split: Optional[Split], achieved: int, target: Fraction, tries: int):
        self.best_split = best_split
        self.achieved = achieved
        self.target = target
        self.tries = tries
        super().__init__(
            f"no split reached target {float(target):.6g} after {tries} tries "
            f"(best achieved {achieved})"
        )


def find_dense_split(
    family: SetFamily,
    seed: int = 0,
    max_tries: int = 512,
    exhaustive_cap: int = 200_000,
) -> DenseSplitResult:
    """Find a split carrying at least the average number of on-split members.

    Target: (n/m)**m * |F| / C(n, m), compared exactly in rationals. Random
    splits are tried first; if none hits and the total split count is within
    `exhaustive_cap`, every split is scanned (the average argument guarantees
    a hit there). Otherwise DenseSplitError carries the best split seen.
    """
    n, m = family.ground.n, family.m
    if m < 1:
        raise ValueError("dense split search needs member size >= 1")
    if n % m:
        raise ValueError(f"member size {m} does not divide n={n}; pad the ground set first")
    if len(family) == 0:
        raise ValueError("dense split search needs a nonempty family")
    size = n // m
    target = Fraction(size**m * len(family), math.comb(n, m))

    def on_count(split: Split) -> tuple[int, SetFamily]:
        fam = family_on_subsplit(family, full_subsplit(split))
        return len(fam), fam

    best: tuple[int, Optional[Split]] = (-1, None)
    rng = np.random.default_rng(seed)
    for t in range(max_tries):
        split = random_split(n, m, rng)
        cnt, fam = on_count(split)
        if cnt >= target:
            return DenseSplitResult(split, fam, cnt, target, "random", t + 1)
        if cnt > best[0]:
            best = (cnt, split)

    tries = max_tries
    if count_splits(n, m) <= exhaustive_cap:
        for split in all_splits(n, m):
            tries += 1
            cnt, fam = on_count(split)
            if cnt >= target:
                return DenseSplitResult(split, fam, cnt, target, "exhaustive", tries)
            if cnt > best[0]:
                best = (cnt, split)
        # the mean over all splits equals the target, so this is unreachable
        raise AssertionError("exhaustive sweep found no split at the average")

    raise DenseSplitError(best[1], best[0], target, tries)
