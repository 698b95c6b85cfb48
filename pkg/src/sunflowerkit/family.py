"""Uniform weighted set families over {1..n}: links, norms, sparsity, spread.

A family holds distinct m-element subsets (bitmasks) with optional
nonnegative weights. The norm of a family is its total weight; the norm of
an arbitrary collection of sets is measured through the family's weights
(sets outside the family weigh zero). The spread check `gamma_check`
verifies, for a threshold b > 0, that every nonempty S satisfies

    norm(link(F, S)) < b**(-|S|) * norm(F)

strictly; ties count as violations. With int or Fraction weights the
comparison is exact (big-integer cross multiplication); with float weights
it is plain float arithmetic, so boundary ties are only as reliable as the
inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from . import kernels
from .bitsets import elements_of, full_mask, mask_of, masks_to_blocks, n_blocks, popcount, submasks

Weight = Union[int, float, Fraction]

_I64_LIMIT = 1 << 62


@dataclass(frozen=True)
class GroundSet:
    """The ground set {1, ..., n}."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ground set size must be >= 1, got {self.n}")

    @property
    def full(self) -> int:
        return full_mask(self.n)


@dataclass(frozen=True)
class SetFamily:
    """An m-uniform family of distinct subsets of a ground set.

    Masks are stored in lexicographic order of their sorted element tuples;
    weights, when present, travel with their sets through that sort.
    """

    ground: GroundSet
    m: int
    masks: tuple[int, ...]
    weights: Optional[tuple[Weight, ...]] = None

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"member size must be >= 0, got {self.m}")
        if self.weights is not None and len(self.weights) != len(self.masks):
            raise ValueError(
                f"{len(self.weights)} weights for {len(self.masks)} sets"
            )
        full = self.ground.full
        for u in self.masks:
            if u & ~full:
                raise ValueError(
                    f"set {elements_of(u)} leaves the ground set [{self.ground.n}]"
                )
            if popcount(u) != self.m:
                raise ValueError(
                    f"set {elements_of(u)} has size {popcount(u)}, family is {self.m}-uniform"
                )
        if len(set(self.masks)) != len(self.masks):
            raise ValueError("duplicate sets in family")
        if self.weights is not None:
            for w in self.weights:
                if isinstance(w, bool) or not isinstance(w, (int, float, Fraction)):
                    raise ValueError(f"weight {w!r} is not int, float or Fraction")
                if w < 0:
                    raise ValueError(f"negative weight {w}")
        order = sorted(range(len(self.masks)), key=lambda i: elements_of(self.masks[i]))
        object.__setattr__(self, "masks", tuple(self.masks[i] for i in order))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(self.weights[i] for i in order))

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_elements(
        cls,
        n: int,
        m: int,
        sets: Iterable[Iterable[int]],
        weights: Optional[Sequence[Weight]] = None,
    ) -> "SetFamily":
        masks = tuple(mask_of(s) for s in sets)
        return cls(GroundSet(n), m, masks, tuple(weights) if weights is not None else None)

    @classmethod
    def complete(cls, n: int, m: int) -> "SetFamily":
        """All m-subsets of [n], unit weights."""
        from itertools import combinations

        return cls.from_elements(n, m, combinations(range(1, n + 1), m))

    # -- basic protocol ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.masks)

    def __iter__(self) -> Iterator[int]:
        return iter(self.masks)

    def __contains__(self, mask: int) -> bool:
        return mask in self._index

    @cached_property
    def _index(self) -> dict[int, int]:
        return {u: i for i, u in enumerate(self.masks)}

    @cached_property
    def blocks(self) -> np.ndarray:
        return masks_to_blocks(self.masks, n_blocks(self.ground.n))

    @cached_property
    def is_exact(self) -> bool:
        """True when all weights are int/Fraction (or implicit unit)."""
        if self.weights is None:
            return True
        return all(not isinstance(w, float) for w in self.weights)

    def weight(self, mask: int) -> Weight:
        i = self._index.get(mask)
        if i is None:
            return 0
        return 1 if self.weights is None else self.weights[i]

    @cached_property
    def total_norm(self) -> Weight:
        if self.weights is None:
            return len(self.masks)
        if self.is_exact:
            return sum(self.weights, Fraction(0))
        return math.fsum(float(w) for w in self.weights)

    @cached_property
    def weights_f64(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(len(self.masks), dtype=np.float64)
        return np.array([float(w) for w in self.weights], dtype=np.float64)

    def scaled_int_weights(self) -> Optional[tuple[np.ndarray, int]]:
        """Weights as (int64 vector, denominator) with exact total, else None.

        None when weights are floats or the scaled total would overflow the
        kernel's int64 accumulator.
        """
        if not self.is_exact:
            return None
        if self.weights is None:
            return np.ones(len(self.masks), dtype=np.int64), 1
        denom = 1
        for w in self.weights:
            denom = denom * Fraction(w).denominator // math.gcd(denom, Fraction(w).denominator)
        scaled = [int(Fraction(w) * denom) for w in self.weights]
        if sum(scaled) >= _I64_LIMIT:
            return None
        return np.array(scaled, dtype=np.int64), denom

    def take(self, masks: Iterable[int]) -> "SetFamily":
        """Subfamily on the given member masks, weights carried over."""
        chosen = []
        for u in masks:
            if u not in self._index:
                raise KeyError(f"set {elements_of(u)} is not a member")
            chosen.append(u)
        if self.weights is None:
            w = None
        else:
            w = tuple(self.weights[self._index[u]] for u in chosen)
        return SetFamily(self.ground, self.m, tuple(chosen), w)

    def element_lists(self) -> list[list[int]]:
        return [list(elements_of(u)) for u in self.masks]


# -- operations -------------------------------------------------------------


def link(family: SetFamily, s: int) -> SetFamily:
    """Subfamily of members containing the set s (masks keep full size m)."""
    if s & ~family.ground.full:
        raise ValueError(f"link set {elements_of(s)} leaves the ground set")
    return family.take(u for u in family.masks if u & s == s)


def norm(family: SetFamily, sets: Iterable[int]) -> Weight:
    """Total family weight of the given sets; non-members contribute zero."""
    seen = set()
    total: Weight = 0
    for u in sets:
        if u in seen:
            continue
        seen.add(u)
        total += family.weight(u)
    if isinstance(total, Fraction) and total.denominator == 1:
        return int(total)
    return total


def sparsity(family: SetFamily) -> float:
    """log C(n, m) - log |F|, +inf for the empty family."""
    if len(family) == 0:
        return math.inf
    return math.log(math.comb(family.ground.n, family.m)) - math.log(len(family))


@dataclass(frozen=True)
class GammaReport:
    """Outcome of a spread check at threshold b.

    witness: lex-smallest violating S (None when the condition holds).
    ratio:   norm(F[S]) * b**|S| / norm(F) at the witness when violated,
             otherwise the maximum of that quantity over all checked S
             (so ratio >= 1 exactly when the condition fails).
    """

    holds: bool
    witness: Optional[int]
    ratio: float
    b: float
    candidates_checked: int = field(default=0, compare=False)

    @property
    def witness_elements(self) -> Optional[tuple[int, ...]]:
        return None if self.witness is None else elements_of(self.witness)


def _gamma_candidates(family: SetFamily) -> list[int]:
    cands: set[int] = set()
    for u in family.masks:
        for sub in submasks(u):
            if sub:
                cands.add(sub)
    return sorted(cands, key=elements_of)


def gamma_check(family: SetFamily, b: Weight) -> GammaReport:
    """Check norm(F[S]) < b**(-|S|) * norm(F) for every nonempty S.

    Only S contained in some member can violate (others have empty link),
    so those are the candidates enumerated. Requires a nonempty family with
    positive norm.
    """
    if b <= 0:
        raise ValueError(f"threshold b must be positive, got {b}")
    if len(family) == 0:
        raise ValueError("spread check needs a nonempty family")
    total = family.total_norm
    if total <= 0:
        raise ValueError("spread check needs positive family norm")

    cands = _gamma_candidates(family)
    cand_blocks = masks_to_blocks(cands, n_blocks(family.ground.n))

    scaled = family.scaled_int_weights()
    exact = scaled is not None
    if exact:
        vec, _denom = scaled
        link_norms = kernels.link_norms_i64(family.blocks, vec, cand_blocks)
        total_scaled = int(vec.sum())
        bf = Fraction(b)
        num, den = bf.numerator, bf.denominator
    else:
        link_norms = kernels.link_norms_f64(family.blocks, family.weights_f64, cand_blocks)
        total_f = float(total)
        bf_f = float(b)

    holds = True
    witness = None
    best_ratio = 0.0
    witness_ratio = 0.0
    for i, s in enumerate(cands):
        size = popcount(s)
        if exact:
            lhs = int(link_norms[i]) * num**size
            rhs = total_scaled * den**size
            violated = lhs >= rhs
            ratio = float(Fraction(lhs, rhs)) if rhs else math.inf
        else:
            lhs_f = float(link_norms[i]) * bf_f**size
            violated = not (lhs_f < total_f)
            ratio = lhs_f / total_f
        if violated:
            holds = False
            witness = s
            witness_ratio = ratio
            break
        best_ratio = max(best_ratio, ratio)

    return GammaReport(
        holds=holds,
        witness=witness,
        ratio=witness_ratio if not holds else best_ratio,
        b=float(b),
        candidates_checked=len(cands),
    )
