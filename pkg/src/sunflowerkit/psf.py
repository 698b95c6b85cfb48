"""Partial sunflowers: configuration, core extraction, and validation.

A partial sunflower Z = (C, Y_1;F_1, ..., Y_k;F_k) of rank r lives on an
r-subsplit X_* and satisfies:

  Z-i)   the core C is on X_* with |C| <= core_cap * m;
  Z-ii)  the seed sets Y_i are pairwise disjoint inside Union(X_* minus C)
         with exactly floor(delta * strip_size) elements in each C-free
         strip, for every petal;
  Z-iii) each petal family F_i is nonempty, contained in the reference
         family's link at C, and avoids the C-free strips except inside
         Y_i; all petals are identical when there is no C-free strip;
  Z-iv)  strictly |F_i| < 2 |F_i'| for every pair of petals.

A PSF is a set of such Z whose petal families are pairwise disjoint across
different Z (the universal disjoint property). Rank-m elements certify
sunflowers: one member per petal meets the others exactly in C.

`find_cores` extracts dense-link cores: descending r from m to 0 it
repeatedly strips off T_C = F'[C] whenever |F'[C]| >= f(r) with
f(x) = f_theta * f_rho**(-x) * |F|, returning as soon as the accumulated
family reaches a 3**(r-m-1) fraction of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .bitsets import elements_of, mask_of, popcount
from .family import SetFamily
from .splits import Split, Subsplit, is_on_subsplit

from itertools import combinations


class PipelineConfigError(ValueError):
    """Constants that make a stage structurally impossible."""


@dataclass(frozen=True)
class PipelineConfig:
    """All construction constants, explicit and overridable.

    `formula_defaults` derives every value from (eps, k, m) by the idealized
    formulas; those overflow float range already for eps <= 0.1, so desk
    runs must pass explicit toy values (the CLI enforces this).
    """

    k: int
    eps: float
    h: float
    c: float
    b: float
    delta: float
    core_cap: float  # cap on |C| as a fraction of m
    f_theta: float  # f(x) = f_theta * f_rho**(-x) * |F|
    f_rho: float
    reconstruct_ratio: float  # link-filter base in the rank-r reconstruction
    lift_slack: float = 0.5  # two-sided slack around delta*|F_i| in the lift
    y_enum_cap: int = 20_000  # exhaustive seed-set search cap per strip
    y_sample_budget: int = 2_000  # sampled candidates when above the cap

    def __post_init__(self):
        if self.k < 2:
            raise PipelineConfigError(f"need k >= 2, got {self.k}")
        if not 0 < self.eps < 1:
            raise PipelineConfigError(f"eps must be in (0,1), got {self.eps}")
        if not 0 < self.delta < 1:
            raise PipelineConfigError(f"delta must be in (0,1), got {self.delta}")
        for name in ("h", "c", "b", "f_theta", "f_rho", "reconstruct_ratio"):
            v = getattr(self, name)
            if not v > 0 or math.isinf(v) or math.isnan(v):
                raise PipelineConfigError(f"{name} must be positive and finite, got {v}")
        if not 0 <= self.core_cap <= 1:
            raise PipelineConfigError(f"core_cap must be in [0,1], got {self.core_cap}")
        if not 0 <= self.lift_slack:
            raise PipelineConfigError(f"lift_slack must be >= 0, got {self.lift_slack}")
        if self.y_enum_cap < 1 or self.y_sample_budget < 1:
            raise PipelineConfigError("search budgets must be >= 1")

    @classmethod
    def formula_defaults(cls, eps: float, k: int, m: int, **overrides) -> "PipelineConfig":
        """Constants from the idealized formulas; raises when they overflow.

        h = e^(1/eps), c = e^h, b = c k ln k, delta = eps/(k ln k),
        f_theta = eps^(3m)/k, f_rho = c^h k, core_cap = 1/c,
        reconstruct_ratio = c^sqrt(h) k ln k, lift_slack = e^(-h).
        """
        if not 0 < eps < 1:
            raise PipelineConfigError(f"eps must be in (0,1), got {eps}")
        if k < 2:
            raise PipelineConfigError(f"need k >= 2, got {k}")
        try:
            h = math.exp(1.0 / eps)
            c = math.exp(h)
            values = dict(
                k=k,
                eps=eps,
                h=h,
                c=c,
                b=c * k * math.log(k),
                delta=eps / (k * math.log(k)),
                core_cap=1.0 / c,
                f_theta=eps ** (3 * m) / k,
                f_rho=c**h * k,
                reconstruct_ratio=c ** math.sqrt(h) * k * math.log(k),
                lift_slack=math.exp(-h),
            )
        except OverflowError:
            raise PipelineConfigError(
                f"formula constants overflow at eps={eps} (c = exp(exp(1/eps))); "
                "pass explicit toy values instead"
            )
        for name, v in values.items():
            if isinstance(v, float) and (math.isinf(v) or math.isnan(v) or v == 0.0):
                raise PipelineConfigError(
                    f"formula constant {name} = {v} at eps={eps} is not usable; "
                    "pass explicit toy values instead"
                )
        values.update(overrides)
        return cls(**values)

    def f(self, x: int, family_size: int) -> float:
        """Extraction threshold at link size x for a family of the given size."""
        return self.f_theta * self.f_rho ** (-x) * family_size


@dataclass(frozen=True)
class PartialSunflower:
    """One tuple (C, Y_1;F_1, ..., Y_k;F_k) on a subsplit.

    `lift_target`, when set, is the (r+1)-subsplit this element was grouped
    under during reconstruction; the rank lift grows the element into that
    subsplit's extra strip.
    """

    core: int
    subsplit: Subsplit
    petal_seeds: tuple[int, ...]
    petal_families: tuple[SetFamily, ...]
    lift_target: Optional[Subsplit] = None

    def __post_init__(self):
        if len(self.petal_seeds) != len(self.petal_families):
            raise ValueError(
                f"{len(self.petal_seeds)} seeds for {len(self.petal_families)} petal families"
            )
        if len(self.petal_families) < 2:
            raise ValueError("a partial sunflower needs at least 2 petals")

    @property
    def k(self) -> int:
        return len(self.petal_families)

    @property
    def rank(self) -> int:
        return self.subsplit.rank

    def member_union(self) -> set[int]:
        out: set[int] = set()
        for fam in self.petal_families:
            out.update(fam.masks)
        return out


@dataclass(frozen=True)
class PSF:
    """A family of partial sunflowers with the universal disjoint property."""

    elements: tuple[PartialSunflower, ...]
    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError(f"rank must be >= 0, got {self.rank}")

    def __len__(self) -> int:
        return len(self.elements)

    def family_union(self) -> set[int]:
        """F(ZZ): every member of every petal family."""
        out: set[int] = set()
        for z in self.elements:
            out |= z.member_union()
        return out


@dataclass
class CoresResult:
    r0: int
    cores: tuple[int, ...]  # extraction order
    f_hat: SetFamily
    per_core: dict[int, SetFamily]  # core -> extracted T_C
    split: Split
    source_size: int


def find_cores(family: SetFamily, split: Split, cfg: PipelineConfig) -> CoresResult:
    """Descend r = m..0 extracting links of size >= f(r) until the
    accumulated family reaches the 3**(r-m-1) fraction of the input.

    Candidate cores are r-subsets of current members (anything else has an
    empty link), tried lexicographically smallest first. The caller should
    pass a family of sets on the split; this is not enforced, and the
    algorithm is well-defined without it.
    """
    m = family.m
    size_f = len(family)
    if size_f == 0:
        raise ValueError("core extraction needs a nonempty family")

    current: set[int] = set(family.masks)
    f_hat_masks: list[int] = []
    cores_order: list[int] = []
    per_core: dict[int, SetFamily] = {}

    for r in range(m, -1, -1):
        threshold = cfg.f(r, size_f)
        counts: dict[int, int] = {}
        for u in current:
            for sub in combinations(elements_of(u), r):
                c = mask_of(sub)
                counts[c] = counts.get(c, 0) + 1
        order = sorted(counts, key=elements_of)
        while True:
            found = None
            for c in order:
                if counts[c] >= threshold and counts[c] > 0:
                    found = c
                    break
            if found is None:
                break
            t_masks = [u for u in current if u & found == found]
            for u in t_masks:
                current.remove(u)
                for sub in combinations(elements_of(u), r):
                    counts[mask_of(sub)] -= 1
            f_hat_masks.extend(t_masks)
            cores_order.append(found)
            per_core[found] = family.take(t_masks)
        # return test: |f_hat| >= 3**(r-m-1) |F|, exactly in integers
        if len(f_hat_masks) * 3 ** (m + 1 - r) >= size_f:
            return CoresResult(
                r0=r,
                cores=tuple(cores_order),
                f_hat=family.take(f_hat_masks),
                per_core=per_core,
                split=split,
                source_size=size_f,
            )
    raise PipelineConfigError(
        f"extraction exhausted all link sizes without reaching the return "
        f"threshold: f(0) = {cfg.f(0, size_f):.6g} exceeds the {len(current)} "
        f"remaining members; lower f_theta or f_rho"
    )


def base_psf(cores: CoresResult, k: int) -> PSF:
    """Rank-r0 PSF: per core, k identical petals T_C with empty seeds."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    elements = []
    for c in cores.cores:
        if popcount(c) != cores.r0:
            raise ValueError(
                f"core {elements_of(c)} has size {popcount(c)}, not r0 = {cores.r0}; "
                "the extraction levels were not uniform under this config"
            )
        touched = cores.split.strips_hit(c)
        if len(touched) != cores.r0:
            raise ValueError(
                f"core {elements_of(c)} is not on the split (some strip holds "
                "two of its elements)"
            )
        t_c = cores.per_core[c]
        elements.append(
            PartialSunflower(
                core=c,
                subsplit=Subsplit(cores.split, touched),
                petal_seeds=(0,) * k,
                petal_families=(t_c,) * k,
            )
        )
    return PSF(tuple(elements), cores.r0)


@dataclass
class PsfValidation:
    ok: bool
    checks: dict[str, bool]
    messages: tuple[str, ...]
    f_zz_size: int
    normality_threshold: Optional[float] = None

    def to_doc(self) -> dict:
        return {
            "ok": self.ok,
            "checks": dict(self.checks),
            "messages": list(self.messages),
            "f_zz_size": self.f_zz_size,
            "normality_threshold": self.normality_threshold,
        }


def validate_psf(
    zz: PSF,
    f_hat: SetFamily,
    cfg: PipelineConfig,
    r0: Optional[int] = None,
) -> PsfValidation:
    """Check all structural conditions; returns per-condition pass/fail with
    the first counterexample of each. Normality (the size of the union
    against eps**(2(rank-r0)) * |f_hat|, non-strict) is checked only when r0
    is given.
    """
    m = f_hat.m
    msgs: list[str] = []
    checks = {
        "rank": True,
        "Z-i": True,
        "Z-ii": True,
        "Z-iii": True,
        "Z-iv": True,
        "universal-disjoint": True,
    }

    def fail(key: str, msg: str) -> None:
        if checks[key]:
            checks[key] = False
            msgs.append(f"{key}: {msg}")

    f_hat_masks = set(f_hat.masks)
    seen_unions: list[tuple[int, set[int]]] = []
    for idx, z in enumerate(zz.elements):
        sub = z.subsplit
        if sub.rank != zz.rank:
            fail("rank", f"element {idx} has subsplit rank {sub.rank}, PSF rank {zz.rank}")

        # Z-i: core on the subsplit, size capped
        if not is_on_subsplit(z.core, sub):
            fail("Z-i", f"element {idx}: core {elements_of(z.core)} not on its subsplit")
        if popcount(z.core) > cfg.core_cap * m:
            fail(
                "Z-i",
                f"element {idx}: |core| = {popcount(z.core)} exceeds "
                f"core_cap*m = {cfg.core_cap * m:.3g}",
            )

        free_strips = [s for s in sub.strips if not (s & z.core)]
        free_union = 0
        for s in free_strips:
            free_union |= s
        quota = (
            math.floor(cfg.delta * sub.split.strip_size) if free_strips else 0
        )

        # Z-ii: disjoint seeds with the exact per-strip quota
        used = 0
        for i, y in enumerate(z.petal_seeds):
            if y & used:
                fail("Z-ii", f"element {idx}: seed {i} overlaps an earlier seed")
            used |= y
            if y & ~free_union:
                fail(
                    "Z-ii",
                    f"element {idx}: seed {i} leaves the core-free strips",
                )
            for s in free_strips:
                if popcount(y & s) != quota:
                    fail(
                        "Z-ii",
                        f"element {idx}: seed {i} has {popcount(y & s)} elements "
                        f"in a strip, quota is {quota}",
                    )

        # Z-iii: petals nonempty, inside the reference link, confined seeds
        for i, (y, fam) in enumerate(zip(z.petal_seeds, z.petal_families)):
            if len(fam) == 0:
                fail("Z-iii", f"element {idx}: petal {i} is empty")
                continue
            forbidden = free_union & ~y
            for u in fam.masks:
                if u & z.core != z.core or u not in f_hat_masks:
                    fail(
                        "Z-iii",
                        f"element {idx}: petal {i} member {elements_of(u)} is not "
                        "in the reference family's link at the core",
                    )
                    break
                if u & forbidden:
                    fail(
                        "Z-iii",
                        f"element {idx}: petal {i} member {elements_of(u)} meets a "
                        "core-free strip outside its seed",
                    )
                    break
        if not free_strips:
            first = z.petal_families[0].masks
            if any(fam.masks != first for fam in z.petal_families[1:]):
                fail(
                    "Z-iii",
                    f"element {idx}: petals must be identical when no core-free "
                    "strip remains",
                )

        # Z-iv: strict pairwise size bound
        sizes = [len(fam) for fam in z.petal_families]
        if max(sizes) >= 2 * min(sizes):
            fail(
                "Z-iv",
                f"element {idx}: petal sizes {sizes} violate the strict factor-2 bound",
            )

        union = z.member_union()
        for jdx, other in seen_unions:
            if union & other:
                fail(
                    "universal-disjoint",
                    f"elements {jdx} and {idx} share petal members",
                )
                break
        seen_unions.append((idx, union))

    f_zz = set().union(*(u for _, u in seen_unions)) if seen_unions else set()
    normality_threshold = None
    if r0 is not None:
        checks["normality"] = True
        normality_threshold = cfg.eps ** (2 * (zz.rank - r0)) * len(f_hat)
        if not len(f_zz) >= normality_threshold:
            fail(
                "normality",
                f"|F(ZZ)| = {len(f_zz)} below eps^(2(r-r0)) |f_hat| = "
                f"{normality_threshold:.6g}",
            )

    return PsfValidation(
        ok=all(checks.values()),
        checks=checks,
        messages=tuple(msgs),
        f_zz_size=len(f_zz),
        normality_threshold=normality_threshold,
    )


def normalize_petals(families: list[SetFamily]) -> list[SetFamily]:
    """Trim petal families to the lex-smallest subfamilies satisfying Z-iv.

    The cap is 2*min - 1 (not the naive 2*min) so the strict bound holds.
    """
    sizes = [len(f) for f in families]
    if min(sizes) == 0:
        raise ValueError("cannot normalize an empty petal family")
    cap = max(1, 2 * min(sizes) - 1)
    out = []
    for fam in families:
        if len(fam) <= cap:
            out.append(fam)
        else:
            out.append(fam.take(fam.masks[:cap]))  # masks are lex-sorted
    return out
