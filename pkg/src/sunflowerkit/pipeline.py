"""Rank-raising pipeline: reconstruct, lift, repeat, extract a sunflower.

One full run: find a dense split, extract cores (rank r0), form the base
PSF, then alternate two stages until rank m:

  reconstruct  - regroup elements under (r+1)-subsplits, discard light
                 groups, remove members concentrating on any single new
                 strip element, drop depleted elements, re-normalize;
                 survivors carry the (r+1)-subsplit as their lift target.
  lift_rank    - per element, search seed sets Y inside the new strip whose
                 induced petal subfamilies land in a two-sided window
                 around delta*|F_i|, extend them, pick k pairwise-disjoint
                 representatives, shrink back, and emit a rank r+1 element;
                 consumed members are subtracted and the round repeats.

A rank-m element certifies a sunflower: its petal families live on
pairwise-disjoint seed sets through the common core, so one member per
petal has all pairwise intersections exactly equal to the core. That claim
is never trusted: extraction re-checks it with the standalone detector.

Quantitative targets (output/input ratio above eps/2, per-singleton links
below |F_i|/b, the seed-count and removed-mass windows) are recorded as
measurements in every report and enforced only under assert_targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Optional

import numpy as np

from . import kernels
from .bitsets import elements_of, iter_bits, mask_of, masks_to_blocks, n_blocks
from .family import GroundSet, SetFamily
from .extensions import iterated_extend
from .psf import PSF, PartialSunflower, PipelineConfig, base_psf, find_cores, normalize_petals, validate_psf
from .splits import Split, Subsplit, find_dense_split
from .sunflowers import SunflowerCertificate, is_sunflower


# ----------------------------------------------------------- reconstruct ----

@dataclass
class ReconstructReport:
    input_size: int
    output_size: int
    ratio: float
    ratio_target: float  # eps/2
    ratio_ok: bool
    groups: list[dict]
    dropped: list[dict]
    d_max: Optional[float]  # max |F_i[{x}]| * b / |F_i| over new-strip singletons
    d_ok: Optional[bool]
    empty: bool


@dataclass
class ReconstructResult:
    psf: PSF
    report: ReconstructReport


def _check_input_psf(zz: PSF) -> Split:
    if len(zz) == 0:
        raise ValueError("empty input PSF")
    split = zz.elements[0].subsplit.split
    seen: set[int] = set()
    for idx, z in enumerate(zz.elements):
        if z.subsplit.split != split:
            raise ValueError(f"element {idx} lives on a different split")
        if z.subsplit.rank != zz.rank:
            raise ValueError(f"element {idx} has rank {z.subsplit.rank}, PSF rank {zz.rank}")
        sizes = [len(f) for f in z.petal_families]
        if min(sizes) == 0:
            raise ValueError(f"element {idx} has an empty petal family")
        if max(sizes) >= 2 * min(sizes):
            raise ValueError(f"element {idx} violates the strict factor-2 size bound")
        union = z.member_union()
        if union & seen:
            raise ValueError(f"element {idx} shares members with an earlier element")
        seen |= union
    return split


def _link_carriers(members: tuple[int, ...], b: int) -> list[int]:
    return [u for u in members if u & b == b]


def _filter_petal(
    fam: SetFamily, sub: Subsplit, new_strip: int, ratio_base: float, rank: int
) -> list[int]:
    """Members surviving the concentrated-link removal.

    For every on-subsplit rank-set B inside sub (built from member hits, one
    element per strip) and every x in the new strip, the members above B and
    x are removed when they exceed ratio_base**-(rank+1) of the members
    above B.
    """
    threshold = ratio_base ** (-(rank + 1))
    strips = sub.strips
    cands: set[int] = set()
    for u in fam.masks:
        hits = [elements_of(u & s) for s in strips]
        if any(not h for h in hits):
            continue  # this member sits above no full rank-set of sub
        for combo in product(*hits):
            cands.add(mask_of(combo))
    removed: set[int] = set()
    for b in sorted(cands, key=elements_of):
        group = _link_carriers(fam.masks, b)
        base = len(group)
        for xbit in iter_bits(new_strip):
            over = [u for u in group if u & xbit]
            if over and len(over) > threshold * base:
                removed.update(over)
    return [u for u in fam.masks if u not in removed]


def reconstruct(zz: PSF, cfg: PipelineConfig) -> ReconstructResult:
    """Regroup a rank-r PSF under (r+1)-subsplits and thin it for lifting.

    Faithful staging: all (r+1)-subsplits are visited in lex order; a group
    is consumed only when its members reach a 3**-m fraction of the whole;
    the link filter and the eps-size drop run per element; survivors are
    normalized and tagged with their (r+1)-subsplit as lift target.
    """
    split = _check_input_psf(zz)
    r = zz.rank
    m = zz.elements[0].petal_families[0].m
    if r >= m:
        raise ValueError(f"cannot reconstruct at rank {r} >= member size {m}")

    total = len(zz.family_union())
    unconsumed: dict[tuple[int, ...], list[PartialSunflower]] = {}
    for z in zz.elements:
        unconsumed.setdefault(z.subsplit.indices, []).append(z)

    survivors: list[PartialSunflower] = []
    groups_log: list[dict] = []
    dropped_log: list[dict] = []
    d_max: Optional[float] = None

    for xp in combinations(range(split.num_strips), r + 1):
        xp_set = set(xp)
        member_keys = sorted(k for k in unconsumed if set(k) <= xp_set)
        if not member_keys:
            continue
        group = [z for k in member_keys for z in unconsumed[k]]
        group_size = len(set().union(*(z.member_union() for z in group)))
        # consume test, exact: size >= 3**-m * total
        if group_size * 3**m < total:
            groups_log.append({"strips": list(xp), "size": group_size, "action": "light"})
            continue
        groups_log.append({"strips": list(xp), "size": group_size, "action": "kept"})
        for k in member_keys:
            del unconsumed[k]

        for z in group:
            new_idx = next(i for i in xp if i not in z.subsplit.indices)
            new_strip = split.strips[new_idx]
            kept_masks = [
                _filter_petal(fam, z.subsplit, new_strip, cfg.reconstruct_ratio, r)
                for fam in z.petal_families
            ]
            light = next(
                (
                    (i, len(kept), len(fam))
                    for i, (kept, fam) in enumerate(zip(kept_masks, z.petal_families))
                    if len(kept) < cfg.eps * len(fam)
                ),
                None,
            )
            if light is not None:
                dropped_log.append(
                    {
                        "strips": list(xp),
                        "petal": light[0],
                        "kept": light[1],
                        "had": light[2],
                    }
                )
                continue
            new_fams = normalize_petals(
                [fam.take(kept) for fam, kept in zip(z.petal_families, kept_masks)]
            )
            for fam in new_fams:
                for xbit in iter_bits(new_strip):
                    cnt = sum(1 for u in fam.masks if u & xbit)
                    ratio = cnt * cfg.b / len(fam)
                    if d_max is None or ratio > d_max:
                        d_max = ratio
            survivors.append(
                PartialSunflower(
                    core=z.core,
                    subsplit=z.subsplit,
                    petal_seeds=z.petal_seeds,
                    petal_families=tuple(new_fams),
                    lift_target=Subsplit(split, xp),
                )
            )

    out = PSF(tuple(survivors), r)
    out_size = len(out.family_union())
    ratio = out_size / total if total else 0.0
    report = ReconstructReport(
        input_size=total,
        output_size=out_size,
        ratio=ratio,
        ratio_target=cfg.eps / 2.0,
        ratio_ok=ratio > cfg.eps / 2.0,
        groups=groups_log,
        dropped=dropped_log,
        d_max=d_max,
        d_ok=None if d_max is None else d_max < 1.0,
        empty=len(survivors) == 0,
    )
    return ReconstructResult(out, report)


# ------------------------------------------------------------- rank lift ----

@dataclass
class LiftReport:
    input_elements: int
    emitted: int
    elements: list[dict]
    empty: bool
    normalization_kept_min: Optional[float] = None


@dataclass
class LiftResult:
    psf: PSF
    report: LiftReport


def _strip_gamma_holds(fam: SetFamily, strip: int, b: float) -> Optional[bool]:
    """Spread check of the singleton family on the strip weighted by links."""
    from .family import gamma_check

    singles = list(iter_bits(strip))
    weights = [sum(1 for u in fam.masks if u & s) for s in singles]
    if sum(weights) == 0:
        return None
    hfam = SetFamily(fam.ground, 1, tuple(singles), tuple(weights))
    return gamma_check(hfam, b).holds


def _qualifying_seeds(
    fam: SetFamily, strip_elems: tuple[int, ...], cands: list[int], cfg: PipelineConfig
) -> tuple[list[int], dict[int, int]]:
    """Seed sets Y (masks inside the strip) whose induced subfamily size
    lands strictly inside delta*(1 -/+ lift_slack)*|F_i|, nonempty."""
    strip_mask = mask_of(strip_elems)
    full = fam.ground.full
    nb = n_blocks(fam.ground.n)
    ys = masks_to_blocks([full & ~(strip_mask & ~y) for y in cands], nb)
    counts = kernels.subset_counts(fam.blocks, ys)
    lo = cfg.delta * (1.0 - cfg.lift_slack) * len(fam)
    hi = cfg.delta * (1.0 + cfg.lift_slack) * len(fam)
    out = []
    sizes = {}
    for y, cnt in zip(cands, counts):
        c = int(cnt)
        if c >= 1 and lo < c < hi:
            out.append(y)
            sizes[y] = c
    return out, sizes


def _disjoint_tuple(per_petal: list[list[int]]) -> Optional[list[int]]:
    """One set per petal, pairwise disjoint; lex-first via backtracking."""
    choice: list[int] = []

    def dfs(i: int, used: int) -> bool:
        if i == len(per_petal):
            return True
        for y in per_petal[i]:
            if y & used:
                continue
            choice.append(y)
            if dfs(i + 1, used | y):
                return True
            choice.pop()
        return False

    return choice if dfs(0, 0) else None


def lift_rank(zz_prime: PSF, cfg: PipelineConfig, seed: int = 0) -> LiftResult:
    """Grow each reconstructed element into its target strip, one rank up.

    Per element and round: weight the new strip by link sizes and record its
    spread at b; collect qualifying seed sets per petal; extend them to
    floor(2*delta*ln(k)*strip) sets by repeated doubling; backtrack for k
    pairwise-disjoint representatives; shrink each to a qualifying seed
    inside it; emit the lifted element and subtract the members it used.
    Rounds repeat ceil(eps**-0.5) times or until a petal empties. Failures
    skip the element with a diagnostic, never abort the pass.
    """
    split = _check_input_psf(zz_prime)
    r = zz_prime.rank
    rounds = math.ceil(cfg.eps**-0.5)
    children = np.random.SeedSequence(seed).spawn(len(zz_prime.elements))

    emitted: list[PartialSunflower] = []
    elements_log: list[dict] = []

    for idx, z in enumerate(zz_prime.elements):
        diag: dict = {"element": idx, "emitted": 0, "rounds": [], "stop": None}
        elements_log.append(diag)
        if z.lift_target is None:
            diag["stop"] = "no lift target recorded on this element"
            continue
        new_idx = next(i for i in z.lift_target.indices if i not in z.subsplit.indices)
        strip = split.strips[new_idx]
        strip_elems = elements_of(strip)
        s = len(strip_elems)
        quota = math.floor(cfg.delta * s)
        diag["new_strip"] = new_idx
        diag["quota"] = quota
        if quota < 1:
            diag["stop"] = f"delta*{s} < 1: the strip quota is empty"
            continue
        ext_size = min(s, max(quota, math.floor(2.0 * cfg.delta * math.log(cfg.k) * s)))
        diag["ext_size"] = ext_size
        if cfg.k * ext_size > s:
            diag["stop"] = (
                f"k*ext_size = {cfg.k * ext_size} exceeds strip size {s}: "
                "disjoint representatives cannot fit"
            )
            continue

        total_cands = math.comb(s, quota)
        if total_cands <= cfg.y_enum_cap:
            cands = [mask_of(c) for c in combinations(strip_elems, quota)]
        else:
            rng = np.random.default_rng(children[idx])
            seen: set[int] = set()
            cands = []
            for _ in range(cfg.y_sample_budget):
                pick = rng.choice(s, size=quota, replace=False)
                y = mask_of(strip_elems[int(i)] for i in pick)
                if y not in seen:
                    seen.add(y)
                    cands.append(y)

        cur = list(z.petal_families)
        orig_sizes = [len(f) for f in cur]
        sub_ground = GroundSet(s)
        to_small = {e: i + 1 for i, e in enumerate(strip_elems)}
        from_small = {i + 1: e for i, e in enumerate(strip_elems)}

        for t in range(rounds):
            if any(len(f) == 0 for f in cur):
                diag["stop"] = f"petal exhausted entering round {t}"
                break
            rd: dict = {"round": t}
            diag["rounds"].append(rd)
            rd["h_gamma"] = [_strip_gamma_holds(f, strip, cfg.b) for f in cur]

            petal_seeds: list[list[int]] = []
            petal_sizes: list[dict[int, int]] = []
            failed = None
            for i, fam in enumerate(cur):
                ys, sizes = _qualifying_seeds(fam, strip_elems, cands, cfg)
                if not ys:
                    failed = i
                    break
                petal_seeds.append(ys)
                petal_sizes.append(sizes)
            rd["y_counts"] = [len(ys) for ys in petal_seeds]
            rd["seed_fraction_min"] = (
                min(len(ys) for ys in petal_seeds) / total_cands if petal_seeds else 0.0
            )
            if failed is not None:
                diag["stop"] = f"petal {failed} has no qualifying seed set in round {t}"
                break

            extended: list[list[int]] = []
            ext_fracs = []
            kappa_trails = []
            for ys in petal_seeds:
                small = SetFamily(
                    sub_ground,
                    quota,
                    tuple(mask_of(to_small[e] for e in elements_of(y)) for y in ys),
                )
                ext = iterated_extend(small, ext_size)
                kappa_trails.append([[l, kv] for l, kv in ext.kappa_steps])
                big = sorted(
                    (mask_of(from_small[e] for e in elements_of(u)) for u in ext.family.masks),
                    key=elements_of,
                )
                extended.append(big)
                ext_fracs.append(len(big) / math.comb(s, ext_size))
            rd["ext_fraction_min"] = min(ext_fracs)
            rd["kappa_trails"] = kappa_trails

            reps = _disjoint_tuple(extended)
            if reps is None:
                diag["stop"] = f"no pairwise-disjoint representatives in round {t}"
                break

            new_fams = []
            new_seeds = []
            ok = True
            for i, (fam, rep) in enumerate(zip(cur, reps)):
                y_dag = next(
                    (y for y in sorted(petal_seeds[i], key=elements_of) if y & ~rep == 0),
                    None,
                )
                if y_dag is None:
                    ok = False
                    diag["stop"] = (
                        f"representative of petal {i} contains no qualifying seed "
                        f"in round {t}"
                    )
                    break
                bad = strip & ~y_dag
                new_fams.append(fam.take(u for u in fam.masks if not (u & bad)))
                new_seeds.append(z.petal_seeds[i] | y_dag)
            if not ok:
                break

            emitted.append(
                PartialSunflower(
                    core=z.core,
                    subsplit=Subsplit(split, tuple(sorted(z.lift_target.indices))),
                    petal_seeds=tuple(new_seeds),
                    petal_families=tuple(new_fams),
                )
            )
            diag["emitted"] += 1
            used = set().union(*(set(f.masks) for f in new_fams))
            cur = [f.take(u for u in f.masks if u not in used) for f in cur]

        removed = [o - len(f) for o, f in zip(orig_sizes, cur)]
        root = math.sqrt(cfg.eps)
        diag["removed"] = removed
        diag["removed_window_ok"] = all(
            0.5 * root * o < d < 2.0 * root * o for o, d in zip(orig_sizes, removed)
        )

    # final Z-iv normalization of every emitted element
    final: list[PartialSunflower] = []
    kept_fractions: list[float] = []
    for z in emitted:
        before = sum(len(f) for f in z.petal_families)
        fams = normalize_petals(list(z.petal_families))
        kept_fractions.append(sum(len(f) for f in fams) / before)
        final.append(
            PartialSunflower(
                core=z.core,
                subsplit=z.subsplit,
                petal_seeds=z.petal_seeds,
                petal_families=tuple(fams),
            )
        )

    out = PSF(tuple(final), r + 1)
    report = LiftReport(
        input_elements=len(zz_prime.elements),
        emitted=len(final),
        elements=elements_log,
        empty=len(final) == 0,
        normalization_kept_min=min(kept_fractions) if kept_fractions else None,
    )
    return LiftResult(out, report)


# ----------------------------------------------------------- full driver ----

@dataclass
class PipelineResult:
    success: bool
    certificate: Optional[SunflowerCertificate]
    reached_rank: int
    r0: int
    failure: Optional[str]
    trace: tuple[dict, ...]
    split: Optional[Split] = None

    def to_doc(self) -> dict:
        return {
            "success": self.success,
            "certificate": self.certificate.to_doc() if self.certificate else None,
            "reached_rank": self.reached_rank,
            "r0": self.r0,
            "failure": self.failure,
            "trace": list(self.trace),
        }


def extract_certificate(zz: PSF, original: SetFamily) -> Optional[SunflowerCertificate]:
    """One member per petal of some rank-m element, re-checked exactly.

    Returns None when no element yields k distinct members whose common
    pairwise intersection equals its core.
    """
    for z in zz.elements:
        picks: list[int] = []
        used: set[int] = set()
        for fam in z.petal_families:
            pick = next((u for u in fam.masks if u not in used), None)
            if pick is None:
                break
            picks.append(pick)
            used.add(pick)
        if len(picks) != z.k:
            continue
        if any(u not in original for u in picks):
            continue
        if is_sunflower(picks) == z.core:
            return SunflowerCertificate(tuple(picks), z.core)
    return None


def _target_violations(rec: ReconstructReport, lif: LiftReport, cfg: PipelineConfig) -> list[str]:
    """Quantitative-target misses, enforced only under assert_targets."""
    out = []
    if not rec.ratio_ok:
        out.append(
            f"reconstruct kept ratio {rec.ratio:.4g} <= eps/2 = {rec.ratio_target:.4g}"
        )
    if rec.d_ok is False:
        out.append(f"per-singleton link ratio {rec.d_max:.4g} >= 1 on a new strip")
    floor_frac = 1.0 - cfg.lift_slack
    for diag in lif.elements:
        for rd in diag.get("rounds", []):
            if rd.get("seed_fraction_min", 1.0) <= floor_frac:
                out.append(
                    f"element {diag['element']} round {rd['round']}: qualifying seed "
                    f"fraction {rd['seed_fraction_min']:.4g} <= {floor_frac:.4g}"
                )
        if diag.get("removed_window_ok") is False:
            out.append(
                f"element {diag['element']}: removed member mass {diag['removed']} "
                "outside the sqrt(eps) window"
            )
    return out


def run_pipeline(
    family: SetFamily,
    k: int,
    cfg: PipelineConfig,
    seed: int = 0,
    max_rounds: Optional[int] = None,
    assert_targets: bool = False,
    split_tries: int = 512,
) -> PipelineResult:
    """Full construction on one family; never raises past config validation.

    Deterministic for fixed (family, k, cfg, seed). The trace records one
    dict per stage with the quantities each stage measured.
    """
    if cfg.k != k:
        raise ValueError(f"k = {k} disagrees with cfg.k = {cfg.k}")
    n, m = family.ground.n, family.m
    if m < 1:
        raise ValueError("pipeline needs member size >= 1")
    if n % m:
        raise ValueError(f"member size {m} must divide n = {n}; pad the ground set first")
    if len(family) == 0:
        raise ValueError("pipeline needs a nonempty family")

    state = np.random.SeedSequence(seed).generate_state(m + 2)
    trace: list[dict] = []

    dense = find_dense_split(family, seed=int(state[0]), max_tries=split_tries)
    trace.append(
        {
            "stage": "dense-split",
            "retained": dense.achieved,
            "target": float(dense.target),
            "mode": dense.mode,
            "strips": dense.split.strip_lists(),
        }
    )

    cores = find_cores(dense.on_split, dense.split, cfg)
    trace.append(
        {
            "stage": "find-cores",
            "r0": cores.r0,
            "num_cores": len(cores.cores),
            "f_hat_size": len(cores.f_hat),
            "source_size": cores.source_size,
        }
    )

    zz = base_psf(cores, k)
    val = validate_psf(zz, cores.f_hat, cfg, cores.r0)
    trace.append(
        {
            "stage": "base-psf",
            "rank": zz.rank,
            "elements": len(zz),
            "f_zz_size": val.f_zz_size,
            "valid": val.ok,
            "checks": dict(val.checks),
        }
    )

    def fail(reason: str, rank: int) -> PipelineResult:
        return PipelineResult(False, None, rank, cores.r0, reason, tuple(trace), dense.split)

    if not val.ok:
        return fail(f"base PSF invalid: {'; '.join(val.messages)}", zz.rank)

    iteration = 0
    while zz.rank < m:
        if max_rounds is not None and iteration >= max_rounds:
            return fail(f"iteration cap {max_rounds} reached", zz.rank)

        rec = reconstruct(zz, cfg)
        trace.append(
            {
                "stage": "reconstruct",
                "rank": zz.rank,
                "input_size": rec.report.input_size,
                "output_size": rec.report.output_size,
                "ratio": rec.report.ratio,
                "ratio_ok": rec.report.ratio_ok,
                "d_max": rec.report.d_max,
                "groups": rec.report.groups,
                "dropped": len(rec.report.dropped),
            }
        )
        if rec.report.empty:
            return fail("reconstruction emptied the PSF", zz.rank)
        val = validate_psf(rec.psf, cores.f_hat, cfg, cores.r0)
        if not val.ok:
            return fail(f"reconstructed PSF invalid: {'; '.join(val.messages)}", zz.rank)

        lif = lift_rank(rec.psf, cfg, seed=int(state[1 + iteration]))
        trace.append(
            {
                "stage": "lift",
                "rank": zz.rank + 1,
                "emitted": lif.report.emitted,
                "elements": lif.report.elements,
                "normalization_kept_min": lif.report.normalization_kept_min,
            }
        )
        if lif.report.empty:
            return fail("the rank lift produced no elements", zz.rank)
        val = validate_psf(lif.psf, cores.f_hat, cfg, cores.r0)
        trace.append(
            {
                "stage": "validate",
                "rank": lif.psf.rank,
                "f_zz_size": val.f_zz_size,
                "valid": val.ok,
                "checks": dict(val.checks),
            }
        )
        if not val.ok:
            return fail(f"lifted PSF invalid: {'; '.join(val.messages)}", lif.psf.rank)
        if assert_targets:
            violations = _target_violations(rec.report, lif.report, cfg)
            if violations:
                return fail(
                    "quantitative targets missed: " + "; ".join(violations), lif.psf.rank
                )

        zz = lif.psf
        iteration += 1

    cert = extract_certificate(zz, family)
    if cert is None:
        return fail("no rank-m element yielded a verified sunflower", zz.rank)
    trace.append({"stage": "extract", "core": list(elements_of(cert.core)), "k": cert.k})
    return PipelineResult(True, cert, zz.rank, cores.r0, None, tuple(trace), dense.split)
