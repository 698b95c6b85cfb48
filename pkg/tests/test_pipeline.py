import pytest

from sunflowerkit import (
    PSF,
    PartialSunflower,
    PipelineConfig,
    SetFamily,
    Split,
    base_psf,
    extract_certificate,
    find_cores,
    is_sunflower,
    lift_rank,
    reconstruct,
    run_pipeline,
)
from sunflowerkit.bitsets import elements_of, mask_of
from sunflowerkit.splits import Subsplit, family_on_subsplit, full_subsplit


def planted_cfg(**overrides):
    base = dict(
        k=3,
        eps=0.5,
        h=1.0,
        c=1.0,
        b=3.0,
        delta=1 / 7,
        core_cap=1.0,
        f_theta=0.9,
        f_rho=3.0,
        reconstruct_ratio=2.5,
        lift_slack=0.9,
    )
    base.update(overrides)
    return PipelineConfig(**base)


PLANTED = SetFamily.complete(14, 2)


def test_pipeline_succeeds_on_planted_instance():
    res = run_pipeline(PLANTED, 3, planted_cfg(), seed=0)
    assert res.success, res.failure
    assert res.reached_rank == 2 and res.r0 == 0
    cert = res.certificate
    assert cert is not None and cert.k == 3
    assert cert.verify()
    assert is_sunflower(list(cert.petals)) == cert.core
    for p in cert.petals:
        assert p in PLANTED
    # every validation the driver ran must have passed
    vals = [t for t in res.trace if t["stage"] in ("base-psf", "validate")]
    assert vals and all(t["valid"] for t in vals)
    stages = [t["stage"] for t in res.trace]
    assert stages[0] == "dense-split" and stages[-1] == "extract"


def test_pipeline_deterministic():
    a = run_pipeline(PLANTED, 3, planted_cfg(), seed=5)
    b = run_pipeline(PLANTED, 3, planted_cfg(), seed=5)
    assert a.to_doc() == b.to_doc()


def test_pipeline_assert_targets_flags_desk_scale_misses():
    # the idealized removed-mass window needs the closed-form constants;
    # at toy scale the lift removes too little, and only the strict mode
    # turns that diagnostic into a failure
    relaxed = run_pipeline(PLANTED, 3, planted_cfg(), seed=0)
    assert relaxed.success
    strict = run_pipeline(PLANTED, 3, planted_cfg(), seed=0, assert_targets=True)
    assert not strict.success
    assert "window" in strict.failure
    assert strict.reached_rank == 2  # the construction itself still finished


def test_pipeline_assert_targets_catches_link_ratio():
    # b = 7 pushes the per-singleton link ratio to exactly 7*7/49 = 1
    relaxed = run_pipeline(PLANTED, 3, planted_cfg(b=7.0), seed=0)
    assert relaxed.success
    strict = run_pipeline(PLANTED, 3, planted_cfg(b=7.0), seed=0, assert_targets=True)
    assert not strict.success
    assert "link ratio" in strict.failure


def test_pipeline_iteration_cap():
    res = run_pipeline(PLANTED, 3, planted_cfg(), seed=0, max_rounds=1)
    assert not res.success
    assert "cap" in res.failure
    assert res.reached_rank == 1


def test_pipeline_smaller_k2_instance():
    fam = SetFamily.complete(6, 2)
    # f_rho = 2.6 keeps f above the counts at levels 1 and 2 (3.12 > 3,
    # 1.2 > 1) so the descent bottoms out at the empty core
    cfg = PipelineConfig(
        k=2, eps=0.5, h=1.0, c=1.0, b=2.0, delta=1 / 3, core_cap=1.0,
        f_theta=0.9, f_rho=2.6, reconstruct_ratio=1.6, lift_slack=0.9,
    )
    res = run_pipeline(fam, 2, cfg, seed=1)
    assert res.success, res.failure
    assert res.r0 == 0
    assert res.certificate.verify()


def test_pipeline_input_validation():
    with pytest.raises(ValueError):
        run_pipeline(PLANTED, 2, planted_cfg(), seed=0)  # k disagrees with cfg
    with pytest.raises(ValueError):
        run_pipeline(SetFamily.complete(7, 2), 3, planted_cfg())  # m does not divide n
    with pytest.raises(ValueError):
        run_pipeline(SetFamily.from_elements(14, 2, []), 3, planted_cfg())


def test_pipeline_reports_reconstruct_collapse():
    # the bipartite 7x7 family is fragile: under most splits the on-split
    # subfamily is irregular and the reconstruct filter (ratio 2.5) removes
    # everything, so the driver must stop with an honest failure
    pairs = [[i, j] for i in range(1, 8) for j in range(8, 15)]
    fam = SetFamily.from_elements(14, 2, pairs)
    res = run_pipeline(fam, 3, planted_cfg(), seed=0)
    assert not res.success
    assert "empt" in res.failure or "no elements" in res.failure
    assert res.trace[-1]["stage"] in ("reconstruct", "lift", "validate")


def _rank0_psf():
    # mirror the driver: cores come from the on-split subfamily, not the raw one
    split = Split.from_strip_lists(14, [list(range(1, 8)), list(range(8, 15))])
    on = family_on_subsplit(PLANTED, full_subsplit(split))
    cores = find_cores(on, split, planted_cfg())
    return base_psf(cores, 3), cores


def test_reconstruct_keeps_everything_on_regular_input():
    zz, cores = _rank0_psf()
    res = reconstruct(zz, planted_cfg())
    assert res.report.input_size == 49
    assert res.report.output_size == 49
    assert res.report.ratio == 1.0 and res.report.ratio_ok
    assert not res.report.dropped
    for z in res.psf.elements:
        assert z.lift_target is not None
        assert z.lift_target.rank == 1
    # every on-split element has degree 7, above the squared ratio 6.25
    assert res.psf.rank == 0


def test_lift_builds_disjoint_seeds():
    zz, cores = _rank0_psf()
    rec = reconstruct(zz, planted_cfg())
    lif = lift_rank(rec.psf, planted_cfg(), seed=0)
    assert lif.report.emitted >= 1
    assert lif.psf.rank == 1
    for z in lif.psf.elements:
        assert z.rank == 1
        seeds = list(z.petal_seeds)
        assert all(s and s & (s - 1) == 0 for s in seeds)  # quota 1 -> singletons
        assert len({s for s in seeds}) == 3  # pairwise disjoint
        for y, fam in zip(seeds, z.petal_families):
            for u in fam.masks:
                strip_part = u & z.subsplit.strips[0]
                assert strip_part & ~y == 0  # members stay inside their seed
    diag = lif.report.elements[0]
    assert diag["quota"] == 1
    assert diag["rounds"][0]["h_gamma"] == [True, True, True]


def test_extract_certificate_requires_distinct_members():
    split = Split.from_strip_lists(4, [[1, 2], [3, 4]])
    fam = SetFamily.from_elements(4, 2, [[1, 3]])
    z = PartialSunflower(
        core=mask_of([1, 3]),
        subsplit=Subsplit(split, (0, 1)),
        petal_seeds=(0, 0),
        petal_families=(fam, fam),
    )
    assert extract_certificate(PSF((z,), 2), SetFamily.complete(4, 2)) is None


def test_extract_certificate_checks_core():
    split = Split.from_strip_lists(4, [[1, 2], [3, 4]])
    fam_a = SetFamily.from_elements(4, 2, [[1, 3]])
    fam_b = SetFamily.from_elements(4, 2, [[1, 4]])
    z = PartialSunflower(
        core=0,  # claimed core is empty but {1,3} and {1,4} share 1
        subsplit=Subsplit(split, (0, 1)),
        petal_seeds=(mask_of([3]), mask_of([4])),
        petal_families=(fam_a, fam_b),
    )
    assert extract_certificate(PSF((z,), 2), SetFamily.complete(4, 2)) is None
    z_ok = PartialSunflower(
        core=mask_of([1]),
        subsplit=Subsplit(split, (0, 1)),
        petal_seeds=(mask_of([3]), mask_of([4])),
        petal_families=(fam_a, fam_b),
    )
    cert = extract_certificate(PSF((z_ok,), 2), SetFamily.complete(4, 2))
    assert cert is not None and cert.core == mask_of([1])
    assert cert.verify()
