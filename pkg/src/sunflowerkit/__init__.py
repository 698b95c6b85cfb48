"""Toolkit for spread set families, strip splits, and sunflower construction.

The package works on families of equal-size subsets of {1..n} stored as
integer bitmasks. It provides the spread (Gamma) condition checker, sparsity
and link operators, l-extensions with sparsity monotonicity checks, strip
splits, exact sunflower search and extremal tables, a norm-concentration
sampler, and the staged partial-sunflower pipeline that lifts low-rank
structure back to full rank and extracts a verified sunflower certificate.

Set SUNFLOWERKIT_BACKEND=numpy or =numba to pin the kernel backend; the
default picks the compiled kernels when numba imports cleanly.
"""

from .bitsets import elements_of, mask_of
from .egt import EgtParams, EgtReport, egt_fraction
from .extensions import (
    ExtensionResult,
    KappaCheck,
    Phase2Check,
    check_kappa_monotone,
    check_phase2,
    extend,
    iterated_extend,
    log_ratio,
)
from .family import (
    GammaReport,
    GroundSet,
    SetFamily,
    gamma_check,
    link,
    norm,
    sparsity,
)
from .io import FamilyFormatError, family_from_doc, family_to_doc, load_family, save_family
from .pipeline import (
    LiftReport,
    LiftResult,
    PipelineResult,
    ReconstructReport,
    ReconstructResult,
    extract_certificate,
    lift_rank,
    reconstruct,
    run_pipeline,
)
from .psf import (
    PSF,
    CoresResult,
    PartialSunflower,
    PipelineConfig,
    PipelineConfigError,
    PsfValidation,
    base_psf,
    find_cores,
    normalize_petals,
    validate_psf,
)
from .splits import (
    DenseSplitError,
    DenseSplitResult,
    Split,
    Subsplit,
    all_splits,
    count_splits,
    family_on_subsplit,
    find_dense_split,
    full_subsplit,
    is_on_subsplit,
    random_split,
)
from .sunflowers import (
    BoundRow,
    ExtremalResult,
    SunflowerCertificate,
    bound_table,
    exhaustive_sunflower_search,
    find_sunflower,
    is_sunflower,
    max_sunflower_free,
)

__version__ = "0.1.0"

__all__ = [
    "BoundRow",
    "CoresResult",
    "DenseSplitError",
    "DenseSplitResult",
    "EgtParams",
    "EgtReport",
    "ExtensionResult",
    "ExtremalResult",
    "FamilyFormatError",
    "GammaReport",
    "GroundSet",
    "KappaCheck",
    "LiftReport",
    "LiftResult",
    "PSF",
    "PartialSunflower",
    "Phase2Check",
    "PipelineConfig",
    "PipelineConfigError",
    "PipelineResult",
    "PsfValidation",
    "ReconstructReport",
    "ReconstructResult",
    "SetFamily",
    "Split",
    "Subsplit",
    "SunflowerCertificate",
    "all_splits",
    "base_psf",
    "bound_table",
    "check_kappa_monotone",
    "check_phase2",
    "count_splits",
    "egt_fraction",
    "elements_of",
    "exhaustive_sunflower_search",
    "extend",
    "extract_certificate",
    "family_from_doc",
    "family_on_subsplit",
    "family_to_doc",
    "find_cores",
    "find_dense_split",
    "find_sunflower",
    "full_subsplit",
    "gamma_check",
    "is_on_subsplit",
    "is_sunflower",
    "iterated_extend",
    "lift_rank",
    "link",
    "load_family",
    "log_ratio",
    "mask_of",
    "max_sunflower_free",
    "norm",
    "normalize_petals",
    "random_split",
    "reconstruct",
    "run_pipeline",
    "save_family",
    "sparsity",
    "validate_psf",
]
