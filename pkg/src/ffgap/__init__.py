"""Finite-size certification of spectral gaps for frustration-free models."""

from .coarse_grain import (
    CellRejection,
    EffectiveModel1D,
    EffectiveModel2D,
    classify_2d,
    classify_translate,
    effective_1d,
    effective_2d,
    group_1d,
    group_2d,
    inflate_range,
    plaquette_model_hamiltonian,
)
from .coefficients import (
    SQRT6,
    Deformation1D,
    Deformation2D,
    WeightTable,
    autocorr_1d,
    coeffs_1d,
    coeffs_2d,
    optimal_x,
    prefactor_1d,
    threshold_1d,
    threshold_2d,
    weight_table,
)
from .criteria import (
    Certificate,
    SuiteConfig,
    certify_2d,
    certify_periodic,
    certify_quasi1d,
    certify_thm1,
    certify_thm2,
    chiral_exclusion,
    verify_inequality_suite,
)
from .lattice import (
    Coord,
    InteractionShape,
    Patch,
    PlaquetteSet,
    SiteRegion,
    box_region,
    chain_region,
    collar_centers,
    patch,
    plaquette_ball,
    plaquette_distance,
    plaquette_set,
    rhomboid_sites,
)
from .models import (
    ModelSpec,
    aklt,
    commuting_cell_2d,
    frustration_free,
    load,
    random_cell_2d,
    random_ff,
    save,
    singlet_chain,
)
from .operators import (
    ChainModel,
    EnlargedChainApplier,
    InteractionCell,
    LocalProjector,
    SparseHermitianOperator,
    chain_hamiltonian,
    embed,
    enlarged_hamiltonian,
    enlarged_terms,
    q_and_f,
    region_hamiltonian,
    subchain_operator,
)
from .spectra import GapProfile, GapReport, gap_profile, psd_margin, spectral_gap

__version__ = "0.1.0"

__all__ = [
    "CellRejection",
    "Certificate",
    "ChainModel",
    "Coord",
    "Deformation1D",
    "Deformation2D",
    "EffectiveModel1D",
    "EffectiveModel2D",
    "EnlargedChainApplier",
    "GapProfile",
    "GapReport",
    "InteractionCell",
    "InteractionShape",
    "LocalProjector",
    "ModelSpec",
    "Patch",
    "PlaquetteSet",
    "SiteRegion",
    "SparseHermitianOperator",
    "SuiteConfig",
    "SQRT6",
    "WeightTable",
    "aklt",
    "autocorr_1d",
    "box_region",
    "certify_2d",
    "certify_periodic",
    "certify_quasi1d",
    "certify_thm1",
    "certify_thm2",
    "chain_hamiltonian",
    "chain_region",
    "chiral_exclusion",
    "classify_2d",
    "classify_translate",
    "coeffs_1d",
    "coeffs_2d",
    "collar_centers",
    "commuting_cell_2d",
    "effective_1d",
    "effective_2d",
    "embed",
    "enlarged_hamiltonian",
    "enlarged_terms",
    "frustration_free",
    "gap_profile",
    "group_1d",
    "group_2d",
    "inflate_range",
    "load",
    "optimal_x",
    "patch",
    "plaquette_ball",
    "plaquette_distance",
    "plaquette_model_hamiltonian",
    "plaquette_set",
    "prefactor_1d",
    "psd_margin",
    "q_and_f",
    "random_cell_2d",
    "random_ff",
    "region_hamiltonian",
    "rhomboid_sites",
    "save",
    "singlet_chain",
    "spectral_gap",
    "subchain_operator",
    "threshold_1d",
    "threshold_2d",
    "weight_table",
]
