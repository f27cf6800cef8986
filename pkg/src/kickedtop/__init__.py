"""Kicked-top chaos toolkit.

Classical map diagnostics (Lyapunov grids, KS entropy, Poincare sections),
Floquet quasienergy spectra and their spacing-ratio statistics, Husimi
functions of eigenstates, and the phase-space overlap index machinery that
tracks how the fraction of mixed eigenstates decays towards the
semiclassical limit.
"""

__version__ = "0.1.0"

from .classical import (
    DEFAULT_TANGENT,
    ClassificationGrid,
    KickParams,
    LyapunovGrid,
    SphereAngles,
    TangentVector,
    UnitSpinVector,
    angles_to_vector,
    benettin_exponent,
    classical_step,
    classify_grid,
    ks_entropy,
    lambda_cut_from_histogram,
    lyapunov_exponent,
    lyapunov_grid,
    poincare_section,
    tangent_step,
    vector_to_angles,
)
from .config import ALPHA_DEFAULT, ExperimentConfig
from .errors import ConfigError, NumericalError
from .floquet import (
    FloquetOperator,
    QuasiSpectrum,
    SpinQuantum,
    build_floquet,
    diagonalize,
    jx_matrix,
    load_eigenvectors,
    parity_sector_phases,
    save_eigenvectors,
    wigner_rotation,
)
from .grids import PhaseSpaceGrid
from .husimi import (
    CoherentFrame,
    EnsembleOverlaps,
    HusimiField,
    PMHistogram,
    PowerLawFit,
    ZetaPoint,
    build_coherent_frame,
    coherent_state,
    husimi,
    husimi_norm,
    husimi_reduce,
    mixed_fraction,
    overlap_index,
    pm_histogram,
    power_law_fit,
    zeta_scan,
)
from .spectral import (
    R_COE,
    R_POISSON,
    RatioSummary,
    merge_degenerate,
    pooled_mean_ratio,
    rescale_mean,
    rescaled_mean_ratio,
    spacing_ratios,
    spacings,
)
