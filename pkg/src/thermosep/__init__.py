"""Separability and entanglement of thermal states of coupled harmonic oscillators."""

__version__ = "0.1.0"

from .errors import (
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NotPSDError,
    NotSymmetricError,
    SingularSpectrumError,
    SpecFormatError,
    SymmetryCertificateError,
    ThermoSepError,
    ZeroModeError,
)
from .gaussian_core import (
    CovarianceMatrix,
    Ordering,
    SymplecticTransform,
    apply_symplectic,
    matrix_function,
    psd_margin,
    reorder,
    standard_form,
    symplectic_eigenvalues,
)
from .hamiltonians import (
    FrequencySpectrum,
    PotentialMatrix,
    QuadraticCoefficients,
    RingParams,
    is_shift_invariant,
    load_spec,
    parse_spec,
    ring_dispersion,
    ring_potential,
    spectrum_from_potential,
    spectrum_from_quadratic,
)
from .measures import (
    PMeasureResult,
    SqueezedPair,
    eof_correction,
    eof_lower_bound,
    hyperbolic_entropy,
    p_measure,
    squeezed_cm,
)
from .septemp import (
    CriticalResult,
    Method,
    SeparabilityVerdict,
    Status,
    beta_of_omega0,
    check_full_separability,
    critical_beta,
    rough_bound,
    scaling_s,
    sigma,
)
from .thermal import ThermalPoint, eta_block, normal_mode_cm, thermal_cm
