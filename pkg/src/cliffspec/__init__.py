"""Spectral theory of right-linear operators on finite-dimensional Clifford modules."""

__version__ = "0.1.0"

from .clifford_core import CliffordNumber, Paravector, SliceUnit, chi, chi_inverse, clifford_mul
from .clifford_module import CliffordOperator, CliffordVector, inner_product
from .config import DEFAULT_TOLERANCES, Tolerances
from .s_spectrum import SpectralPoint, SpectrumSet, s_spectrum
from .spectral_measure import RnMeasure, SpectralMeasureFS

__all__ = [
    "__version__",
    "CliffordNumber",
    "Paravector",
    "SliceUnit",
    "chi",
    "chi_inverse",
    "clifford_mul",
    "CliffordOperator",
    "CliffordVector",
    "inner_product",
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "SpectralPoint",
    "SpectrumSet",
    "s_spectrum",
    "RnMeasure",
    "SpectralMeasureFS",
]
