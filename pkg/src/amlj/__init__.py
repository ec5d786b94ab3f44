"""Asymptotics of quantum J-function coefficients.

Truncated cohomology rings, Gamma classes, coefficient streams for
projective spaces, products, hypersurfaces and toric manifolds, and tools
that fit and verify asymptotically Mittag-Leffler scalings.
"""

from __future__ import annotations

from .aml import AmlScaling, branch_shift, fit_scaling, scale_coefficients, verify_aml
from .errors import (
    AmlError,
    CacheFormatError,
    DomainError,
    NotInvertibleError,
    NumericQualityError,
    TruncationError,
    ValidationError,
)
from .evaluator import continuous_check, eval_series, ml_eval, rl_integral, rl_property_check
from .gamma import gamma_hat, gamma_of_class, x3_target_class
from .ring import RingPresentation, ScaledClass, projective_ring, tensor_ring, x3_ring
from .spectra import hypersurface_T, pn_spectrum, x3_spectrum
from .streams import CoeffStream, hypersurface_stream, product_stream, projective_stream, toric_stream

__version__ = "0.1.0"

__all__ = [
    "AmlError",
    "AmlScaling",
    "CacheFormatError",
    "CoeffStream",
    "DomainError",
    "NotInvertibleError",
    "NumericQualityError",
    "RingPresentation",
    "ScaledClass",
    "TruncationError",
    "ValidationError",
    "branch_shift",
    "continuous_check",
    "eval_series",
    "fit_scaling",
    "gamma_hat",
    "gamma_of_class",
    "hypersurface_T",
    "hypersurface_stream",
    "ml_eval",
    "pn_spectrum",
    "product_stream",
    "projective_ring",
    "projective_stream",
    "rl_integral",
    "rl_property_check",
    "scale_coefficients",
    "tensor_ring",
    "toric_stream",
    "verify_aml",
    "x3_ring",
    "x3_spectrum",
    "x3_target_class",
]
