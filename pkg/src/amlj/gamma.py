"""Gamma function of ring elements and the Gamma class.

For ``alpha = a0 + n`` with ``n`` nilpotent,

    Gamma(alpha) = exp(logGamma(a0) + sum_{j>=1} psi^(j-1)(a0) n^j / j!).

The split into a scalar logarithm and a nilpotent exponent is exposed by
:func:`log_gamma_class` so callers can handle huge arguments without ever
forming Gamma(a0) itself.
"""

from __future__ import annotations

import cmath
import math
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .ring import (
    ClassValue,
    RingPresentation,
    as_class,
    basis_vector,
    exp_class,
    inverse,
    mul,
    nilpotent_part,
    unit,
)
from .special import EULER_GAMMA, log_gamma, polygamma, zeta_int

__all__ = [
    "log_gamma_class",
    "gamma_of_class",
    "reciprocal_gamma",
    "gamma_hat",
    "gamma_hat_from_chern_character",
    "x3_divisors",
    "x3_target_class",
]


def log_gamma_class(alpha: ClassValue, ring: RingPresentation) -> tuple[complex, ClassValue]:
    """Return ``(L, N)`` with ``Gamma(alpha) = exp(L) * exp_class(N)``.

    ``L`` is the scalar log Gamma of the degree-0 part and ``N`` is nilpotent.
    """
    alpha = as_class(alpha, ring)
    a0 = complex(alpha[0])
    try:
        L = log_gamma(a0)
    except DomainError as exc:
        raise DomainError(f"Gamma of a class with degree-0 part at a pole ({a0})") from exc
    n = nilpotent_part(alpha)
    N = np.zeros(ring.size, dtype=complex)
    power = unit(ring)
    for j in range(1, ring.dim_c + 1):
        power = mul(power, n, ring)
        if not np.any(power):
            break
        N = N + polygamma(j - 1, a0) / math.factorial(j) * power
    return L, N


def gamma_of_class(alpha: ClassValue, ring: RingPresentation) -> ClassValue:
    L, N = log_gamma_class(alpha, ring)
    return cmath.exp(L) * exp_class(N, ring)


def reciprocal_gamma(alpha: ClassValue, ring: RingPresentation) -> ClassValue:
    return inverse(gamma_of_class(alpha, ring), ring)


def gamma_hat(divisor_classes: Sequence[ClassValue], ring: RingPresentation) -> ClassValue:
    """Product of Gamma(1 + d) over the given Chern roots."""
    total = unit(ring)
    one = unit(ring)
    for d in divisor_classes:
        d = as_class(d, ring)
        if d[0] != 0:
            raise ValidationError("Chern roots must have zero degree-0 part")
        total = mul(total, gamma_of_class(one + d, ring), ring)
    return total


def gamma_hat_from_chern_character(divisor_classes: Sequence[ClassValue], ring: RingPresentation) -> ClassValue:
    """The same class through exp(-gamma c1 + sum_k (-1)^k (k-1)! zeta(k) ch_k)."""
    roots = [as_class(d, ring) for d in divisor_classes]
    c1 = sum(roots, np.zeros(ring.size, dtype=complex))
    expo = -EULER_GAMMA * c1
    for k in range(2, ring.dim_c + 1):
        ch_k = np.zeros(ring.size, dtype=complex)
        for d in roots:
            p = unit(ring)
            for _ in range(k):
                p = mul(p, d, ring)
            ch_k = ch_k + p / math.factorial(k)
        expo = expo + (-1) ** k * math.factorial(k - 1) * zeta_int(k) * ch_k
    return exp_class(expo, ring)


def x3_divisors(ring: RingPresentation) -> list[ClassValue]:
    """Toric divisors of X3: x1 four times, x2, and x2 - 3 x1."""
    if ring.name != "X3":
        raise ValidationError("x3 data requested on a ring that is not X3")
    x1 = basis_vector(ring, "x1")
    x2 = basis_vector(ring, "x2")
    return [x1, x1, x1, x1, x2, x2 - 3 * x1]


def x3_target_class(ring: RingPresentation) -> ClassValue:
    """Gamma-class prediction for the limit direction of the X3 coefficients.

    Gamma(1+x1)^4 Gamma(1+x2) Gamma(1-3x1+x2) * P(2 pi i x1, 2 pi i x2) with
    P(y1, y2) = (y2 - 3 y1)(1 - y1/2 + y1^2/2 - 5 y1^3/24).
    """
    gh = gamma_hat(x3_divisors(ring), ring)
    one = unit(ring)
    y1 = 2j * math.pi * basis_vector(ring, "x1")
    y2 = 2j * math.pi * basis_vector(ring, "x2")
    y1sq = mul(y1, y1, ring)
    y1cu = mul(y1sq, y1, ring)
    poly = mul(y2 - 3 * y1, one - y1 / 2 + y1sq / 2 - 5 * y1cu / 24, ring)
    return mul(gh, poly, ring)
