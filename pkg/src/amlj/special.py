"""Complex log-Gamma, polygamma, and zeta at integers.

All routines shift the argument to large real part with the functional
recurrence and then use the Stirling / Bernoulli asymptotic series.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "EULER_GAMMA",
    "POLYGAMMA_MAX_ORDER",
    "bernoulli",
    "log_gamma",
    "polygamma",
    "polygamma_table",
    "PolygammaTable",
    "zeta_int",
]

EULER_GAMMA = 0.57721566490153286060651209
POLYGAMMA_MAX_ORDER = 16

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_STIRLING_SHIFT = 15.0
_REFLECT_BELOW = -20.0


@lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple[Fraction, ...]:
    b = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        binom = 1
        for k in range(m):
            acc += binom * b[k]
            binom = binom * (m + 1 - k) // (k + 1)
        b.append(-acc / (m + 1))
    return tuple(b)


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (convention B_1 = -1/2)."""
    return _bernoulli_table(max(n, 40))[n]


def _is_pole(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


# ---------------------------------------------------------------------------
# log Gamma


def _stirling_log_gamma(z: complex) -> complex:
    s = (z - 0.5) * cmath.log(z) - z + _HALF_LOG_2PI
    zi = 1.0 / z
    z2 = zi * zi
    p = zi
    for k in range(1, 13):
        s += float(bernoulli(2 * k)) / (2 * k * (2 * k - 1)) * p
        p *= z2
    return s


def _log_gamma_shifted(z: complex) -> complex:
    """Recurrence up to Re z >= 15, then Stirling.  Valid off the negative axis."""
    n = max(0, math.ceil(_STIRLING_SHIFT - z.real))
    if n == 0:
        return _stirling_log_gamma(z)
    ks = z + np.arange(n)
    return _stirling_log_gamma(z + n) - complex(np.sum(np.log(ks)))


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma (cut along the negative real axis).

    Positive real arguments are routed to ``math.lgamma``.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("log_gamma of a non-finite argument")
    if _is_pole(z):
        raise DomainError(f"log_gamma has a pole at {z.real:g}")
    if z.imag == 0 and z.real > 0:
        return complex(math.lgamma(z.real), 0.0)
    if z.real >= _REFLECT_BELOW:
        return _log_gamma_shifted(z)
    if z.imag < 0:
        return log_gamma(z.conjugate()).conjugate()
    # reflection: log G(z) = log pi - log sin(pi z) - log G(1 - z), up to 2 pi i k
    w = 1j * math.pi * z
    if z.imag > 0:
        log_sin = -w + 1j * math.pi / 2 - math.log(2.0) + cmath.log(1 - cmath.exp(2 * w))
    else:
        s = math.sin(math.pi * z.real)
        log_sin = complex(math.log(abs(s)), 0.0 if s > 0 else math.pi)
    cand = math.log(math.pi) - log_sin - _log_gamma_shifted(1 - z)
    # the imaginary part of the recurrence sum fixes the integer k
    n = math.ceil(_STIRLING_SHIFT - z.real)
    ks = z + np.arange(n)
    approx_im = _stirling_log_gamma(z + n).imag - float(np.sum(np.angle(ks)))
    k = round((approx_im - cand.imag) / (2 * math.pi))
    return cand + 2j * math.pi * k


# ---------------------------------------------------------------------------
# polygamma


def _polygamma_asymptotic(n: int, z: complex) -> complex:
    terms = 20
    if n == 0:
        s = cmath.log(z) - 0.5 / z
        z2 = 1.0 / (z * z)
        p = z2
        for k in range(1, terms + 1):
            s -= float(bernoulli(2 * k)) / (2 * k) * p
            p *= z2
        return s
    # (-1)^{n+1} [ (n-1)!/z^n + n!/(2 z^{n+1}) + sum B_2k (2k+n-1)!/((2k)! z^{2k+n}) ]
    zi = 1.0 / z
    s = math.factorial(n - 1) * zi**n + math.factorial(n) * 0.5 * zi ** (n + 1)
    p = zi ** (n + 2)
    z2 = zi * zi
    coef = Fraction(math.factorial(n + 1), 2)  # (2k+n-1)!/(2k)! at k=1
    for k in range(1, terms + 1):
        s += float(bernoulli(2 * k) * coef) * p
        p *= z2
        coef = coef * (2 * k + n) * (2 * k + n + 1) / ((2 * k + 1) * (2 * k + 2))
    return -s if n % 2 == 0 else s


def _pi_cot_derivative(n: int, z: complex) -> complex:
    """n-th derivative of pi*cot(pi*z) for |Im z| > 1/2 (q-series)."""
    if z.imag < 0:
        return _pi_cot_derivative(n, z.conjugate()).conjugate()
    # pi cot(pi z) = -i pi (1 + 2 sum_k q^k),  q = exp(2 pi i z),  |q| < e^{-pi}
    q = cmath.exp(2j * math.pi * z)
    total = 0j
    qk = 1 + 0j
    for k in range(1, 2000):
        qk *= q
        term = (2j * math.pi * k) ** n * qk
        total += term
        if abs(term) <= 1e-18 * abs(total):
            break
    if n == 0:
        return -1j * math.pi * (1 + 2 * total)
    return -2j * math.pi * total


def polygamma(n: int, z: complex) -> complex:
    """psi^(n)(z): derivative of order n of the digamma function."""
    if n < 0:
        raise DomainError("polygamma order must be non-negative")
    z = complex(z)
    if _is_pole(z):
        raise DomainError(f"polygamma has a pole at {z.real:g}")
    if z.real < 0 and abs(z.imag) > 0.5:
        # away from the poles the recurrence sum cancels badly; reflect instead
        # psi^(n)(z) = (-1)^n psi^(n)(1 - z) - d^n/dz^n [pi cot(pi z)]
        sign = 1.0 if n % 2 == 0 else -1.0
        return sign * polygamma(n, 1 - z) - _pi_cot_derivative(n, z)
    threshold = max(20.0, 2.0 * n + 14.0)
    shift = max(0, math.ceil(threshold - z.real))
    if abs(z) >= 4 * threshold and z.real > 0:
        shift = 0
    value = _polygamma_asymptotic(n, z + shift)
    if shift:
        ks = z + np.arange(shift)
        corr = complex(np.sum(ks ** (-(n + 1))))
        sign = -1.0 if n % 2 == 0 else 1.0
        value += sign * math.factorial(n) * corr
    return value


@dataclass(frozen=True)
class PolygammaTable:
    """psi^(0..K)(z) at one anchor point."""

    z: complex
    values: tuple[complex, ...]

    @property
    def order(self) -> int:
        return len(self.values) - 1


def polygamma_table(z: complex, K: int) -> PolygammaTable:
    if K > POLYGAMMA_MAX_ORDER:
        raise DomainError(f"polygamma order {K} exceeds the cap {POLYGAMMA_MAX_ORDER}")
    return PolygammaTable(complex(z), tuple(polygamma(k, z) for k in range(K + 1)))


# ---------------------------------------------------------------------------
# zeta


def zeta_int(k: int) -> float:
    """Riemann zeta at an integer k >= 2 (direct sum plus Euler-Maclaurin tail)."""
    if int(k) != k or k < 2:
        raise DomainError("zeta_int needs an integer k >= 2")
    k = int(k)
    N = 20
    parts = [float(n) ** (-k) for n in range(1, N)]
    parts.append(N ** (1 - k) / (k - 1))
    parts.append(0.5 * N ** (-k))
    rising = Fraction(k)  # k (k+1) ... (k+2j-2)
    for j in range(1, 12):
        parts.append(float(bernoulli(2 * j) * rising / math.factorial(2 * j)) * N ** (-k - 2 * j + 1))
        rising *= (k + 2 * j - 1) * (k + 2 * j)
    return math.fsum(parts)
