"""Coefficient streams: the coefficients J_{rm} of t^{dim/2} J(t).

A stream records the ring, the step ``r``, the exponent class ``beta`` and
the coefficients as :class:`~amlj.ring.ScaledClass` values, so that

    t^{dim/2} J(t) = sum_m J_{rm} t^{rm + beta}.

Generators cover projective spaces, products, Fano hypersurfaces in P^N
(quantum Lefschetz) and toric I-functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import TruncationError, ValidationError
from .gamma import log_gamma_class
from .ring import (
    ClassValue,
    RingPresentation,
    ScaledClass,
    as_class,
    basis_vector,
    exp_class,
    inverse,
    mul,
    mul_many,
    power_int,
    projective_ring,
    restrict_hypersurface,
    scaled_from_log,
    scaled_mul,
    scaled_sum,
    tensor_ring,
    unit,
)

__all__ = [
    "CoeffStream",
    "ToricData",
    "projective_stream",
    "product_stream",
    "hypersurface_stream",
    "toric_stream",
    "derivative_stream",
    "synthetic_ml_stream",
    "projective_toric_data",
    "x3_toric_data",
    "DEFAULT_POINT_CAP",
]

DEFAULT_POINT_CAP = 200_000


@dataclass(frozen=True, eq=False)
class CoeffStream:
    ring: RingPresentation
    r: int
    beta: np.ndarray
    coeffs: tuple[ScaledClass, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        beta = as_class(self.beta, self.ring)
        if abs(beta[0].imag) > 0:
            raise ValidationError("the degree-0 part of beta must be real")
        if self.r < 1:
            raise ValidationError("stream step r must be >= 1")
        if not self.coeffs:
            raise ValidationError("a stream needs at least one coefficient")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def M(self) -> int:
        """Truncation: the largest available m."""
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def value(self, m: int) -> ClassValue:
        return self.coeffs[m].to_class()

    def mantissas(self) -> np.ndarray:
        return np.stack([c.mantissa for c in self.coeffs])

    def exponents(self) -> np.ndarray:
        return np.array([c.exp2 for c in self.coeffs], dtype=np.int64)

    def truncate(self, M: int) -> "CoeffStream":
        if M > self.M:
            raise TruncationError(f"stream has only {self.M} terms, {M} requested")
        return replace(self, coeffs=self.coeffs[: M + 1])

    def drop(self, k: int) -> "CoeffStream":
        """Remove the first k coefficients; beta moves up by k*r (same series)."""
        if not 0 <= k <= self.M:
            raise TruncationError(f"cannot drop {k} of {len(self)} coefficients")
        prov = {"generator": "drop", "k": k, "of": self.provenance}
        return replace(self, coeffs=self.coeffs[k:], beta=self.beta + k * self.r * unit(self.ring), provenance=prov)

    def with_beta(self, beta: ClassValue, tag: str = "beta-shift") -> "CoeffStream":
        prov = {"generator": tag, "of": self.provenance}
        return replace(self, beta=as_class(beta, self.ring), provenance=prov)


# ---------------------------------------------------------------------------
# projective spaces


def projective_stream(N: int, M: int) -> CoeffStream:
    """J_{(N+1)m} = prod_{k=1}^m (d + k)^{-(N+1)} on P^N."""
    if M < 1:
        raise ValidationError("M must be >= 1")
    ring = projective_ring(N)
    d = basis_vector(ring, 1)
    one = unit(ring)
    cur = ScaledClass.from_class(one)
    coeffs = [cur]
    for k in range(1, M + 1):
        step = inverse(power_int(k * one + d, N + 1, ring), ring)
        cur = scaled_mul(cur, ScaledClass.from_class(step), ring)
        coeffs.append(cur)
    return CoeffStream(
        ring=ring,
        r=N + 1,
        beta=ring.beta_default(),
        coeffs=tuple(coeffs),
        provenance={"generator": "projective", "N": N, "M": M},
    )


# ---------------------------------------------------------------------------
# products


def product_stream(sx: CoeffStream, sy: CoeffStream, M: int) -> CoeffStream:
    """Stream of X x Y: Cauchy product over r_X m_X + r_Y m_Y = r m."""
    ring = tensor_ring(sx.ring, sy.ring)
    rx, ry = sx.r, sy.r
    r = math.gcd(rx, ry)
    coeffs = []
    for m in range(M + 1):
        n = r * m
        terms = []
        for mx in range(n // rx + 1):
            rest = n - rx * mx
            if rest % ry:
                continue
            my = rest // ry
            if mx > sx.M or my > sy.M:
                raise TruncationError(
                    f"product coefficient m={m} needs X term {mx} (have {sx.M}) and Y term {my} (have {sy.M})"
                )
            a, b = sx.coeffs[mx], sy.coeffs[my]
            terms.append(ScaledClass.normalize(np.kron(a.mantissa, b.mantissa), a.exp2 + b.exp2))
        coeffs.append(scaled_sum(terms) if terms else ScaledClass(np.zeros(ring.size, complex), 0))
    beta = np.kron(sx.beta, unit(sy.ring)) + np.kron(unit(sx.ring), sy.beta)
    return CoeffStream(
        ring=ring,
        r=r,
        beta=beta,
        coeffs=tuple(coeffs),
        provenance={
            "generator": "product",
            "factors": [sx.provenance, sy.provenance],
            "basis_order": ring.meta["basis_order"],
            "M": M,
        },
    )


# ---------------------------------------------------------------------------
# hypersurfaces


def _poly_mul(a: list, b: list, n: int) -> list:
    out = [0] * n
    for i, x in enumerate(a):
        if x:
            for j in range(n - i):
                out[i + j] += x * b[j]
    return out


def _poly_inv_linear(k: int, n: int) -> list[Fraction]:
    """(x + k)^{-1} mod x^n."""
    return [Fraction((-1) ** j, k ** (j + 1)) for j in range(n)]


def _fractions_to_scaled(vec: Sequence[Fraction]) -> ScaledClass:
    """Exact conversion of rational coordinates into a ScaledClass."""
    nz = [abs(q) for q in vec if q]
    if not nz:
        return ScaledClass(np.zeros(len(vec), dtype=complex), 0)
    peak = max(nz)
    e = peak.numerator.bit_length() - peak.denominator.bit_length()
    scale = Fraction(2) ** (-e)
    mant = np.array([float(q * scale) for q in vec], dtype=complex)
    return ScaledClass.normalize(mant, e)


def hypersurface_stream(sx: CoeffStream, d: int, M: int) -> CoeffStream:
    """Quantum Lefschetz stream of a degree-d hypersurface in P^N.

    I_m = prod_{k=1}^{dm} (dx + k) * J^X_{r_X m}, restricted to the
    hypersurface.  When the index drops to 1 the series is multiplied by
    exp(-c0 t); that branch is computed in exact rational arithmetic because
    the convolution cancels many digits.
    """
    from .spectra import c0_correction

    prov = sx.provenance
    if prov.get("generator") != "projective":
        raise ValidationError("hypersurface_stream needs a projective_stream as ambient")
    N = int(prov["N"])
    ring = restrict_hypersurface(sx.ring, d)
    r_x = sx.r
    r_z = r_x - d
    if M > sx.M:
        raise TruncationError(f"ambient stream has {sx.M} terms, hypersurface needs {M}")
    n = ring.size  # = N
    if r_z > 1:
        x = basis_vector(ring, 1)
        one = unit(ring)
        lin = ScaledClass.from_class(one)
        coeffs = []
        for m in range(M + 1):
            if m:
                block = one.copy()
                for k in range(d * (m - 1) + 1, d * m + 1):
                    block = mul(block, d * x + k * one, ring)
                lin = scaled_mul(lin, ScaledClass.from_class(block), ring)
            jx = sx.coeffs[m]
            restricted = ScaledClass.normalize(jx.mantissa[:n], jx.exp2)
            coeffs.append(scaled_mul(lin, restricted, ring))
        c0 = 0.0
        exact = False
    else:
        c0 = c0_correction(sx, d)
        c0_q = Fraction(c0)
        current = [Fraction(1)] + [Fraction(0)] * (n - 1)
        I = [current]
        for m in range(1, M + 1):
            step = _poly_inv_linear(m, n)
            for _ in range(N + 1):
                current = _poly_mul(current, step, n)
            for k in range(d * (m - 1) + 1, d * m + 1):
                current = _poly_mul(current, [Fraction(k), Fraction(d)] + [Fraction(0)] * (n - 2), n)
            I.append(current)
        weights = [Fraction(1)]
        for j in range(1, M + 1):
            weights.append(weights[-1] * (-c0_q) / j)
        coeffs = []
        for m in range(M + 1):
            acc = [Fraction(0)] * n
            for j in range(m + 1):
                w = weights[j]
                src = I[m - j]
                for i in range(n):
                    if src[i]:
                        acc[i] += w * src[i]
            coeffs.append(_fractions_to_scaled(acc))
        exact = True
    return CoeffStream(
        ring=ring,
        r=r_z,
        beta=ring.beta_default(),
        coeffs=tuple(coeffs),
        provenance={"generator": "hypersurface", "N": N, "d": d, "c0": float(c0), "exact": exact, "M": M},
    )


# ---------------------------------------------------------------------------
# toric I-functions


@dataclass(frozen=True, eq=False)
class ToricData:
    """Toric divisors with multiplicities and their pairings with Mori generators."""

    divisors: tuple[tuple[np.ndarray, int], ...]
    mori_pairings: np.ndarray  # shape (n_divisors, n_generators)
    c1_degrees: tuple[int, ...]

    def __post_init__(self) -> None:
        pair = np.asarray(self.mori_pairings, dtype=np.int64)
        if pair.ndim != 2 or pair.shape[0] != len(self.divisors) or pair.shape[1] != len(self.c1_degrees):
            raise ValidationError("mori_pairings must have shape (n_divisors, n_generators)")
        object.__setattr__(self, "mori_pairings", pair)
        mults = np.array([m for _, m in self.divisors], dtype=np.int64)
        if np.any(mults < 1):
            raise ValidationError("divisor multiplicities must be positive")
        if not np.array_equal(mults @ pair, np.array(self.c1_degrees)):
            raise ValidationError("c1_degrees disagree with the divisor pairings")
        if min(self.c1_degrees) < 1:
            raise ValidationError("c1 degrees must all be >= 1 (Fano)")

    def check_ring(self, ring: RingPresentation) -> None:
        total = sum((m * as_class(D, ring) for D, m in self.divisors), np.zeros(ring.size, complex))
        if np.abs(total - ring.c1).max() > 1e-12:
            raise ValidationError("sum of toric divisors is not c1")
        for D, _ in self.divisors:
            if as_class(D, ring)[0] != 0:
                raise ValidationError("toric divisors must have zero degree-0 part")

    def lattice_points(self, n: int) -> Iterator[tuple[int, ...]]:
        """Non-negative combinations of the generators with c1-degree n."""
        degs = self.c1_degrees

        def rec(i: int, left: int) -> Iterator[tuple[int, ...]]:
            if i == len(degs) - 1:
                if left % degs[i] == 0:
                    yield (left // degs[i],)
                return
            for a in range(left // degs[i] + 1):
                for rest in rec(i + 1, left - a * degs[i]):
                    yield (a,) + rest

        return rec(0, n)


def projective_toric_data(ring: RingPresentation) -> ToricData:
    N = ring.dim_c
    return ToricData(divisors=((basis_vector(ring, 1), N + 1),), mori_pairings=np.array([[1]]), c1_degrees=(N + 1,))


def x3_toric_data(ring: RingPresentation) -> ToricData:
    """X3 = P(O + O(3)) over P^3; generators: section curve C and fibre f."""
    if ring.name != "X3":
        raise ValidationError("x3 toric data requested on a ring that is not X3")
    x1 = basis_vector(ring, "x1")
    x2 = basis_vector(ring, "x2")
    return ToricData(
        divisors=((x1, 4), (x2, 1), (x2 - 3 * x1, 1)),
        mori_pairings=np.array([[1, 0], [0, 1], [-3, 1]]),
        c1_degrees=(1, 2),
    )


class _FactorTable:
    """Cached (prod_{k=1}^p (D+k))^{-mult} for p >= 0 and prod_{k=p+1}^0 (D+k) ^mult for p < 0."""

    def __init__(self, D: np.ndarray, mult: int, ring: RingPresentation) -> None:
        self.D, self.mult, self.ring = D, mult, ring
        one = ScaledClass.from_class(unit(ring))
        self.base = {0: one}
        self.powered = {0: (one.mantissa, one.exp2)}

    def _base(self, p: int) -> ScaledClass:
        if p in self.base:
            return self.base[p]
        ring, one = self.ring, unit(self.ring)
        if p > 0:
            top = max(k for k in self.base if k >= 0)
            cur = self.base[top]
            for k in range(top + 1, p + 1):
                cur = scaled_mul(cur, ScaledClass.from_class(inverse(self.D + k * one, ring)), ring)
                self.base[k] = cur
        else:
            low = min(k for k in self.base if k <= 0)
            cur = self.base[low]
            for k in range(low - 1, p - 1, -1):
                # prod_{j=k+1}^{0} (D + j): the new factor is D + k + 1
                cur = scaled_mul(cur, ScaledClass.from_class(self.D + (k + 1) * one), ring)
                self.base[k] = cur
        return self.base[p]

    def get(self, p: int) -> tuple[np.ndarray, int]:
        if p not in self.powered:
            b = self._base(p)
            cur = b
            for _ in range(self.mult - 1):
                cur = scaled_mul(cur, b, self.ring)
            self.powered[p] = (cur.mantissa, cur.exp2)
        return self.powered[p]


def _sum_rows(mant: np.ndarray, exps: np.ndarray) -> ScaledClass:
    live = np.any(mant != 0, axis=1)
    if not live.any():
        return ScaledClass(np.zeros(mant.shape[1], complex), 0)
    mant, exps = mant[live], exps[live]
    top = int(exps.max())
    shift = np.maximum(exps - top, -2000)
    acc = (np.ldexp(mant.real, shift[:, None]) + 1j * np.ldexp(mant.imag, shift[:, None])).sum(axis=0)
    return ScaledClass.normalize(acc, top)


def toric_stream(data: ToricData, ring: RingPresentation, M: int, point_cap: int = DEFAULT_POINT_CAP) -> CoeffStream:
    """Givental-type I-function of a toric Fano manifold, grouped by c1-degree."""
    data.check_ring(ring)
    r = math.gcd(*data.c1_degrees) if len(data.c1_degrees) > 1 else data.c1_degrees[0]
    tables = [_FactorTable(as_class(D, ring), m, ring) for D, m in data.divisors]
    pair = data.mori_pairings
    raw: list[ScaledClass] = []
    for m in range(M + 1):
        points = list(data.lattice_points(r * m))
        if len(points) > point_cap:
            raise ValidationError(f"degree {r * m} has {len(points)} lattice points (cap {point_cap})")
        pts = np.array(points, dtype=np.int64).reshape(len(points), -1)
        p_all = pts @ pair.T  # (n_points, n_divisors)
        mant = np.tile(unit(ring), (len(points), 1))
        exps = np.zeros(len(points), dtype=np.int64)
        for j, table in enumerate(tables):
            fac = [table.get(int(p)) for p in p_all[:, j]]
            mant = mul_many(mant, np.stack([f[0] for f in fac]), ring)
            exps = exps + np.array([f[1] for f in fac], dtype=np.int64)
            # keep the rows normalised so that products never overflow
            peak = np.abs(mant).max(axis=1)
            _, e = np.frexp(np.where(peak > 0, peak, 1.0))
            mant = np.ldexp(mant.real, -e[:, None]) + 1j * np.ldexp(mant.imag, -e[:, None])
            exps = exps + e
        raw.append(_sum_rows(mant, exps))
    provenance = {"generator": "toric", "M": M, "c1_degrees": list(data.c1_degrees), "mirror_c0": 0.0}
    coeffs = raw
    if r == 1 and M >= 1:
        c0 = complex(raw[1].to_class()[0])
        if abs(c0) > 1e-12:
            coeffs = _exp_correction(raw, c0, ring)
            provenance["mirror_c0"] = c0.real if c0.imag == 0 else [c0.real, c0.imag]
    return CoeffStream(ring=ring, r=r, beta=ring.beta_default(), coeffs=tuple(coeffs), provenance=provenance)


def _exp_correction(raw: Sequence[ScaledClass], c0: complex, ring: RingPresentation) -> list[ScaledClass]:
    """Coefficients of exp(-c0 t) * I(t) (float convolution)."""
    out = []
    for n in range(len(raw)):
        terms = []
        for j in range(n + 1):
            log_w = j * np.log(complex(-c0)) - math.lgamma(j + 1)
            terms.append(scaled_mul(scaled_from_log(log_w, unit(ring)), raw[n - j], ring))
        out.append(scaled_sum(terms))
    return out


# ---------------------------------------------------------------------------
# derived streams


def derivative_stream(s: CoeffStream) -> CoeffStream:
    """Stream of d/dt of sum J_{rm} t^{rm+beta}: coefficients J_{rm}(rm + beta), beta - 1."""
    ring = s.ring
    one = unit(ring)
    coeffs = tuple(
        ScaledClass.normalize(mul(c.mantissa, s.r * m * one + s.beta, ring), c.exp2) for m, c in enumerate(s.coeffs)
    )
    return CoeffStream(
        ring=ring,
        r=s.r,
        beta=s.beta - one,
        coeffs=coeffs,
        provenance={"generator": "derivative", "of": s.provenance},
    )


def synthetic_ml_stream(
    ring: RingPresentation, r: int, beta: ClassValue, T: float, theta: float, A: ClassValue, M: int
) -> CoeffStream:
    """Exact Mittag-Leffler stream J_{rm} = (T e^{i theta})^{rm+beta} / Gamma(1+rm+beta) * A."""
    beta = as_class(beta, ring)
    one = unit(ring)
    logz = complex(math.log(T), theta)
    nil = beta - beta[0] * one
    coeffs = []
    for m in range(M + 1):
        L, Nn = log_gamma_class((1 + r * m) * one + beta, ring)
        cls = mul(exp_class(nil * logz - Nn, ring), as_class(A, ring), ring)
        coeffs.append(scaled_from_log((r * m + beta[0]) * logz - L, cls))
    return CoeffStream(
        ring=ring,
        r=r,
        beta=beta,
        coeffs=tuple(coeffs),
        provenance={"generator": "synthetic-ml", "T": T, "theta": theta, "M": M},
    )
