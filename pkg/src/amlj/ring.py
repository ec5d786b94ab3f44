"""Truncated graded commutative rings over the complex numbers.

A ring is stored through its structure constants ``mult[i, j, k]`` so that
``e_i * e_j = sum_k mult[i, j, k] e_k``.  Elements ("classes") are plain
complex numpy vectors in the basis order of the ring.  Because every basis
element of positive degree is nilpotent, exponentials, logarithms and
inverses reduce to finite sums.

Very large or very small coefficients are carried as :class:`ScaledClass`
values, a normalised mantissa vector together with a binary exponent.
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import NotInvertibleError, ValidationError

ClassValue = np.ndarray
_LN2 = math.log(2.0)

__all__ = [
    "ClassValue",
    "RingPresentation",
    "ScaledClass",
    "as_class",
    "unit",
    "basis_vector",
    "scalar_part",
    "nilpotent_part",
    "class_norm",
    "mul",
    "mul_many",
    "power_int",
    "inverse",
    "exp_class",
    "exp_nilpotent_many",
    "log_class",
    "power_t",
    "op_norm",
    "mult_matrix",
    "projective_ring",
    "tensor_ring",
    "restrict_hypersurface",
    "x3_ring",
    "X3_BASIS",
    "scaled_mul",
    "scaled_sum",
    "scaled_scale",
    "scaled_from_log",
]


@dataclass(frozen=True, eq=False)
class RingPresentation:
    """Finite basis, structure constants and the geometric data of a manifold.

    ``point_functional`` and ``integrate_functional`` are stored as
    coefficient vectors ``w`` so that the functional is ``a -> w @ a``.
    """

    name: str
    basis: tuple[str, ...]
    degrees: tuple[int, ...]
    mult: np.ndarray
    dim_c: int
    fano_index: int
    c1: np.ndarray
    point_functional: np.ndarray
    integrate_functional: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.basis)
        mult = np.asarray(self.mult, dtype=complex)
        if mult.shape != (n, n, n):
            raise ValidationError(f"mult table has shape {mult.shape}, expected {(n, n, n)}")
        if len(self.degrees) != n:
            raise ValidationError("degrees and basis lengths differ")
        for name in ("c1", "point_functional", "integrate_functional"):
            vec = np.asarray(getattr(self, name), dtype=complex)
            if vec.shape != (n,):
                raise ValidationError(f"{name} must have length {n}")
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
        mult.setflags(write=False)
        object.__setattr__(self, "mult", mult)
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        object.__setattr__(self, "basis", tuple(str(b) for b in self.basis))
        self._validate()

    # -- structural checks -------------------------------------------------
    def _validate(self) -> None:
        n = self.size
        deg = np.array(self.degrees)
        if self.dim_c < 0 or self.fano_index < 1:
            raise ValidationError("dim_c must be >= 0 and fano_index >= 1")
        if deg[0] != 0 or np.count_nonzero(deg == 0) != 1:
            raise ValidationError("basis[0] must be the only degree-0 element (the unit)")
        if np.any(deg % 2) or np.any(deg < 0) or deg.max(initial=0) > 2 * self.dim_c:
            raise ValidationError("degrees must be even and lie in [0, 2*dim_c]")
        if not np.array_equal(self.mult[0], np.eye(n)):
            raise ValidationError("basis[0] does not act as the unit")
        bad = (deg[:, None, None] + deg[None, :, None] != deg[None, None, :]) & (self.mult != 0)
        if bad.any():
            raise ValidationError("structure constants violate degree additivity")
        scale = max(1.0, float(np.abs(self.mult).max()))
        if np.abs(self.mult - self.mult.transpose(1, 0, 2)).max() > 1e-12 * scale:
            raise ValidationError("multiplication is not commutative")
        if self.associativity_defect() > 1e-10 * scale**2:
            raise ValidationError("multiplication is not associative")
        if np.any(self.c1[deg != 2] != 0):
            raise ValidationError("c1 must be homogeneous of degree 2")

    def associativity_defect(self) -> float:
        """Largest entry of (e_i e_j) e_k - e_i (e_j e_k) over all basis triples."""
        left = np.einsum("ijm,mkl->ijkl", self.mult, self.mult)
        right = np.einsum("jkm,iml->ijkl", self.mult, self.mult)
        return float(np.abs(left - right).max(initial=0.0))

    @property
    def size(self) -> int:
        return len(self.basis)

    def degree_mask(self, degree: int) -> np.ndarray:
        return np.array(self.degrees) == degree

    def index(self, name: str) -> int:
        return self.basis.index(name)

    def beta_default(self) -> ClassValue:
        """The exponent class dim/2 + c1 used by J-function streams."""
        return 0.5 * self.dim_c * unit(self) + self.c1

    def mult_triples(self) -> list[tuple[int, int, int, float, float]]:
        idx = np.argwhere(self.mult != 0)
        return [
            (int(i), int(j), int(k), float(self.mult[i, j, k].real), float(self.mult[i, j, k].imag))
            for i, j, k in idx
        ]

    def to_dict(self) -> dict:
        """JSON-ready description, sufficient to rebuild the ring."""

        def cv(v: np.ndarray) -> list[list[float]]:
            return [[float(z.real), float(z.imag)] for z in v]

        return {
            "name": self.name,
            "basis": list(self.basis),
            "degrees": list(self.degrees),
            "dim_c": self.dim_c,
            "fano_index": self.fano_index,
            "mult": [list(t) for t in self.mult_triples()],
            "c1": cv(self.c1),
            "point_functional": cv(self.point_functional),
            "integrate_functional": cv(self.integrate_functional),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RingPresentation":
        try:
            n = len(data["basis"])
            mult = np.zeros((n, n, n), dtype=complex)
            for i, j, k, re, im in data["mult"]:
                mult[int(i), int(j), int(k)] = complex(re, im)

            def vec(key: str) -> np.ndarray:
                return np.array([complex(a, b) for a, b in data[key]], dtype=complex)

            return cls(
                name=str(data["name"]),
                basis=tuple(data["basis"]),
                degrees=tuple(data["degrees"]),
                mult=mult,
                dim_c=int(data["dim_c"]),
                fano_index=int(data["fano_index"]),
                c1=vec("c1"),
                point_functional=vec("point_functional"),
                integrate_functional=vec("integrate_functional"),
                meta=dict(data.get("meta", {})),
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise ValidationError(f"malformed ring description: {exc}") from exc

    def hash(self) -> str:
        """Stable content hash (sha256 of the canonical JSON description)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# basic element helpers


def as_class(a: Sequence[complex] | np.ndarray, ring: RingPresentation) -> ClassValue:
    v = np.asarray(a, dtype=complex)
    if v.shape != (ring.size,):
        raise ValidationError(f"class has shape {v.shape}, ring {ring.name!r} needs ({ring.size},)")
    return v


def unit(ring: RingPresentation) -> ClassValue:
    v = np.zeros(ring.size, dtype=complex)
    v[0] = 1.0
    return v


def basis_vector(ring: RingPresentation, name_or_index: str | int) -> ClassValue:
    i = ring.index(name_or_index) if isinstance(name_or_index, str) else int(name_or_index)
    v = np.zeros(ring.size, dtype=complex)
    v[i] = 1.0
    return v


def scalar_part(a: ClassValue) -> complex:
    return complex(a[0])


def nilpotent_part(a: ClassValue) -> ClassValue:
    n = np.array(a, dtype=complex)
    n[0] = 0.0
    return n


def class_norm(a: ClassValue) -> float:
    """Max-abs coordinate norm."""
    return float(np.abs(a).max(initial=0.0))


# ---------------------------------------------------------------------------
# ring operations


def mult_matrix(a: ClassValue, ring: RingPresentation) -> np.ndarray:
    """Matrix L with ``L @ b == mul(a, b)``."""
    a = as_class(a, ring)
    return np.tensordot(a, ring.mult, axes=(0, 0)).T


def mul(a: ClassValue, b: ClassValue, ring: RingPresentation) -> ClassValue:
    a = as_class(a, ring)
    b = as_class(b, ring)
    return np.einsum("i,j,ijk->k", a, b, ring.mult)


def mul_many(a: np.ndarray, b: np.ndarray, ring: RingPresentation) -> np.ndarray:
    """Row-wise product of two stacks of classes (broadcasting over leading axes)."""
    return np.einsum("...i,...j,ijk->...k", a, b, ring.mult)


def _nil_powers(n: ClassValue, ring: RingPresentation) -> list[ClassValue]:
    """[1, n, n^2, ..., n^dim_c] for a nilpotent class n."""
    out = [unit(ring)]
    for _ in range(ring.dim_c):
        out.append(mul(out[-1], n, ring))
    return out


def power_int(a: ClassValue, k: int, ring: RingPresentation) -> ClassValue:
    """a**k for a non-negative integer k by repeated squaring."""
    if k < 0:
        return power_int(inverse(a, ring), -k, ring)
    result = unit(ring)
    base = as_class(a, ring)
    while k:
        if k & 1:
            result = mul(result, base, ring)
        k >>= 1
        if k:
            base = mul(base, base, ring)
    return result


def inverse(a: ClassValue, ring: RingPresentation) -> ClassValue:
    a = as_class(a, ring)
    a0 = a[0]
    if a0 == 0:
        raise NotInvertibleError("not invertible: degree-0 part is zero")
    q = -nilpotent_part(a) / a0
    total = unit(ring)
    term = unit(ring)
    for _ in range(ring.dim_c):
        term = mul(term, q, ring)
        total = total + term
    return total / a0


def exp_class(a: ClassValue, ring: RingPresentation) -> ClassValue:
    a = as_class(a, ring)
    n = nilpotent_part(a)
    total = unit(ring)
    term = unit(ring)
    for k in range(1, ring.dim_c + 1):
        term = mul(term, n, ring) / k
        total = total + term
    return np.exp(a[0]) * total


def exp_nilpotent_many(scalars: np.ndarray, n: ClassValue, ring: RingPresentation) -> np.ndarray:
    """``exp(s * n)`` for each scalar ``s`` of an array and one nilpotent ``n``.

    Returns an array of shape ``scalars.shape + (ring.size,)``.
    """
    s = np.asarray(scalars, dtype=complex)
    powers = _nil_powers(nilpotent_part(n), ring)
    out = np.zeros(s.shape + (ring.size,), dtype=complex)
    coef = np.ones_like(s)
    for k, p in enumerate(powers):
        if k:
            coef = coef * s / k
        out += coef[..., None] * p
    return out


def log_class(a: ClassValue, ring: RingPresentation, branch_arg: float | None = None) -> ClassValue:
    """Logarithm; ``branch_arg`` selects the argument used for the degree-0 part."""
    a = as_class(a, ring)
    a0 = complex(a[0])
    if a0 == 0:
        raise NotInvertibleError("logarithm undefined: degree-0 part is zero")
    if branch_arg is None:
        log0 = complex(math.log(abs(a0)), math.atan2(a0.imag, a0.real))
    else:
        shift = (branch_arg - math.atan2(a0.imag, a0.real)) / (2 * math.pi)
        if abs(shift - round(shift)) > 1e-9:
            raise ValidationError("branch_arg is not an argument of the degree-0 part")
        log0 = complex(math.log(abs(a0)), branch_arg)
    q = nilpotent_part(a) / a0
    total = np.zeros(ring.size, dtype=complex)
    term = unit(ring)
    for k in range(1, ring.dim_c + 1):
        term = mul(term, q, ring)
        total = total + ((-1) ** (k + 1) / k) * term
    total[0] += log0
    return total


def power_t(alpha: ClassValue, t: complex, ring: RingPresentation, branch_arg: float | None = None) -> ClassValue:
    """``t**alpha = exp(alpha * (ln|t| + i*arg))`` with an explicit branch."""
    alpha = as_class(alpha, ring)
    t = complex(t)
    if t == 0:
        if np.any(nilpotent_part(alpha) != 0):
            raise ValidationError("0**alpha undefined for a non-scalar exponent")
        return np.zeros(ring.size, dtype=complex) if alpha[0].real > 0 else unit(ring)
    arg = math.atan2(t.imag, t.real) if branch_arg is None else float(branch_arg)
    return exp_class(alpha * complex(math.log(abs(t)), arg), ring)


def op_norm(a: ClassValue, ring: RingPresentation) -> float:
    """Operator norm of ``b -> a*b`` for the max-abs norm (max absolute row sum)."""
    L = mult_matrix(a, ring)
    return float(np.abs(L).sum(axis=1).max(initial=0.0))


# ---------------------------------------------------------------------------
# overflow-safe scaled classes


@dataclass(frozen=True, eq=False)
class ScaledClass:
    """Value ``mantissa * 2**exp2``; the mantissa's largest entry lies in [1/2, 2)."""

    mantissa: np.ndarray
    exp2: int

    @staticmethod
    def normalize(mantissa: np.ndarray, exp2: int = 0) -> "ScaledClass":
        m = np.asarray(mantissa, dtype=complex)
        if not np.all(np.isfinite(m)):
            raise ValidationError("cannot normalise a non-finite class")
        peak = float(np.abs(m).max(initial=0.0))
        if peak == 0.0:
            return ScaledClass(np.zeros_like(m), 0)
        _, e = math.frexp(peak)
        return ScaledClass(_ldexp(m, -e), int(exp2) + e)

    @classmethod
    def from_class(cls, a: ClassValue) -> "ScaledClass":
        return cls.normalize(a, 0)

    def to_class(self) -> ClassValue:
        """Denormalise; entries may over/underflow to inf/0 if the exponent is extreme."""
        return _ldexp(self.mantissa, self.exp2)

    def is_zero(self) -> bool:
        return not np.any(self.mantissa)

    def log_abs_max(self) -> float:
        """Natural log of the largest coordinate magnitude (-inf for zero)."""
        peak = float(np.abs(self.mantissa).max(initial=0.0))
        return -math.inf if peak == 0 else math.log(peak) + self.exp2 * math.log(2.0)

    def __repr__(self) -> str:
        return f"ScaledClass(mantissa={self.mantissa!r}, exp2={self.exp2})"


def _ldexp(z: np.ndarray, e: int) -> np.ndarray:
    e = int(e)
    # split large shifts so intermediate values never leave the float range
    re, im = np.array(z.real, dtype=float), np.array(z.imag, dtype=float)
    while e != 0:
        step = max(-1000, min(1000, e))
        re = np.ldexp(re, step)
        im = np.ldexp(im, step)
        e -= step
        if not (np.any(re) or np.any(im)):
            break
    return re + 1j * im


def scaled_mul(a: ScaledClass, b: ScaledClass, ring: RingPresentation) -> ScaledClass:
    return ScaledClass.normalize(mul(a.mantissa, b.mantissa, ring), a.exp2 + b.exp2)


def scaled_from_log(log_scalar: complex, v: ClassValue) -> ScaledClass:
    """ScaledClass for ``exp(log_scalar) * v`` without forming exp(log_scalar)."""
    log_scalar = complex(log_scalar)
    k = math.floor(log_scalar.real / _LN2)
    frac = log_scalar.real - k * _LN2
    phase = cmath.exp(complex(frac, log_scalar.imag))
    return ScaledClass.normalize(np.asarray(v, dtype=complex) * phase, k)


def scaled_scale(a: ScaledClass, c: complex) -> ScaledClass:
    """Multiply by a scalar (``c`` finite)."""
    return ScaledClass.normalize(a.mantissa * c, a.exp2)


def scaled_sum(items: Iterable[ScaledClass]) -> ScaledClass:
    """Sum aligned to the largest exponent among nonzero terms."""
    items = list(items)
    if not items:
        raise ValidationError("scaled_sum needs at least one term")
    nonzero = [x for x in items if not x.is_zero()]
    if not nonzero:
        return ScaledClass(np.zeros_like(items[0].mantissa), 0)
    items = nonzero
    top = max(x.exp2 for x in items)
    acc = np.zeros_like(items[0].mantissa)
    for x in items:
        acc = acc + _ldexp(x.mantissa, x.exp2 - top)
    return ScaledClass.normalize(acc, top)


# ---------------------------------------------------------------------------
# shipped rings


def projective_ring(N: int) -> RingPresentation:
    """H*(P^N) = C[d]/(d^{N+1}) with basis 1, d, ..., d^N."""
    if not 1 <= N <= 12:
        raise ValidationError("projective spaces are shipped for 1 <= N <= 12")
    n = N + 1
    mult = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n - i):
            mult[i, j, i + j] = 1.0
    c1 = np.zeros(n, dtype=complex)
    c1[1] = N + 1
    pt = np.zeros(n, dtype=complex)
    pt[0] = 1
    top = np.zeros(n, dtype=complex)
    top[N] = 1
    names = ["1", "d"] + [f"d^{k}" for k in range(2, n)]
    return RingPresentation(
        name=f"P{N}",
        basis=tuple(names),
        degrees=tuple(2 * k for k in range(n)),
        mult=mult,
        dim_c=N,
        fano_index=N + 1,
        c1=c1,
        point_functional=pt,
        integrate_functional=top,
        meta={"kind": "projective", "N": N, "monogenic": True},
    )


def tensor_ring(rx: RingPresentation, ry: RingPresentation) -> RingPresentation:
    """H*(X x Y) with basis ordered lexicographically in (X index, Y index)."""
    mult = _tensor_mult(rx, ry)
    ux, uy = unit(rx), unit(ry)
    basis = tuple(
        bx if by == "1" else (by if bx == "1" else f"{bx}*{by}")
        for bx in _qualified(rx, "X")
        for by in _qualified(ry, "Y")
    )
    degrees = tuple(dx + dy for dx in rx.degrees for dy in ry.degrees)
    return RingPresentation(
        name=f"{rx.name}x{ry.name}",
        basis=basis,
        degrees=degrees,
        mult=mult,
        dim_c=rx.dim_c + ry.dim_c,
        fano_index=math.gcd(rx.fano_index, ry.fano_index),
        c1=np.kron(rx.c1, uy) + np.kron(ux, ry.c1),
        point_functional=np.kron(rx.point_functional, ry.point_functional),
        integrate_functional=np.kron(rx.integrate_functional, ry.integrate_functional),
        meta={"kind": "product", "factors": [rx.name, ry.name], "basis_order": "lexicographic(X, Y)"},
    )


def _qualified(ring: RingPresentation, tag: str) -> list[str]:
    return ["1"] + [f"{b}_{tag}" for b in ring.basis[1:]]


def _tensor_mult(rx: RingPresentation, ry: RingPresentation) -> np.ndarray:
    nx, ny = rx.size, ry.size
    # T[(a,b),(c,d),(e,f)] = X[a,c,e] * Y[b,d,f]
    t = np.einsum("ace,bdf->abcdef", rx.mult, ry.mult)
    return t.reshape(nx * ny, nx * ny, nx * ny)


def restrict_hypersurface(ring_x: RingPresentation, d: int) -> RingPresentation:
    """Ambient-restricted ring of a degree-d hypersurface in P^N.

    Result: C[x]/(x^N), index r_X - d, c1 = (r_X - d) x and the top class
    integrating to d.
    """
    if not ring_x.meta.get("monogenic"):
        raise ValidationError("hypersurface restriction needs a monogenic (projective space) ring")
    r_x = ring_x.fano_index
    if not 0 < d < r_x:
        raise ValidationError(f"degree {d} hypersurface is not Fano in {ring_x.name} (index {r_x})")
    n = ring_x.dim_c  # new basis size: 1, x, ..., x^{N-1}
    mult = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n - i):
            mult[i, j, i + j] = 1.0
    c1 = np.zeros(n, dtype=complex)
    if n > 1:
        c1[1] = r_x - d
    pt = np.zeros(n, dtype=complex)
    pt[0] = 1
    top = np.zeros(n, dtype=complex)
    top[n - 1] = d
    names = ["1", "x"] + [f"x^{k}" for k in range(2, n)]
    return RingPresentation(
        name=f"{ring_x.name}[d={d}]",
        basis=tuple(names[:n]),
        degrees=tuple(2 * k for k in range(n)),
        mult=mult,
        dim_c=n - 1,
        fano_index=r_x - d,
        c1=c1,
        point_functional=pt,
        integrate_functional=top,
        meta={"kind": "hypersurface", "ambient": ring_x.name, "N": ring_x.dim_c, "d": d, "monogenic": True},
    )


X3_BASIS = ("1", "x2", "x1", "x1x2", "x1^2", "x1^2x2", "x1^3", "x1^3x2")


def x3_ring() -> RingPresentation:
    """Cohomology of the projective bundle P(O + O(3)) over P^3.

    Basis x1^i x2^j (i < 4, j < 2) sits at index 2i + j; the relations are
    x1^4 = 0 and x2^2 = 3 x1 x2.  The top class x1^3 x2 integrates to 1.
    """
    mult = np.zeros((8, 8, 8), dtype=complex)
    for i in range(4):
        for j in range(2):
            for k in range(4):
                for l in range(2):
                    a, b = i + k, j + l
                    coef = 1.0
                    if b == 2:
                        a, b, coef = a + 1, 1, 3.0
                    if a <= 3:
                        mult[2 * i + j, 2 * k + l, 2 * a + b] += coef
    c1 = np.zeros(8, dtype=complex)
    c1[2] = 1.0
    c1[1] = 2.0
    pt = np.zeros(8, dtype=complex)
    pt[0] = 1
    top = np.zeros(8, dtype=complex)
    top[7] = 1
    return RingPresentation(
        name="X3",
        basis=X3_BASIS,
        degrees=(0, 2, 2, 4, 4, 6, 6, 8),
        mult=mult,
        dim_c=4,
        fano_index=1,
        c1=c1,
        point_functional=pt,
        integrate_functional=top,
        meta={"kind": "X3"},
    )
