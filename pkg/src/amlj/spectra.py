"""Predicted growth scales: eigenvalues of quantum multiplication by c1.

Closed forms cover projective spaces, products and hypersurfaces.  For X3
the 8-dimensional quantum algebra at t = 1 is built from the relations

    x1^4 = (x2 - 3 x1)^3,    x2 (x2 - 3 x1) = 1

and multiplication by c1 = x1 + 2 x2 is diagonalised numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericQualityError, TruncationError, ValidationError

__all__ = [
    "SpectrumReport",
    "spectrum_from_eigenvalues",
    "pn_spectrum",
    "product_T",
    "c0_correction",
    "hypersurface_T",
    "x3_quantum_matrices",
    "x3_spectrum",
    "X3_EXPECTED_RADIUS",
]

X3_EXPECTED_RADIUS = 26.9877


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: tuple[complex, ...]
    spectral_radius: float
    rightmost: complex | None  # None: the rightmost eigenvalue is not simple
    theta_candidates: tuple[float, ...]
    residual: float = 0.0
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "spectral_radius": self.spectral_radius,
            "rightmost": "none-simple" if self.rightmost is None else [self.rightmost.real, self.rightmost.imag],
            "theta_candidates": list(self.theta_candidates),
            "residual": self.residual,
            **({"notes": self.notes} if self.notes else {}),
        }


def spectrum_from_eigenvalues(eigs, residual: float = 0.0, tol: float = 1e-9) -> SpectrumReport:
    eigs = tuple(complex(z) for z in eigs)
    radius = max(abs(z) for z in eigs)
    top_re = max(z.real for z in eigs)
    near = [z for z in eigs if abs(z.real - top_re) <= tol * max(1.0, radius)]
    rightmost = near[0] if len(near) == 1 else None
    thetas = sorted(
        {round(math.atan2(z.imag, z.real) % (2 * math.pi), 12) for z in eigs if abs(abs(z) - radius) <= tol * radius}
    )
    return SpectrumReport(eigs, radius, rightmost, tuple(thetas), residual)


def pn_spectrum(N: int) -> SpectrumReport:
    """Eigenvalues (N+1) xi^k, xi = exp(2 pi i / (N+1)), from d^{N+1} = 1."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    n = N + 1
    eigs = []
    for k in range(n):
        # exact values on the axes, cos/sin elsewhere
        q = (4 * k) % (4 * n)
        if q % n == 0:
            eigs.append(complex(*[(n, 0), (0, n), (-n, 0), (0, -n)][q // n]))
        else:
            ang = 2 * math.pi * k / n
            eigs.append(complex(n * math.cos(ang), n * math.sin(ang)))
    return spectrum_from_eigenvalues(eigs)


def product_T(Tx: float, Ty: float) -> float:
    if Tx <= 0 or Ty <= 0:
        raise ValidationError("growth scales must be positive")
    return Tx + Ty


def c0_correction(sx, d: int) -> float:
    """d! times the degree-0 part of J^X_{r_X}; zero unless the index drops to 1."""
    r_x = sx.r
    if r_x - d != 1:
        return 0.0
    if sx.M < 1:
        raise TruncationError("c0 needs the coefficient m = 1 of the ambient stream")
    h0 = complex(sx.ring.point_functional @ sx.value(1))
    return math.factorial(d) * h0.real


def hypersurface_T(Tx: float, rX: int, d: int, c0: float) -> float:
    """Positive T solving ((T + c0)/r_Z)^{r_Z} = d^d (Tx/rX)^{rX}, r_Z = rX - d."""
    if not 0 < d < rX:
        raise ValidationError("need 0 < d < rX")
    if Tx <= 0:
        raise ValidationError("Tx must be positive")
    rz = rX - d
    log_rhs = d * math.log(d) + rX * math.log(Tx / rX)
    T = rz * math.exp(log_rhs / rz) - c0
    # integer-valued answers are returned exactly when they are exact
    near = round(T)
    if near > 0 and ((near + c0) / rz) ** rz == d**d * (Tx / rX) ** rX:
        return float(near)
    return T


# ---------------------------------------------------------------------------
# X3


def _x3_reduce(poly: dict[tuple[int, int], float]) -> dict[tuple[int, int], float]:
    """Normal form w.r.t. x2^2 -> 3 x1 x2 + 1 and x1^4 -> 9 x1^2 x2 - 27 x1^3 - 6 x1 + x2."""
    poly = dict(poly)
    out: dict[tuple[int, int], float] = {}
    while poly:
        (i, j), c = poly.popitem()
        if c == 0:
            continue
        if j >= 2:
            for (di, dj), a in (((1, 1), 3.0), ((0, 0), 1.0)):
                key = (i + di, j - 2 + dj)
                poly[key] = poly.get(key, 0.0) + a * c
        elif i >= 4:
            for (di, dj), a in (((2, 1), 9.0), ((3, 0), -27.0), ((1, 0), -6.0), ((0, 1), 1.0)):
                key = (i - 4 + di, j + dj)
                poly[key] = poly.get(key, 0.0) + a * c
        else:
            out[(i, j)] = out.get((i, j), 0.0) + c
    return out


def x3_quantum_matrices() -> tuple[np.ndarray, np.ndarray]:
    """Matrices of multiplication by x1 and x2 in the basis x1^i x2^j (index 2i+j)."""
    mats = []
    for gen in ((1, 0), (0, 1)):
        Mg = np.zeros((8, 8))
        for i in range(4):
            for j in range(2):
                red = _x3_reduce({(i + gen[0], j + gen[1]): 1.0})
                for (a, b), c in red.items():
                    Mg[2 * a + b, 2 * i + j] += c
        mats.append(Mg)
    X1, X2 = mats
    I = np.eye(8)
    E = X2 - 3 * X1
    checks = {
        "commute": np.abs(X1 @ X2 - X2 @ X1).max(),
        "rel_fibre": np.abs(X2 @ E - I).max(),
        "rel_base": np.abs(np.linalg.matrix_power(X1, 4) - np.linalg.matrix_power(E, 3)).max(),
    }
    if max(checks.values()) > 1e-9:
        raise NumericQualityError(f"X3 quantum presentation inconsistent: {checks}")
    return X1, X2


def x3_spectrum(check: bool = True) -> SpectrumReport:
    """Spectrum of c1 * at t = 1 for X3; aborts if it contradicts the known radius."""
    X1, X2 = x3_quantum_matrices()
    C = X1 + 2 * X2
    eigs, vecs = np.linalg.eig(C)
    resid = max(
        float(np.abs(C @ vecs[:, k] - eigs[k] * vecs[:, k]).max() / np.abs(vecs[:, k]).max()) for k in range(8)
    )
    if resid > 1e-9:
        raise NumericQualityError(f"eigensolver residual {resid:.3e} exceeds 1e-9")
    order = np.argsort(-np.abs(eigs))
    rep = spectrum_from_eigenvalues(eigs[order], residual=resid)
    lead = rep.eigenvalues[0]
    rep.notes.update({"trace": float(np.trace(C)), "leading": [lead.real, lead.imag]})
    if check:
        if abs(rep.spectral_radius - X3_EXPECTED_RADIUS) > 1e-3 or not (lead.real < 0 and abs(lead.imag) <= 1e-9):
            raise NumericQualityError(
                f"X3 spectrum mismatch: radius {rep.spectral_radius:.6f}, leading eigenvalue {lead}; "
                "the toric presentation is wrong"
            )
    return rep
