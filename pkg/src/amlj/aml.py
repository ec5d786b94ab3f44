"""Scaled asymptotically Mittag-Leffler analysis of coefficient streams.

A stream is (T, theta, A)-scaled when

    S_m = J_{rm} Gamma(1 + rm + beta) (T e^{i theta})^{-(rm + beta)}  ->  A.

Everything here works with logarithms of the large scalar factors so that
m can run into the thousands.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NumericQualityError, ValidationError
from .gamma import log_gamma_class
from .ring import (
    ClassValue,
    RingPresentation,
    as_class,
    basis_vector,
    class_norm,
    exp_class,
    mul,
    nilpotent_part,
    unit,
)
from .streams import CoeffStream

__all__ = [
    "AmlScaling",
    "AmlReport",
    "resolve_functional",
    "scale_coefficients",
    "scale_log_form",
    "fit_scaling",
    "branch_shift",
    "aitken_accelerate",
    "verify_aml",
    "non_aml_scan",
    "reduce_theta",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class AmlScaling:
    T: float
    theta: float
    A: np.ndarray
    residuals: tuple[float, ...] = ()
    method: str = "supplied"
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValidationError("T must be a positive finite number")
        A = np.asarray(self.A, dtype=complex)
        if not np.all(np.isfinite(A)):
            raise ValidationError("A must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "residuals", tuple(float(x) for x in self.residuals))

    def to_json(self) -> dict:
        out = {
            "T": float(self.T),
            "theta": float(self.theta),
            "A": [[float(z.real), float(z.imag)] for z in self.A],
            "residuals": list(self.residuals),
            "method": self.method,
        }
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "AmlScaling":
        try:
            A = np.array([complex(a, b) for a, b in data["A"]], dtype=complex)
            return cls(
                T=float(data["T"]),
                theta=float(data["theta"]),
                A=A,
                residuals=tuple(data.get("residuals", ())),
                method=str(data.get("method", "supplied")),
                notes=tuple(data.get("notes", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed scaling JSON: {exc}") from exc


def reduce_theta(theta: float, r: int) -> float:
    """Representative of theta modulo 2 pi / r in [0, 2 pi / r)."""
    period = 2 * math.pi / r
    red = theta % period
    if period - red < 1e-12 * period:
        red = 0.0
    return red


def resolve_functional(ring: RingPresentation, functional: str | Sequence[complex] | np.ndarray = "top") -> np.ndarray:
    """``pt`` (degree-0 part), ``top`` (integration), ``idx:<k>`` or an explicit vector.

    ``fit_scaling`` additionally accepts ``auto``, which picks the component
    of largest magnitude at the end of the window.
    """
    if isinstance(functional, str):
        if functional == "pt":
            return np.asarray(ring.point_functional)
        if functional == "top":
            return np.asarray(ring.integrate_functional)
        if functional.startswith("idx:"):
            try:
                k = int(functional[4:])
            except ValueError as exc:
                raise ValidationError(f"bad functional {functional!r}") from exc
            if not 0 <= k < ring.size:
                raise ValidationError(f"component index {k} out of range for {ring.name}")
            return basis_vector(ring, k)
        raise ValidationError(f"unknown functional {functional!r} (use pt, top or idx:<k>)")
    return as_class(functional, ring)


# ---------------------------------------------------------------------------
# scaling


def _gamma_log_form(s: CoeffStream, m: int) -> tuple[complex, ClassValue]:
    """(log scalar, class) with J_{rm} Gamma(1 + rm + beta) = exp(scalar) * class."""
    ring = s.ring
    c = s.coeffs[m]
    L, N = log_gamma_class((1 + s.r * m) * unit(ring) + s.beta, ring)
    return c.exp2 * _LN2 + L, mul(c.mantissa, exp_class(N, ring), ring)


def scale_log_form(s: CoeffStream, T: float, theta: float, ms: Sequence[int], mode: str = "gamma") -> list[tuple[complex, ClassValue]]:
    """S_m as ``exp(scalar) * class`` for each requested m."""
    if T <= 0:
        raise ValidationError("T must be positive")
    if mode not in ("gamma", "table"):
        raise ValidationError(f"unknown scaling mode {mode!r}")
    ring = s.ring
    beta0 = float(s.beta[0].real)
    bnil = nilpotent_part(s.beta)
    # theta = theta_red + 2 pi k / r: the k part contributes exp(-2 pi i (k/r) beta)
    # exactly (the m-dependent phase is a multiple of 2 pi), so only theta_red
    # is ever multiplied by the large n + beta0.
    period = 2 * math.pi / s.r
    k = math.floor(theta / period)
    theta_red = theta - k * period
    if period - theta_red < 1e-9 * period:
        k += 1
        theta_red = theta - k * period
    shift = exp_class(-1j * k * period * s.beta, ring) if k else None
    theta = theta_red
    logz = complex(math.log(T), theta)
    out = []
    for m in ms:
        if not 0 <= m <= s.M:
            raise ValidationError(f"m={m} outside stream range 0..{s.M}")
        n = s.r * m
        # (T e^{i theta})^{-(n + beta0)}: reduce the phase before exponentiating
        phase = math.fmod((n + beta0) * theta, 2 * math.pi)
        lead = complex(-(n + beta0) * math.log(T), -phase)
        if mode == "gamma":
            sc, cls = _gamma_log_form(s, m)
            cls = mul(cls, exp_class(-bnil * logz, ring), ring)
        else:
            if n == 0:
                out.append((complex(-math.inf), np.full(ring.size, np.nan + 0j)))
                continue
            c = s.coeffs[m]
            sc = c.exp2 * _LN2 + math.lgamma(n + 1) + beta0 * math.log(n)
            cls = mul(c.mantissa, exp_class(bnil * (math.log(n) - logz), ring), ring)
        if shift is not None:
            cls = mul(cls, shift, ring)
        out.append((sc + lead, cls))
    return out


def scale_coefficients(
    s: CoeffStream, T: float, theta: float, mode: str = "gamma", ms: Sequence[int] | None = None
) -> np.ndarray:
    """Stack of scaled coefficients S_m, one row per m (default: all m)."""
    ms = range(s.M + 1) if ms is None else ms
    rows = []
    for sc, cls in scale_log_form(s, T, theta, ms, mode):
        if sc.real == -math.inf:
            rows.append(cls)
            continue
        if sc.real > 700:
            raise NumericQualityError("scaled coefficient overflows; T is far too small")
        rows.append(cmath.exp(sc) * cls)
    return np.array(rows, dtype=complex).reshape(len(rows), s.ring.size)


# ---------------------------------------------------------------------------
# acceleration


def aitken_accelerate(seq: Sequence[ClassValue] | np.ndarray) -> np.ndarray:
    """Componentwise Aitken delta-squared transform (output is 2 shorter).

    Components whose second difference vanishes pass the latest value through.
    """
    x = np.asarray(seq)
    if x.shape[0] < 3:
        raise ValidationError("Aitken acceleration needs at least 3 terms")
    d2 = x[2:] - 2 * x[1:-1] + x[:-2]
    nxt = x[2:] - x[1:-1]
    scale = np.maximum(np.abs(x[2:]), np.abs(x[:-2]))
    ok = np.abs(d2) > 1e-14 * np.where(scale > 0, scale, 1.0)
    safe = np.where(ok, d2, 1.0)
    acc = x[2:] - nxt * nxt / safe
    return np.where(ok, acc, x[2:])


# ---------------------------------------------------------------------------
# fitting


def fit_scaling(
    s: CoeffStream,
    functional: str | Sequence[complex] | np.ndarray = "top",
    window: tuple[int, int] | None = None,
    extrapolation: str = "aitken",
) -> AmlScaling:
    """Estimate (T, theta, A) from successive ratios of lambda(J_{rm} Gamma(1+rm+beta)).

    ``extrapolation`` controls the T estimate: ``aitken`` (Aitken pass, then
    the geometric mean), ``richardson`` (least-squares fit of the log ratios
    by a quartic in 1/m, keeping the constant term) or ``none`` (plain
    geometric mean).  A is the final entry of one Aitken pass over the last
    third of the window unless ``none`` is requested.
    """
    if extrapolation not in ("aitken", "richardson", "none"):
        raise ValidationError(f"unknown extrapolation {extrapolation!r}")
    m0, m1 = window if window is not None else (s.M // 2, s.M)
    if not (0 <= m0 < m1 <= s.M) or m1 - m0 < 4:
        raise ValidationError(f"window [{m0}, {m1}] invalid for a stream with M={s.M}")
    if isinstance(functional, str) and functional == "auto":
        # largest late-window component
        functional = f"idx:{int(np.argmax(np.abs(s.coeffs[m1].mantissa)))}"
    w = resolve_functional(s.ring, functional)
    logs = []
    for m in range(m0, m1 + 1):
        sc, cls = _gamma_log_form(s, m)
        val = complex(w @ cls)
        # values at rounding level relative to the class carry no phase information
        small = abs(val) <= 1e-12 * float(np.max(np.abs(cls))) * float(np.max(np.abs(w)))
        logs.append(None if small else sc + cmath.log(val))
    if all(v is None for v in logs):
        raise ValidationError("the functional vanishes on the window; choose another functional")
    pairs = [
        (m0 + i + 0.5, b - a) for i, (a, b) in enumerate(zip(logs[:-1], logs[1:])) if a is not None and b is not None
    ]
    if len(pairs) < 6:
        raise ValidationError("too few nonzero functional values in the window")
    mids = np.array([p[0] for p in pairs])
    ratios = [p[1] for p in pairs]
    log_mag = np.array([z.real for z in ratios]) / s.r
    if extrapolation == "richardson":
        V = np.vander(1.0 / mids, 5, increasing=True)
        T = float(np.exp(np.linalg.lstsq(V, log_mag, rcond=None)[0][0]))
    else:
        T_seq = np.exp(log_mag)
        if extrapolation == "aitken":
            T_seq = aitken_accelerate(T_seq)
        T = float(np.exp(np.mean(np.log(T_seq))))
    u = np.mean(np.exp(1j * np.array([z.imag for z in ratios])))
    theta = reduce_theta(math.atan2(u.imag, u.real) / s.r, s.r)
    ms = list(range(m0, m1 + 1))
    S = scale_coefficients(s, T, theta, "gamma", ms)
    tail = S[-max(3, math.ceil(len(ms) / 3)):]
    A = S[-1] if extrapolation == "none" else aitken_accelerate(tail)[-1]
    resid = tuple(float(class_norm(row - A)) for row in S)
    notes = []
    nA = class_norm(A)
    if nA <= 1e-300 or nA < 1e-12 * max(class_norm(row) for row in S):
        notes.append("no nonzero limit detected")
    elif resid[-1] > resid[0] and resid[-1] > 1e-8 * nA:
        notes.append("fit-quality warning: residuals do not decrease over the window")
    return AmlScaling(T=T, theta=theta, A=A, residuals=resid, method=f"ratio-fit({extrapolation})", notes=tuple(notes))


def branch_shift(sc: AmlScaling, k: int, beta: ClassValue, r: int, ring: RingPresentation, literal: bool = False) -> AmlScaling:
    """The equivalent triple after moving theta by 2 pi k / r.

    Rescaling with theta + 2 pi k / r multiplies every S_m by
    exp(-2 pi i (k/r) beta); that multiplier is applied to A.  ``literal``
    uses the real exponential exp(-2 pi (k/r) beta) instead, which does not
    describe the same stream and is kept only for comparison.
    """
    beta = as_class(beta, ring)
    factor = -2 * math.pi * k / r * (1 if literal else 1j)
    A = mul(exp_class(factor * beta, ring), sc.A, ring)
    return AmlScaling(
        T=sc.T,
        theta=sc.theta + 2 * math.pi * k / r,
        A=A,
        residuals=sc.residuals,
        method=f"branch-shift(k={k}{', literal' if literal else ''})",
    )


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class AmlReport:
    ms: tuple[int, ...]
    residuals: tuple[float, ...]  # ||S_m - A|| / ||A||
    decreasing: bool
    rate: float  # c in residual ~ c / m
    converged: bool
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "ms": list(self.ms),
            "residuals": list(self.residuals),
            "decreasing": self.decreasing,
            "rate": self.rate,
            "converged": self.converged,
            "notes": list(self.notes),
        }


def verify_aml(s: CoeffStream, sc: AmlScaling, window: tuple[int, int] | None = None, mode: str = "gamma") -> AmlReport:
    """Relative residuals of S_m against A with trend and 1/m-rate diagnostics."""
    m0, m1 = window if window is not None else (max(1, s.M // 2), s.M)
    if not (0 <= m0 < m1 <= s.M):
        raise ValidationError(f"window [{m0}, {m1}] invalid for M={s.M}")
    ms = list(range(m0, m1 + 1))
    nA = class_norm(sc.A)
    if nA == 0:
        raise ValidationError("A = 0: no nonzero limit to verify against")
    try:
        S = scale_coefficients(s, sc.T, sc.theta, mode, ms)
        res = np.array([class_norm(row - sc.A) / nA for row in S])
    except NumericQualityError:
        res = np.full(len(ms), math.inf)
    finite = np.isfinite(res) & (res > 0)
    notes = []
    if finite.sum() >= 2:
        slope = np.polyfit(np.log(np.array(ms)[finite]), np.log(res[finite]), 1)[0]
        decreasing = bool(slope < 0 and res[-1] < res[0])
        inv = 1.0 / np.array(ms, dtype=float)[finite]
        rate = float(inv @ res[finite] / (inv @ inv))
    else:
        decreasing = bool(np.all(res[np.isfinite(res)] == 0))
        rate = 0.0
    converged = bool(decreasing and res[-1] < 0.1) or bool(np.all(res <= 1e-12))
    if not converged:
        notes.append("residuals diverge or stall")
    return AmlReport(tuple(ms), tuple(float(x) for x in res), decreasing, rate, converged, tuple(notes))


def non_aml_scan(
    s: CoeffStream,
    T_grid: Sequence[float],
    theta: float,
    window: tuple[int, int],
) -> dict:
    """For each T, the worst relative deviation of S_m from its own extrapolated limit.

    A stream with some aML scaling drives this to ~0 at the right T; a stream
    with none keeps it bounded away from 0 on the whole grid.
    """
    ms = list(range(window[0], window[1] + 1))
    worst = []
    for T in T_grid:
        try:
            S = scale_coefficients(s, T, theta, "gamma", ms)
        except NumericQualityError:
            worst.append(math.inf)
            continue
        tail = S[-max(3, math.ceil(len(ms) / 3)):]
        A = aitken_accelerate(tail)[-1]
        nA = class_norm(A)
        if nA == 0 or not np.isfinite(nA):
            worst.append(math.inf)
            continue
        worst.append(max(class_norm(row - A) / nA for row in S))
    return {"T_grid": list(map(float, T_grid)), "worst_residual": worst, "min_over_grid": float(min(worst))}
