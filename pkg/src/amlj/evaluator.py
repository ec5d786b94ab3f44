"""Continuous-side checks: series along rays, Mittag-Leffler values and
Riemann-Liouville integrals with cohomology-valued order.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .aml import AmlScaling
from .errors import DomainError, TruncationError, ValidationError
from .gamma import reciprocal_gamma
from .ring import (
    ClassValue,
    RingPresentation,
    ScaledClass,
    as_class,
    class_norm,
    exp_class,
    exp_nilpotent_many,
    mul,
    mul_many,
    nilpotent_part,
    op_norm,
    power_t,
    scaled_from_log,
    unit,
)
from .special import log_gamma
from .streams import CoeffStream

__all__ = [
    "TRUNCATION_MARGIN",
    "crude_T",
    "required_M",
    "eval_series",
    "ContinuousReport",
    "continuous_check",
    "default_t_grid",
    "ml_eval",
    "rl_integral",
    "rl_integral_many",
    "rl_property_check",
]

TRUNCATION_MARGIN = 40.0  # nats between the peak term and the last kept term
_LN2 = math.log(2.0)


def crude_T(s: CoeffStream) -> float:
    """Growth scale from the last two coefficients (used when no scaling is given)."""
    if s.M < 2:
        raise TruncationError("need at least three coefficients to estimate T")
    b0 = float(s.beta[0].real)
    a, b = s.coeffs[-2], s.coeffs[-1]
    n1 = s.r * s.M
    n0 = n1 - s.r
    diff = b.log_abs_max() - a.log_abs_max() + math.lgamma(1 + n1 + b0) - math.lgamma(1 + n0 + b0)
    return math.exp(diff / s.r)


def required_M(T: float, t_abs: float, r: int) -> int:
    """Truncation putting the last term ~40 nats below the peak near n = T t."""
    peak = T * t_abs
    return math.ceil((peak + math.sqrt(2 * TRUNCATION_MARGIN * max(peak, 1.0)) + 10) / r)


def _term_logs(s: CoeffStream, t_abs: float, phi: float, M: int) -> np.ndarray:
    b0 = float(s.beta[0].real)
    n = s.r * np.arange(M + 1) + b0
    exps = s.exponents()[: M + 1].astype(float)
    mags = np.log(np.abs(s.mantissas()[: M + 1]).max(axis=1).clip(min=1e-320))
    re = exps * _LN2 + n * math.log(t_abs)
    return re, np.fmod(n * phi, 2 * math.pi), mags


def eval_series(
    s: CoeffStream, t_abs: float, phi: float = 0.0, M: int | None = None, T: float | None = None
) -> ScaledClass:
    """exp(-T |t|) * sum_m J_{rm} t^{rm + beta} at t = t_abs e^{i phi}."""
    if t_abs <= 0:
        raise ValidationError("t_abs must be positive")
    M = s.M if M is None else M
    if M > s.M:
        raise TruncationError(f"stream has {s.M} terms, {M} requested")
    T = crude_T(s) if T is None else float(T)
    re, ph, mags = _term_logs(s, t_abs, phi, M)
    size = re + mags
    live = np.isfinite(size) & (mags > -700)
    peak = float(size[live].max())
    if M >= 1 and size[M] > peak - TRUNCATION_MARGIN:
        need = max(required_M(T, t_abs, s.r), M + 1)
        raise TruncationError(
            f"last term is only {peak - size[M]:.1f} nats below the peak; need about M = {need}"
        )
    mant = s.mantissas()[: M + 1]
    w = np.exp(re - peak + 1j * ph)
    terms = mant * w[:, None]
    total = np.array([complex(math.fsum(terms[:, k].real), math.fsum(terms[:, k].imag)) for k in range(s.ring.size)])
    logt = complex(math.log(t_abs), phi)
    total = mul(total, exp_class(nilpotent_part(s.beta) * logt, s.ring), s.ring)
    return scaled_from_log(peak - T * t_abs, total)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuousReport:
    rows: tuple[dict, ...]

    def to_json(self) -> dict:
        return {"rows": list(self.rows)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["phi", "t", "deviation", "decay_ratio"])
        for row in self.rows:
            wr.writerow([_fmt(row["phi"]), _fmt(row["t"]), _fmt(row["deviation"]), _fmt(row["decay_ratio"])])
        return buf.getvalue()


def _fmt(x) -> str:
    return "" if x is None else f"{x:.16e}"


def default_t_grid(T: float, r: int, M: int) -> list[float]:
    cap = 0.8 * r * M / T
    return [t for t in (10.0, 20.0, 40.0, 80.0) if t <= cap] or [cap]


def continuous_check(
    s: CoeffStream, sc: AmlScaling, phis: Sequence[float], t_grid: Sequence[float] | None = None
) -> ContinuousReport:
    """Compare e^{-T|t|} alpha(t e^{i phi}) with the predicted ray limits."""
    ring = s.ring
    nA = class_norm(sc.A)
    if nA == 0:
        raise ValidationError("A = 0: nothing to compare with")
    t_grid = default_t_grid(sc.T, s.r, s.M) if t_grid is None else t_grid
    period = 2 * math.pi / s.r
    rows = []
    for phi in phis:
        k = (sc.theta + phi) / period
        aligned = abs(k - round(k)) < 1e-9
        corr = exp_class(-1j * (sc.theta + phi) * s.beta, ring) if aligned else None
        for t in t_grid:
            v = eval_series(s, t, phi, T=sc.T).to_class()
            if aligned:
                dev = class_norm(s.r * mul(corr, v, ring) - sc.A) / nA
                rows.append({"phi": float(phi), "t": float(t), "deviation": dev, "decay_ratio": None})
            else:
                rows.append({"phi": float(phi), "t": float(t), "deviation": None, "decay_ratio": class_norm(v) / nA})
    return ContinuousReport(tuple(rows))


# ---------------------------------------------------------------------------


def ml_eval(alpha: float, beta0: complex, z: complex, tol: float = 1e-16) -> complex:
    """Mittag-Leffler function E_{alpha, beta}(z) = sum z^n / Gamma(alpha n + beta)."""
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    z = complex(z)
    beta0 = complex(beta0)
    if z == 0:
        try:
            return cmath.exp(-log_gamma(beta0))
        except DomainError:
            return 0j
    logz = cmath.log(z)
    logs = []
    best = -math.inf
    for n in range(1_000_000):
        try:
            lt = n * logz - log_gamma(alpha * n + beta0)
        except DomainError:
            logs.append(None)
            continue
        logs.append(lt)
        best = max(best, lt.real)
        # past the peak and below tolerance relative to it
        prev = logs[-2] if n > 0 else None
        if n > 5 and prev is not None and lt.real < prev.real and lt.real < best + math.log(tol) - 5:
            break
    else:
        raise ValidationError("tolerance not reached within 10^6 terms")
    vals = [cmath.exp(l - best) for l in logs if l is not None]
    total = complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
    if best > 709:
        return complex(math.inf, 0)
    return total * math.exp(best)


# ---------------------------------------------------------------------------
# Riemann-Liouville integrals


def _graded_nodes(n: int, panels: int, levels: int, sigma: float = 0.15) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [0, 1] with geometric refinement at both ends."""
    h = 1.0 / panels
    inner = [h * sigma**k for k in range(levels, 0, -1)]
    cuts = [0.0] + inner + [h * k for k in range(1, panels)] + [1.0 - x for x in reversed(inner)] + [1.0]
    x, w = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _eval_f(f: Callable, x: np.ndarray, ring: RingPresentation) -> np.ndarray:
    vals = np.asarray(f(x), dtype=complex)
    if vals.shape == x.shape:
        return vals[..., None] * unit(ring)
    if vals.shape == x.shape + (ring.size,):
        return vals
    raise ValidationError(f"f returned shape {vals.shape}; expected {x.shape} or {x.shape + (ring.size,)}")


def rl_integral_many(
    f: Callable,
    alpha: ClassValue,
    ts: np.ndarray,
    ring: RingPresentation,
    n: int = 16,
    panels: int = 8,
    levels: int = 16,
) -> np.ndarray:
    """I_alpha<f>(t) for an array of t; returns shape ``ts.shape + (ring.size,)``.

    With y = t - x and u = (y/t)^a (a = Re alpha_0) the weight y^{a-1} dy
    becomes (t^a/a) du; the leftover factors y^{i b + nilpotent} carry only
    logarithmic endpoint behaviour, which the graded panels absorb.
    """
    alpha = as_class(alpha, ring)
    a = float(alpha[0].real)
    b = float(alpha[0].imag)
    if a <= 0:
        raise ValidationError("Riemann-Liouville order needs Re alpha_0 > 0")
    ts = np.asarray(ts, dtype=float)
    if np.any(ts <= 0):
        raise ValidationError("t must be positive")
    u, wu = _graded_nodes(n, panels, levels)
    lu = np.log(u) / a
    shape = ts.shape
    tt = ts.reshape(-1, 1)
    x = -tt * np.expm1(lu)[None, :]  # t - y, accurate near u = 1
    logy = np.log(tt) + lu[None, :]
    kern = exp_nilpotent_many(logy, nilpotent_part(alpha), ring) * np.exp(1j * b * logy)[..., None]
    fv = _eval_f(f, x, ring)
    prod = mul_many(fv, kern, ring)
    integral = np.tensordot(prod, wu, axes=([1], [0]))
    integral = integral * (tt**a / a)
    rg = reciprocal_gamma(alpha, ring)
    out = mul_many(integral, rg[None, :], ring)
    return out.reshape(shape + (ring.size,))


def rl_integral(
    f: Callable, alpha: ClassValue, t: float, ring: RingPresentation, n: int = 16, panels: int = 8, levels: int = 16
) -> ClassValue:
    """I_alpha<f>(t) = int_0^t f(x) (t - x)^{alpha - 1} / Gamma(alpha) dx."""
    return rl_integral_many(f, alpha, np.array([float(t)]), ring, n, panels, levels)[0]


def _laplace_tail(lam: complex, alpha: ClassValue, t: float, ring: RingPresentation, n: int = 120) -> ClassValue:
    """int_0^inf exp(-lam s) (t + s)^{alpha - 1} ds by Gauss-Laguerre."""
    ar = lam.real
    v, w = np.polynomial.laguerre.laggauss(n)
    s = v / ar
    one = unit(ring)
    am1 = as_class(alpha, ring) - one
    logts = np.log(t + s)
    vals = exp_nilpotent_many(logts, nilpotent_part(am1), ring) * np.exp(am1[0] * logts)[:, None]
    phase = np.exp(-1j * lam.imag * s)
    return (w * phase) @ vals / ar


def rl_property_check(
    alpha: ClassValue,
    beta: ClassValue,
    lam: complex,
    t_grid: Sequence[float],
    ring: RingPresentation,
    semigroup_t: float = 1.5,
    quad: dict | None = None,
) -> dict:
    """Numerical residuals of the semigroup law and the exponential asymptotics."""
    q = {"n": 12, "panels": 6, "levels": 14} | (quad or {})
    alpha = as_class(alpha, ring)
    beta = as_class(beta, ring)
    if alpha[0].real <= 0 or beta[0].real <= 0:
        raise ValidationError("need Re alpha_0 > 0 and Re beta_0 > 0")
    lam = complex(lam)
    report: dict = {"lambda": [lam.real, lam.imag]}

    # semigroup I_a I_b = I_{a+b}
    funcs = {"1": lambda x: np.ones_like(x), "exp(x/2)": lambda x: np.exp(x / 2), "cos(x)": np.cos}
    semi = {}
    for name, f in funcs.items():
        inner = lambda x, f=f: rl_integral_many(f, beta, x, ring, **q)
        lhs = rl_integral(inner, alpha, semigroup_t, ring, **q)
        rhs = rl_integral(f, alpha + beta, semigroup_t, ring, **q)
        semi[name] = class_norm(lhs - rhs) / max(class_norm(rhs), 1e-300)
    report["semigroup"] = semi
    report["semigroup_max"] = max(semi.values())

    one = unit(ring)
    if lam.real > 0:
        if abs(cmath.phase(lam)) >= math.pi / 2:
            raise ValidationError("arg(lambda) must lie in (-pi/2, pi/2)")
        rg = reciprocal_gamma(alpha, ring)
        scaled = []
        for t in t_grid:
            tam1 = power_t(alpha - one, t, ring)
            lead = mul(tam1, rg, ring) / lam
            tail = mul(_laplace_tail(lam, alpha, t, ring), rg, ring)
            # I - lam^{-alpha} e^{lam t} + t^{alpha-1}/(lam Gamma(alpha)) = lead - tail
            scaled.append(class_norm(lead - tail) / op_norm(tam1, ring))
        report["scaled_residuals"] = scaled
        report["decreasing"] = all(b < a for a, b in zip(scaled[:-1], scaled[1:]))
        # direct quadrature agrees with the tail representation at a small t
        t0 = 1.0
        direct = rl_integral(lambda x: np.exp(lam * x), alpha, t0, ring, n=20, panels=max(8, int(4 * abs(lam))), levels=18)
        lam_pow = exp_class(-alpha * cmath.log(lam), ring)
        via_tail = cmath.exp(lam * t0) * lam_pow - mul(_laplace_tail(lam, alpha, t0, ring), rg, ring)
        report["identity_residual"] = class_norm(direct - via_tail) / class_norm(direct)
    else:
        norms = []
        for t in t_grid:
            val = rl_integral(
                lambda x: np.exp(lam * x), alpha, t, ring, n=16, panels=max(8, int(2 * abs(lam) * t)), levels=16
            )
            norms.append(class_norm(val))
        slopes = [
            math.log(b / a) / math.log(t1 / t0)
            for (a, b, t0, t1) in zip(norms[:-1], norms[1:], t_grid[:-1], t_grid[1:])
            if a > 0 and b > 0
        ]
        bound = max(float(alpha[0].real), 1.0) + ring.dim_c
        report["norms"] = norms
        report["growth_exponents"] = slopes
        report["polynomial_bound"] = bool(all(sl <= bound for sl in slopes))
    return report
