"""Command line: ``amlj <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 failed numerical self-check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .aml import AmlScaling, fit_scaling, non_aml_scan, scale_coefficients, verify_aml
from .errors import AmlError, NumericQualityError, ValidationError
from .evaluator import continuous_check, rl_property_check
from .gamma import gamma_hat, reciprocal_gamma, x3_divisors, x3_target_class
from .io import (
    ManifoldSpec,
    build_ring,
    build_stream,
    dumps_json,
    format_sci,
    parse_spec_tokens,
    read_cache,
    toric_data_for,
    write_cache,
)
from .ring import RingPresentation, as_class, basis_vector, mul, unit
from .spectra import (
    c0_correction,
    hypersurface_T,
    pn_spectrum,
    spectrum_from_eigenvalues,
    x3_spectrum,
)
from .streams import projective_stream

X3_TABLE_ROWS = (14, 15, 16, 17, 30)


# ---------------------------------------------------------------------------
# argument helpers


def _window(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError as exc:
        raise ValidationError(f"window must look like m0:m1, got {text!r}") from exc


def _floats(text: str | None, default: Sequence[float] | None = None) -> list[float] | None:
    if text is None:
        return None if default is None else list(default)
    out = []
    for tok in text.replace(",", " ").split():
        tok_l = tok.lower()
        try:
            if "pi" in tok_l:
                # accepts pi, -pi, pi/4, 3pi/4, 0.5pi
                num, _, den = tok_l.partition("/")
                coef = num.replace("pi", "").replace("*", "")
                c = float(coef) if coef not in ("", "+", "-") else float(coef + "1")
                out.append(c * math.pi / (float(den) if den else 1.0))
            else:
                out.append(float(tok))
        except ValueError as exc:
            raise ValidationError(f"cannot parse number {tok!r}") from exc
    return out


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse integer list {text!r}") from exc


def _class_arg(text: str, ring: RingPresentation) -> np.ndarray:
    """A class as comma-separated complex coordinates, e.g. ``0.5,0.3j``."""
    try:
        vals = [complex(t.replace(" ", "")) for t in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"cannot parse class {text!r}") from exc
    if len(vals) == 1:
        return vals[0] * unit(ring)
    return as_class(vals, ring)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _spec(args) -> ManifoldSpec:
    return parse_spec_tokens(args.manifold, M=args.M)


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _class_json(v: np.ndarray, ring: RingPresentation) -> dict:
    return {"basis": list(ring.basis), "values": [[float(z.real), float(z.imag)] for z in v]}


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    spec = _spec(args)
    s = build_stream(spec)
    out = args.out or f"{spec.name}.amlc"
    write_cache(s, out)
    summary = {
        "cache": out,
        "manifold": spec.name,
        "M": s.M,
        "r": s.r,
        "ring_hash": s.ring.hash(),
        "provenance": s.provenance,
    }
    sys.stdout.write(dumps_json(summary))
    return 0


def cmd_fit(args) -> int:
    s = read_cache(args.cache)
    sc = fit_scaling(s, args.functional, _window(args.window), args.extrapolation)
    _emit(dumps_json(sc.to_json()), args.out)
    return 0


def _scaling_from(args, s) -> AmlScaling:
    if getattr(args, "scaling", None):
        return AmlScaling.from_json(json.loads(Path(args.scaling).read_text(encoding="utf-8")))
    return fit_scaling(s, args.functional, _window(args.window), args.extrapolation)


def _scaled_rows(s, T: float, theta: float, mode: str, ms: list[int]) -> list[list]:
    S = scale_coefficients(s, T, theta, mode, ms)
    header = ["m"] + [f"{part}({b})" for b in s.ring.basis for part in ("re", "im")]
    rows = [header]
    for m, row in zip(ms, S):
        rows.append([m] + [format_sci(x) for z in row for x in (z.real, z.imag)])
    return rows


def cmd_scale(args) -> int:
    s = read_cache(args.cache)
    if args.T is not None:
        T, theta = args.T, (_floats(args.theta) or [0.0])[0]
    else:
        sc = _scaling_from(args, s)
        T, theta = sc.T, sc.theta
    ms = _ints(args.ms) if args.ms else list(range(s.M + 1))
    if args.format == "json":
        S = scale_coefficients(s, T, theta, args.mode, ms)
        payload = {"T": T, "theta": theta, "mode": args.mode, "basis": list(s.ring.basis), "rows": {}}
        for m, row in zip(ms, S):
            payload["rows"][str(m)] = [[float(z.real), float(z.imag)] for z in row]
        _emit(dumps_json(payload), args.out)
    else:
        _emit(_csv(_scaled_rows(s, T, theta, args.mode, ms)), args.out)
    return 0


def _printed_number(z: complex) -> str:
    """Complex number in units of 1e-3 with 6 significant digits."""

    def g(x: float) -> str:
        return "0" if x == 0 else f"{x:.6g}"

    re, im = z.real * 1e3, z.imag * 1e3
    if im == 0:
        return g(re)
    if re == 0:
        return f"{g(im)}i"
    sign = "+" if im > 0 else "-"
    return f"{g(re)}{sign}{g(abs(im))}i"


def cmd_table_x3(args) -> int:
    s = read_cache(args.cache)
    if s.ring.name != "X3":
        raise ValidationError("table-x3 needs a cache generated for X3")
    T = args.T if args.T is not None else x3_spectrum().spectral_radius
    theta = (_floats(args.theta) or [math.pi])[0]
    ms = _ints(args.rows) if args.rows else list(X3_TABLE_ROWS)
    if args.variant == "printed":
        S = scale_coefficients(s, T, theta, "table", ms)
        rows = [["m"] + list(s.ring.basis)]
        for m, row in zip(ms, S):
            rows.append([m] + [_printed_number(z) for z in row])
        _emit(_csv(rows), args.out)
    else:
        _emit(_csv(_scaled_rows(s, T, theta, "table", ms)), args.out)
    return 0


def _spectrum_for(spec: ManifoldSpec):
    if spec.kind == "projective":
        return pn_spectrum(int(spec.params["N"]))
    if spec.kind == "X3":
        return x3_spectrum()
    if spec.kind == "product":
        fx, fy = (_spectrum_for(f) for f in spec.params["factors"])
        eigs = [a + b for a in fx.eigenvalues for b in fy.eigenvalues]
        return spectrum_from_eigenvalues(eigs)
    return None


def cmd_spectra(args) -> int:
    spec = _spec(args)
    rep = _spectrum_for(spec)
    if rep is not None:
        _emit(dumps_json(rep.to_json()), args.out)
        return 0
    if spec.kind == "hypersurface":
        N, d = int(spec.params["N"]), int(spec.params["d"])
        c0 = c0_correction(projective_stream(N, 2), d)
        T = hypersurface_T(float(N + 1), N + 1, d, c0)
        _emit(dumps_json({"predicted_T": T, "c0": c0, "r": N + 1 - d}), args.out)
        return 0
    raise ValidationError("no spectral model for custom rings")


def cmd_continuous(args) -> int:
    s = read_cache(args.cache)
    sc = _scaling_from(args, s)
    phis = _floats(args.phi, default=[0.0])
    tgrid = _floats(args.tgrid)
    rep = continuous_check(s, sc, phis, tgrid)
    if args.format == "json":
        _emit(dumps_json(rep.to_json()), args.out)
    else:
        _emit(rep.to_csv(), args.out)
    return 0


def _gamma_class_for(spec: ManifoldSpec, ring: RingPresentation) -> np.ndarray:
    if spec.kind == "projective":
        return gamma_hat([basis_vector(ring, 1)] * (ring.dim_c + 1), ring)
    if spec.kind == "X3":
        return gamma_hat(x3_divisors(ring), ring)
    if spec.kind == "product":
        fx, fy = spec.params["factors"]
        gx = _gamma_class_for(fx, build_ring(fx))
        gy = _gamma_class_for(fy, build_ring(fy))
        return np.kron(gx, gy)
    if spec.kind == "hypersurface":
        x = basis_vector(ring, 1)
        N, d = int(spec.params["N"]), int(spec.params["d"])
        return mul(gamma_hat([x] * (N + 1), ring), reciprocal_gamma(unit(ring) + d * x, ring), ring)
    data = toric_data_for(spec, ring)
    if data is None:
        raise ValidationError("custom ring without toric divisors: Chern roots unknown")
    return gamma_hat([D for D, m in data.divisors for _ in range(m)], ring)


def cmd_gamma_class(args) -> int:
    spec = _spec(args)
    ring = build_ring(spec)
    out = {"manifold": spec.name, "gamma_class": _class_json(_gamma_class_for(spec, ring), ring)}
    if spec.kind == "X3":
        out["target_class"] = _class_json(x3_target_class(ring), ring)
    _emit(dumps_json(out), args.out)
    return 0


def cmd_rl_check(args) -> int:
    ring = build_ring(parse_spec_tokens(args.ring.split(), M=1))
    alpha = _class_arg(args.alpha, ring)
    beta = _class_arg(args.beta, ring)
    try:
        lam = complex(args.lam.replace(" ", ""))
    except ValueError as exc:
        raise ValidationError(f"cannot parse lambda {args.lam!r}") from exc
    tgrid = _floats(args.tgrid, default=[5.0, 10.0, 20.0])
    rep = rl_property_check(alpha, beta, lam, tgrid, ring)
    _emit(dumps_json(rep), args.out)
    return 0


def cmd_report(args) -> int:
    s = read_cache(args.cache)
    sc = _scaling_from(args, s)
    ver = verify_aml(s, sc, _window(args.window))
    out = {
        "ring": s.ring.name,
        "r": s.r,
        "M": s.M,
        "provenance": s.provenance,
        "scaling": sc.to_json(),
        "verification": ver.to_json(),
    }
    w = _window(args.window) or (s.M // 2, s.M)
    scan = non_aml_scan(s, [sc.T * f for f in (0.9, 1.0, 1.1)], sc.theta, w)
    out["T_scan"] = scan
    _emit(dumps_json(out), args.out)
    if not ver.converged and args.strict:
        raise NumericQualityError("scaled coefficients do not converge on the window")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amlj", description="Coefficient asymptotics of quantum J-functions.")
    sub = p.add_subparsers(dest="command", required=True)

    def fit_flags(q, with_scaling: bool = True) -> None:
        q.add_argument("--window", help="fit window m0:m1 (default: second half)")
        q.add_argument("--functional", default="top", help="pt | top | idx:<k> | auto (default top)")
        q.add_argument("--extrapolation", default="aitken", choices=["aitken", "richardson", "none"])
        if with_scaling:
            q.add_argument("--scaling", help="JSON from 'fit' to use instead of fitting")

    q = sub.add_parser("gen", help="generate a coefficient stream and write a cache")
    q.add_argument("manifold", nargs="+", help="P<N> | X3 | product X Y | hypersurface P<N> d | config file")
    q.add_argument("--M", type=int, default=200)
    q.add_argument("--out")
    q.set_defaults(func=cmd_gen)

    q = sub.add_parser("fit", help="fit (T, theta, A)")
    q.add_argument("cache")
    fit_flags(q, with_scaling=False)
    q.add_argument("--out")
    q.set_defaults(func=cmd_fit)

    q = sub.add_parser("scale", help="scaled coefficients S_m")
    q.add_argument("cache")
    fit_flags(q)
    q.add_argument("--T", type=float)
    q.add_argument("--theta")
    q.add_argument("--ms", help="comma separated list of m (default all)")
    q.add_argument("--mode", default="gamma", choices=["gamma", "table"])
    q.add_argument("--format", default="csv", choices=["csv", "json"])
    q.add_argument("--out")
    q.set_defaults(func=cmd_scale)

    q = sub.add_parser("table-x3", help="table of scaled X3 coefficients")
    q.add_argument("cache")
    q.add_argument("--rows", help="comma separated m values (default 14,15,16,17,30)")
    q.add_argument("--T", type=float, help="default: spectral radius")
    q.add_argument("--theta", help="default: pi")
    q.add_argument("--variant", default="machine", choices=["machine", "printed"])
    q.add_argument("--out")
    q.set_defaults(func=cmd_table_x3)

    q = sub.add_parser("spectra", help="eigenvalues of c1 quantum multiplication")
    q.add_argument("manifold", nargs="+")
    q.add_argument("--M", type=int, default=1)
    q.add_argument("--out")
    q.set_defaults(func=cmd_spectra)

    q = sub.add_parser("continuous", help="series along rays versus the predicted limits")
    q.add_argument("cache")
    fit_flags(q)
    q.add_argument("--phi", help="ray angles, e.g. '0,pi/4'")
    q.add_argument("--tgrid", help="|t| values, e.g. '10,20,40'")
    q.add_argument("--format", default="csv", choices=["csv", "json"])
    q.add_argument("--out")
    q.set_defaults(func=cmd_continuous)

    q = sub.add_parser("gamma-class", help="Gamma class (and the X3 target class)")
    q.add_argument("manifold", nargs="+")
    q.add_argument("--M", type=int, default=1)
    q.add_argument("--out")
    q.set_defaults(func=cmd_gamma_class)

    q = sub.add_parser("rl-check", help="Riemann-Liouville property residuals")
    q.add_argument("--ring", default="P1", help="ring for class-valued orders (default P1)")
    q.add_argument("--alpha", default="0.5", help="class coordinates, e.g. '0.5,0.3'")
    q.add_argument("--beta", default="0.5")
    q.add_argument("--lambda", dest="lam", default="1")
    q.add_argument("--tgrid")
    q.add_argument("--out")
    q.set_defaults(func=cmd_rl_check)

    q = sub.add_parser("report", help="fit, verification and T scan in one JSON")
    q.add_argument("cache")
    fit_flags(q)
    q.add_argument("--strict", action="store_true", help="exit 3 when the residuals do not converge")
    q.add_argument("--out")
    q.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericQualityError as exc:
        print(f"amlj: numeric check failed: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, OSError) as exc:
        print(f"amlj: {exc}", file=sys.stderr)
        return 2
    except AmlError as exc:  # pragma: no cover - every subclass is handled above
        print(f"amlj: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
