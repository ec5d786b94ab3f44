"""Persistence and configuration: stream caches, manifold specs and report writers.

Cache layout (all integers little-endian)::

    b"AMLJSTRM"              8-byte magic
    u32                      header length in bytes
    header                   UTF-8 JSON, sorted keys, compact separators
    M+1 records              int64 exp2, then ring.size complex128 values

The header carries the format version, the full ring description with its
hash, ``r``, ``beta`` and the generator provenance.  Loading rejects other
versions and any ring whose hash does not match.
"""

from __future__ import annotations

import configparser
import json
import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import CacheFormatError, ValidationError
from .ring import RingPresentation, ScaledClass, projective_ring, restrict_hypersurface, tensor_ring, x3_ring
from .streams import (
    CoeffStream,
    ToricData,
    hypersurface_stream,
    product_stream,
    projective_stream,
    projective_toric_data,
    toric_stream,
    x3_toric_data,
)

__all__ = [
    "CACHE_MAGIC",
    "CACHE_VERSION",
    "ManifoldSpec",
    "encode_stream",
    "decode_stream",
    "write_cache",
    "read_cache",
    "parse_spec_tokens",
    "load_manifold_config",
    "build_ring",
    "build_stream",
    "toric_data_for",
    "to_jsonable",
    "dumps_json",
    "format_sci",
]

CACHE_MAGIC = b"AMLJSTRM"
CACHE_VERSION = 1
_KINDS = ("projective", "product", "hypersurface", "X3", "custom")


# ---------------------------------------------------------------------------
# JSON helpers


def to_jsonable(obj: Any) -> Any:
    """Convert numpy arrays and complex numbers into plain JSON values.

    Complex numbers become ``[re, im]`` pairs; this matches the ring and
    scaling serialisations used elsewhere.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def format_sci(x: float) -> str:
    """Scientific notation with 17 significant digits (exact float round trip)."""
    return f"{x:.16e}"


# ---------------------------------------------------------------------------
# stream cache


def _header(s: CoeffStream) -> dict:
    ring = s.ring
    return {
        "version": CACHE_VERSION,
        "ring": ring.to_dict(),
        "ring_hash": ring.hash(),
        "r": s.r,
        "beta": [[float(z.real), float(z.imag)] for z in s.beta],
        "provenance": to_jsonable(s.provenance),
        "M": s.M,
        "dim": ring.size,
    }


def encode_stream(s: CoeffStream) -> bytes:
    head = json.dumps(_header(s), sort_keys=True, separators=(",", ":")).encode("utf-8")
    rec = np.dtype([("exp2", "<i8"), ("v", "<c16", (s.ring.size,))])
    payload = np.empty(len(s.coeffs), dtype=rec)
    payload["exp2"] = s.exponents()
    payload["v"] = s.mantissas()
    return CACHE_MAGIC + struct.pack("<I", len(head)) + head + payload.tobytes()


def decode_stream(blob: bytes, expected_ring: RingPresentation | None = None) -> CoeffStream:
    if blob[: len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise CacheFormatError("not a stream cache (bad magic)")
    off = len(CACHE_MAGIC)
    if len(blob) < off + 4:
        raise CacheFormatError("truncated cache header")
    (hlen,) = struct.unpack_from("<I", blob, off)
    off += 4
    try:
        head = json.loads(blob[off : off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CacheFormatError(f"unreadable cache header: {exc}") from exc
    off += hlen
    if head.get("version") != CACHE_VERSION:
        raise CacheFormatError(f"cache version {head.get('version')} is not supported (expected {CACHE_VERSION})")
    ring = RingPresentation.from_dict(head["ring"])
    if ring.hash() != head["ring_hash"]:
        raise CacheFormatError("ring description does not match its recorded hash")
    if expected_ring is not None and expected_ring.hash() != head["ring_hash"]:
        raise CacheFormatError("cache was written for a different ring")
    n, dim = int(head["M"]) + 1, int(head["dim"])
    if dim != ring.size:
        raise CacheFormatError("payload width disagrees with the ring")
    rec = np.dtype([("exp2", "<i8"), ("v", "<c16", (dim,))])
    if len(blob) - off != n * rec.itemsize:
        raise CacheFormatError(f"payload has {len(blob) - off} bytes, expected {n * rec.itemsize}")
    payload = np.frombuffer(blob, dtype=rec, count=n, offset=off)
    coeffs = tuple(ScaledClass(np.array(p["v"], dtype=complex), int(p["exp2"])) for p in payload)
    beta = np.array([complex(a, b) for a, b in head["beta"]])
    return CoeffStream(ring=ring, r=int(head["r"]), beta=beta, coeffs=coeffs, provenance=head["provenance"])


def write_cache(s: CoeffStream, path: str | Path) -> None:
    Path(path).write_bytes(encode_stream(s))


def read_cache(path: str | Path, expected_ring: RingPresentation | None = None) -> CoeffStream:
    return decode_stream(Path(path).read_bytes(), expected_ring)


# ---------------------------------------------------------------------------
# manifold specs


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    kind: str
    params: dict = field(default_factory=dict)
    M: int = 200

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown manifold kind {self.kind!r}; expected one of {_KINDS}")
        if int(self.M) < 1:
            raise ValidationError("M must be >= 1")
        p = self.params
        if self.kind == "projective":
            _check_int(p, "N", 1, 12)
        elif self.kind == "hypersurface":
            N = _check_int(p, "N", 2, 12)
            _check_int(p, "d", 1, N)  # d <= N keeps the hypersurface Fano
        elif self.kind == "product":
            factors = p.get("factors")
            if not isinstance(factors, (list, tuple)) or len(factors) != 2:
                raise ValidationError("product needs exactly two factors")
            for f in factors:
                if not isinstance(f, ManifoldSpec) or f.kind == "custom":
                    raise ValidationError("product factors must be builtin manifolds")
        elif self.kind == "custom":
            if "ring" not in p:
                raise ValidationError("custom manifold needs a ring description")


def _check_int(p: dict, key: str, lo: int, hi: int) -> int:
    if key not in p:
        raise ValidationError(f"missing parameter {key}")
    try:
        v = int(p[key])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"parameter {key} must be an integer") from exc
    if not lo <= v <= hi:
        raise ValidationError(f"parameter {key}={v} outside [{lo}, {hi}]")
    return v


_PN = re.compile(r"^P(\d+)$", re.IGNORECASE)


def _builtin(token: str, M: int) -> ManifoldSpec:
    if token.upper() == "X3":
        return ManifoldSpec("X3", "X3", {}, M)
    m = _PN.match(token)
    if m:
        return ManifoldSpec(f"P{m.group(1)}", "projective", {"N": int(m.group(1))}, M)
    raise ValidationError(f"unknown builtin manifold {token!r} (use P<N> or X3)")


def parse_spec_tokens(tokens: list[str], M: int = 200) -> ManifoldSpec:
    """``P3`` | ``X3`` | ``product P1 P1`` | ``hypersurface P3 2`` | path to a config file."""
    if not tokens:
        raise ValidationError("no manifold given")
    head = tokens[0]
    if len(tokens) == 1 and Path(head).is_file():
        return load_manifold_config(head, M_override=M)
    if head == "product":
        if len(tokens) != 3:
            raise ValidationError("usage: product <X> <Y>")
        fx, fy = (_builtin(t, M) for t in tokens[1:])
        return ManifoldSpec(f"{fx.name}x{fy.name}", "product", {"factors": [fx, fy]}, M)
    if head == "hypersurface":
        if len(tokens) != 3:
            raise ValidationError("usage: hypersurface P<N> <d>")
        amb = _builtin(tokens[1], M)
        if amb.kind != "projective":
            raise ValidationError("hypersurfaces are supported in projective space only")
        try:
            d = int(tokens[2])
        except ValueError as exc:
            raise ValidationError("degree must be an integer") from exc
        return ManifoldSpec(f"Z{d}_{amb.name}", "hypersurface", {"N": amb.params["N"], "d": d}, M)
    if len(tokens) != 1:
        raise ValidationError(f"cannot parse manifold {' '.join(tokens)!r}")
    return _builtin(head, M)


def _complex_list(text: str) -> list[complex]:
    try:
        return [complex(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse numbers in {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse integers in {text!r}") from exc


def _custom_ring(cp: configparser.ConfigParser, name: str) -> RingPresentation:
    if not cp.has_section("ring") or not cp.has_section("mult"):
        raise ValidationError("custom manifold needs [ring] and [mult] sections")
    sec = cp["ring"]
    basis = [b.strip() for b in sec.get("basis", "").split(",") if b.strip()]
    n = len(basis)
    mult = np.zeros((n, n, n), dtype=complex)
    for line in cp["mult"].get("triples", "").strip().splitlines():
        parts = line.split()
        if not parts:
            continue
        if len(parts) not in (4, 5):
            raise ValidationError(f"bad multiplication triple {line!r}; expected 'i j k re [im]'")
        i, j, k = (int(x) for x in parts[:3])
        val = complex(float(parts[3]), float(parts[4]) if len(parts) == 5 else 0.0)
        if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
            raise ValidationError(f"triple index out of range in {line!r}")
        mult[i, j, k] = val
        mult[j, i, k] = val  # commutative: one triple per unordered pair suffices
    try:
        return RingPresentation(
            name=name,
            basis=tuple(basis),
            degrees=tuple(_int_list(sec["degrees"])),
            mult=mult,
            dim_c=sec.getint("dim_c"),
            fano_index=sec.getint("fano_index"),
            c1=np.array(_complex_list(sec["c1"])),
            point_functional=np.array(_complex_list(sec["point"])),
            integrate_functional=np.array(_complex_list(sec["top"])),
            meta={"source": "config"},
        )
    except KeyError as exc:
        raise ValidationError(f"[ring] is missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad [ring] entry: {exc}") from exc


def _custom_toric(cp: configparser.ConfigParser, ring: RingPresentation) -> ToricData | None:
    if not cp.has_section("toric"):
        return None
    sec = cp["toric"]
    divisors = []
    for line in sec.get("divisors", "").strip().splitlines():
        if not line.strip():
            continue
        vec, _, mult = line.partition(":")
        D = np.array(_complex_list(vec))
        if D.shape != (ring.size,):
            raise ValidationError(f"toric divisor {line!r} has the wrong length")
        divisors.append((D, int(mult) if mult.strip() else 1))
    rows = [_int_list(line) for line in sec.get("pairings", "").strip().splitlines() if line.strip()]
    return ToricData(
        divisors=tuple(divisors), mori_pairings=np.array(rows), c1_degrees=tuple(_int_list(sec["c1_degrees"]))
    )


def load_manifold_config(path: str | Path, M_override: int | None = None) -> ManifoldSpec:
    """Read a ``key = value`` manifold config (see the README for the layout)."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep key case
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ValidationError(f"config parse error: {exc}") from exc
    if not cp.has_section("manifold"):
        raise ValidationError("config needs a [manifold] section")
    sec = cp["manifold"]
    kind = sec.get("kind", "").strip()
    name = sec.get("name", kind or "manifold").strip()
    M = M_override if M_override is not None else sec.getint("M", 200)
    if kind == "projective":
        return ManifoldSpec(name, kind, {"N": sec.getint("N")}, M)
    if kind == "X3":
        return ManifoldSpec(name, kind, {}, M)
    if kind == "hypersurface":
        return ManifoldSpec(name, kind, {"N": sec.getint("N"), "d": sec.getint("d")}, M)
    if kind == "product":
        toks = [t.strip() for t in sec.get("factors", "").split(",") if t.strip()]
        if len(toks) != 2:
            raise ValidationError("product needs 'factors = X, Y'")
        return ManifoldSpec(name, kind, {"factors": [_builtin(t, M) for t in toks]}, M)
    if kind == "custom":
        ring = _custom_ring(cp, name)
        return ManifoldSpec(name, kind, {"ring": ring, "toric": _custom_toric(cp, ring)}, M)
    raise ValidationError(f"unknown manifold kind {kind!r}")


def build_ring(spec: ManifoldSpec) -> RingPresentation:
    p = spec.params
    if spec.kind == "projective":
        return projective_ring(int(p["N"]))
    if spec.kind == "X3":
        return x3_ring()
    if spec.kind == "hypersurface":
        return restrict_hypersurface(projective_ring(int(p["N"])), int(p["d"]))
    if spec.kind == "product":
        fx, fy = p["factors"]
        return tensor_ring(build_ring(fx), build_ring(fy))
    return p["ring"]


def toric_data_for(spec: ManifoldSpec, ring: RingPresentation) -> ToricData | None:
    if spec.kind == "X3":
        return x3_toric_data(ring)
    if spec.kind == "projective":
        return projective_toric_data(ring)
    if spec.kind == "custom":
        return spec.params.get("toric")
    return None


def build_stream(spec: ManifoldSpec, M: int | None = None) -> CoeffStream:
    """Generate the coefficient stream described by ``spec``."""
    M = spec.M if M is None else M
    p = spec.params
    if spec.kind == "projective":
        return projective_stream(int(p["N"]), M)
    if spec.kind == "X3":
        ring = x3_ring()
        return toric_stream(x3_toric_data(ring), ring, M)
    if spec.kind == "hypersurface":
        N, d = int(p["N"]), int(p["d"])
        return hypersurface_stream(projective_stream(N, M), d, M)
    if spec.kind == "product":
        fx, fy = p["factors"]
        rx, ry = build_stream(fx, 1).r, build_stream(fy, 1).r
        r = math.gcd(rx, ry)
        sx = build_stream(fx, (r * M) // rx)
        sy = build_stream(fy, (r * M) // ry)
        return product_stream(sx, sy, M)
    data = p.get("toric")
    if data is None:
        raise ValidationError("custom manifold has no [toric] section; cannot generate a stream")
    return toric_stream(data, p["ring"], M)
