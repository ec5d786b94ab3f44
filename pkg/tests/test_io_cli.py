from __future__ import annotations

import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amlj.cli import main
from amlj.errors import CacheFormatError, ValidationError
from amlj.io import (
    CACHE_MAGIC,
    ManifoldSpec,
    build_stream,
    decode_stream,
    encode_stream,
    load_manifold_config,
    parse_spec_tokens,
    read_cache,
    write_cache,
)
from amlj.ring import ScaledClass, projective_ring
from amlj.streams import CoeffStream, projective_stream

finite = st.floats(-1e6, 1e6, allow_nan=False)


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(finite, finite, finite, finite, st.integers(-4000, 4000)), min_size=1, max_size=8))
def test_cache_round_trip_is_bit_exact(rows):
    R = projective_ring(1)
    coeffs = tuple(ScaledClass(np.array([complex(a, b), complex(c, d)]), e) for a, b, c, d, e in rows)
    s = CoeffStream(ring=R, r=2, beta=R.beta_default(), coeffs=coeffs, provenance={"generator": "test"})
    blob = encode_stream(s)
    back = decode_stream(blob)
    assert encode_stream(back) == blob
    for x, y in zip(s.coeffs, back.coeffs):
        assert x.exp2 == y.exp2 and x.mantissa.tobytes() == y.mantissa.tobytes()


def test_cache_file_round_trip(tmp_path):
    s = projective_stream(3, 50)
    p = tmp_path / "p3.cache"
    write_cache(s, p)
    back = read_cache(p, expected_ring=s.ring)
    assert back.M == 50 and back.r == 4 and np.array_equal(back.beta, s.beta)
    assert p.read_bytes().startswith(CACHE_MAGIC)


def _patch_header(blob: bytes, **changes) -> bytes:
    n = int.from_bytes(blob[8:12], "little")
    head = json.loads(blob[12 : 12 + n])
    head.update(changes)
    new = json.dumps(head, sort_keys=True, separators=(",", ":")).encode()
    return blob[:8] + len(new).to_bytes(4, "little") + new + blob[12 + n :]


def test_cache_rejects_bad_input():
    s = projective_stream(2, 10)
    blob = encode_stream(s)
    with pytest.raises(CacheFormatError, match="version"):
        decode_stream(_patch_header(blob, version=99))
    with pytest.raises(CacheFormatError, match="hash"):
        decode_stream(_patch_header(blob, ring_hash="0" * 64))
    with pytest.raises(CacheFormatError, match="different ring"):
        decode_stream(blob, expected_ring=projective_ring(3))
    with pytest.raises(CacheFormatError, match="magic"):
        decode_stream(b"XXXXXXXX" + blob[8:])
    with pytest.raises(CacheFormatError, match="payload"):
        decode_stream(blob[:-3])


def test_spec_tokens():
    assert parse_spec_tokens(["P3"]).params == {"N": 3}
    assert parse_spec_tokens(["X3"]).kind == "X3"
    assert parse_spec_tokens(["hypersurface", "P3", "2"]).params == {"N": 3, "d": 2}
    prod = parse_spec_tokens(["product", "P1", "P2"], M=40)
    assert build_stream(prod).r == 1
    with pytest.raises(ValidationError):
        parse_spec_tokens(["hypersurface", "P3", "5"])
    with pytest.raises(ValidationError):
        ManifoldSpec("bad", "sphere")


def test_config_files(tmp_path):
    cfg = tmp_path / "quadric.ini"
    cfg.write_text("[manifold]\nname = Q\nkind = hypersurface\nN = 3\nd = 2\nM = 30\n")
    spec = load_manifold_config(cfg)
    assert spec.M == 30 and build_stream(spec).r == 2
    cfg.write_text("[manifold]\nkind = product\nfactors = P1, P1\nM = 20\n")
    assert build_stream(load_manifold_config(cfg)).r == 2
    cfg.write_text("[manifold]\nkind = projective\n")
    with pytest.raises(ValidationError):
        load_manifold_config(cfg)
    cfg.write_text("no sections at all")
    with pytest.raises(ValidationError):
        load_manifold_config(cfg)


CUSTOM_P2 = """
[manifold]
name = myP2
kind = custom
M = 40

[ring]
basis = 1, H, H^2
degrees = 0, 2, 4
dim_c = 2
fano_index = 3
c1 = 0, 3, 0
point = 0, 0, 1
top = 0, 0, 1

[mult]
triples =
    0 0 0 1
    0 1 1 1
    0 2 2 1
    1 1 2 1

[toric]
divisors =
    0, 1, 0 : 3
pairings =
    1
c1_degrees = 3
"""


def test_custom_toric_config_matches_builtin(tmp_path):
    cfg = tmp_path / "p2.ini"
    cfg.write_text(CUSTOM_P2)
    s = build_stream(load_manifold_config(cfg))
    ref = projective_stream(2, 40)
    assert s.r == 3
    for m in (1, 10, 40):
        assert np.allclose(s.value(m), ref.value(m), rtol=1e-13, atol=0)


def test_cli_gen_and_fit(tmp_path, capsys):
    cache = tmp_path / "p3.cache"
    code, out, _ = _run(capsys, "gen", "P3", "--M", "200", "--out", str(cache))
    assert code == 0 and json.loads(out)["r"] == 4
    s = read_cache(cache)
    assert s.M == 200 and s.value(0)[0] == 1
    code, out, _ = _run(capsys, "fit", str(cache), "--window", "100:200")
    fit = json.loads(out)
    assert code == 0 and abs(fit["T"] - 4) <= 1e-3
    # deterministic output
    assert _run(capsys, "fit", str(cache), "--window", "100:200")[1] == out


def test_cli_table_parses_back(tmp_path, capsys):
    from amlj.aml import scale_coefficients
    from amlj.spectra import x3_spectrum

    cache = tmp_path / "x3.cache"
    _run(capsys, "gen", "X3", "--M", "30", "--out", str(cache))
    code, out, _ = _run(capsys, "table-x3", str(cache))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert [int(r[0]) for r in rows[1:]] == [14, 15, 16, 17, 30]
    want = scale_coefficients(read_cache(cache), x3_spectrum().spectral_radius, math.pi, "table", [14, 15, 16, 17, 30])
    got = np.array([[complex(float(a), float(b)) for a, b in zip(r[1::2], r[2::2])] for r in rows[1:]])
    assert np.array_equal(got, want)


def test_cli_other_commands(tmp_path, capsys):
    code, out, _ = _run(capsys, "spectra", "X3")
    assert code == 0 and abs(json.loads(out)["spectral_radius"] - 26.987658080712844) <= 1e-9
    code, out, _ = _run(capsys, "rl-check", "--tgrid", "5,10")
    rep = json.loads(out)
    assert code == 0 and rep["semigroup_max"] <= 1e-8
    cache = tmp_path / "p1.cache"
    _run(capsys, "gen", "P1", "--M", "600", "--out", str(cache))
    code, out, _ = _run(capsys, "continuous", str(cache), "--phi", "0,pi/4", "--tgrid", "20")
    assert code == 0 and out.splitlines()[0] == "phi,t,deviation,decay_ratio"


def test_cli_exit_codes(tmp_path, capsys):
    assert _run(capsys, "gen", "P0")[0] == 2
    assert _run(capsys, "fit", str(tmp_path / "missing.cache"))[0] == 2
    bad = tmp_path / "bad.cache"
    bad.write_bytes(b"not a cache")
    assert _run(capsys, "fit", str(bad))[0] == 2
    cache = tmp_path / "p3.cache"
    _run(capsys, "gen", "P3", "--M", "200", "--out", str(cache))
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"T": 5.0, "theta": 0.0, "A": [[1, 0], [0, 0], [0, 0], [0, 0]]}))
    code, _, err = _run(capsys, "report", str(cache), "--scaling", str(wrong), "--strict")
    assert code == 3 and "numeric" in err
