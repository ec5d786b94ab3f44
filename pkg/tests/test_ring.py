from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amlj.errors import NotInvertibleError, ValidationError
from amlj.ring import (
    RingPresentation,
    ScaledClass,
    basis_vector,
    class_norm,
    exp_class,
    inverse,
    log_class,
    mul,
    mul_many,
    power_int,
    power_t,
    projective_ring,
    restrict_hypersurface,
    scaled_from_log,
    scaled_mul,
    scaled_sum,
    tensor_ring,
    unit,
    x3_ring,
)

from .strategies import ring_and_classes

PROPS = settings(max_examples=60, deadline=None)


def test_projective_ring_truncates():
    R = projective_ring(3)
    d = basis_vector(R, "d")
    assert np.allclose(power_int(d, 3, R), basis_vector(R, "d^3"))
    assert not np.any(power_int(d, 4, R))
    assert R.fano_index == 4 and R.dim_c == 3
    assert np.allclose(R.beta_default(), 1.5 * unit(R) + 4 * d)


def test_projective_ring_bounds():
    with pytest.raises(ValidationError):
        projective_ring(13)
    with pytest.raises(ValidationError):
        projective_ring(0)


def test_x3_relations():
    R = x3_ring()
    x1, x2 = basis_vector(R, "x1"), basis_vector(R, "x2")
    assert not np.any(power_int(x1, 4, R))
    assert not np.any(mul(x2, x2 - 3 * x1, R))
    top = mul(power_int(x1, 3, R), x2, R)
    assert R.integrate_functional @ top == 1
    assert np.allclose(R.c1, 4 * x1 + x2 + (x2 - 3 * x1))
    assert R.fano_index == 1


def test_tensor_ring_order_and_index():
    R = tensor_ring(projective_ring(1), projective_ring(2))
    assert R.size == 6 and R.fano_index == 1 and R.dim_c == 3
    assert R.meta["basis_order"] == "lexicographic(X, Y)"
    X, Y = projective_ring(1), projective_ring(2)
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=2) + 0j, rng.normal(size=3) + 0j
    c, e = rng.normal(size=2) + 0j, rng.normal(size=3) + 0j
    assert np.allclose(mul(np.kron(a, b), np.kron(c, e), R), np.kron(mul(a, c, X), mul(b, e, Y)))
    top = np.kron(basis_vector(X, 1), basis_vector(Y, 2))
    assert R.integrate_functional @ top == 1


def test_hypersurface_ring():
    Z = restrict_hypersurface(projective_ring(3), 2)
    assert Z.size == 3 and Z.fano_index == 2
    assert Z.integrate_functional[-1] == 2
    with pytest.raises(ValidationError):
        restrict_hypersurface(projective_ring(3), 4)


def test_structure_validation_rejects_bad_tables():
    R = projective_ring(1)
    data = R.to_dict()
    data["mult"].append([1, 1, 0, 1.0, 0.0])  # d*d = 1 breaks grading
    with pytest.raises(ValidationError):
        RingPresentation.from_dict(data)


def test_ring_dict_round_trip_and_hash():
    for R in (projective_ring(2), x3_ring(), tensor_ring(projective_ring(1), projective_ring(1))):
        back = RingPresentation.from_dict(json.loads(json.dumps(R.to_dict())))
        assert back.hash() == R.hash()
        assert np.array_equal(back.mult, R.mult)


def test_inverse_requires_unit_part():
    R = projective_ring(2)
    with pytest.raises(NotInvertibleError):
        inverse(basis_vector(R, 1), R)


@PROPS
@given(ring_and_classes(3))
def test_ring_axioms(data):
    R, (a, b, c) = data
    assert np.allclose(mul(a, b, R), mul(b, a, R))
    assert np.allclose(mul(mul(a, b, R), c, R), mul(a, mul(b, c, R), R), atol=1e-9)
    assert np.allclose(mul(a, b + c, R), mul(a, b, R) + mul(a, c, R))
    batch = mul_many(np.stack([a, b]), np.stack([c, c]), R)
    assert np.allclose(batch[1], mul(b, c, R))


@PROPS
@given(ring_and_classes(1, unit_part=True))
def test_inverse_and_log_exp(data):
    R, (a,) = data
    assert np.allclose(mul(a, inverse(a, R), R), unit(R), atol=1e-9)
    assert np.allclose(exp_class(log_class(a, R), R), a, rtol=1e-9, atol=1e-9)


@PROPS
@given(ring_and_classes(2))
def test_exp_is_a_homomorphism(data):
    R, (a, b) = data
    a, b = a / 4, b / 4
    lhs = exp_class(a + b, R)
    rhs = mul(exp_class(a, R), exp_class(b, R), R)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


@PROPS
@given(ring_and_classes(1), st.floats(0.1, 50))
def test_power_t_splits(data, t):
    R, (a,) = data
    a = a / 3
    assert np.allclose(power_t(a + unit(R), t, R), t * power_t(a, t, R), rtol=1e-10, atol=1e-12)


@PROPS
@given(ring_and_classes(1), st.integers(-3000, 3000))
def test_scaled_class_round_trip(data, e):
    R, (a,) = data
    if not np.any(a):
        return
    sc = ScaledClass.normalize(a, e)
    peak = np.abs(sc.mantissa).max()
    assert 0.5 <= peak < 1.0
    back = ScaledClass.normalize(sc.mantissa, sc.exp2)
    assert back.exp2 == sc.exp2 and np.array_equal(back.mantissa, sc.mantissa)
    assert math.isclose(sc.log_abs_max(), math.log(np.abs(a).max()) + e * math.log(2), rel_tol=1e-12, abs_tol=1e-9)


def test_scaled_arithmetic_beyond_float_range():
    R = projective_ring(1)
    d = basis_vector(R, 1)
    big = scaled_from_log(2000.0, unit(R) + d)  # e^2000 overflows a float
    tiny = scaled_from_log(-2000.0, unit(R))
    prod = scaled_mul(big, tiny, R)
    assert np.allclose(prod.to_class(), unit(R) + d)
    s = scaled_sum([big, big])
    assert math.isclose(s.log_abs_max(), 2000 + math.log(2), rel_tol=1e-14)
    zero = ScaledClass(np.zeros(2, complex), 0)
    assert scaled_sum([zero, zero]).is_zero()
    assert class_norm(scaled_sum([zero, tiny]).to_class()) == 0.0  # underflows on denormalising only
