from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amlj.aml import AmlScaling, fit_scaling
from amlj.errors import TruncationError, ValidationError
from amlj.evaluator import (
    continuous_check,
    default_t_grid,
    eval_series,
    ml_eval,
    rl_integral,
    rl_property_check,
)
from amlj.gamma import reciprocal_gamma
from amlj.ring import basis_vector, class_norm, exp_class, mul, power_t, projective_ring, unit
from amlj.streams import projective_stream, synthetic_ml_stream

# e^{-2} * sum_{m<30} 1/(m!)^2, mpmath at 40 digits
P1_AT_ONE = 0.3085083225536710395333843192665615400863


@pytest.fixture(scope="module")
def p3():
    s = projective_stream(3, 1000)
    return s, fit_scaling(s, window=(500, 1000))


def test_p1_series_at_one():
    s = projective_stream(1, 60)
    v = eval_series(s, 1.0, 0.0, M=30, T=2.0).to_class()
    assert abs(v[0] - P1_AT_ONE) <= 1e-15


def test_small_t_keeps_leading_term():
    s = projective_stream(2, 20)
    t = 1e-3
    v = eval_series(s, t, 0.0, T=3.0).to_class()
    lead = math.exp(-3 * t) * power_t(s.beta, t, s.ring)
    # the next term is smaller by a factor of order t^r
    assert class_norm(v - lead) <= 10 * t**3 * class_norm(lead)


def test_p3_at_fifty_near_limit(p3):
    s, sc = p3
    v = eval_series(s, 50.0, 0.0, T=sc.T).to_class()
    corr = exp_class(-1j * sc.theta * s.beta, s.ring)
    assert class_norm(s.r * mul(corr, v, s.ring) - sc.A) <= 5e-2 * class_norm(sc.A)


def test_truncation_is_checked():
    s = projective_stream(3, 20)
    with pytest.raises(TruncationError, match="need about M"):
        eval_series(s, 40.0, 0.0, T=4.0)


def test_truncation_stable(p3):
    s, sc = p3
    a = eval_series(s, 60.0, 0.0, M=250, T=sc.T).to_class()
    b = eval_series(s, 60.0, 0.0, M=500, T=sc.T).to_class()
    assert class_norm(a - b) <= 1e-10 * class_norm(b)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, math.pi), st.floats(1.0, 60.0))
def test_conjugate_rays(phi, t):
    s = projective_stream(3, 400)
    a = eval_series(s, t, phi, T=4.0).to_class()
    b = eval_series(s, t, -phi, T=4.0).to_class()
    assert np.max(np.abs(a - np.conj(b))) <= 1e-12 * max(class_norm(a), 1e-300)


def test_continuous_check_p3(p3):
    s, sc = p3
    rep = continuous_check(s, sc, [0.0, math.pi / 4], [100.0])
    aligned, off = rep.rows
    assert aligned["deviation"] <= 2e-2 and aligned["decay_ratio"] is None
    assert off["decay_ratio"] <= 1e-2 and off["deviation"] is None
    lines = rep.to_csv().splitlines()
    assert lines[0] == "phi,t,deviation,decay_ratio"
    assert len(lines) == 3


def test_continuous_check_second_ray_p1():
    s = projective_stream(1, 1000)
    sc = fit_scaling(s, window=(500, 1000))
    (row,) = continuous_check(s, sc, [math.pi], [60.0]).rows
    assert row["deviation"] <= 5e-2


def test_default_grid_is_capped():
    assert default_t_grid(4.0, 4, 1000) == [10.0, 20.0, 40.0, 80.0]
    assert default_t_grid(4.0, 4, 50) == [10.0, 20.0, 40.0]


def test_ml_identities():
    assert abs(ml_eval(1, 1, 1) - math.e) <= 1e-15
    assert abs(ml_eval(2, 1, 1) - math.cosh(1)) <= 1e-15
    z = 0.7 - 1.3j
    assert abs(ml_eval(1, 1, z) - cmath.exp(z)) <= 1e-14
    assert abs(ml_eval(2, 1, z * z) - cmath.cosh(z)) <= 1e-14
    with pytest.raises(ValidationError):
        ml_eval(0, 1, 1)


def test_ml_asymptotics():
    t, a, b = 40.0, 3.0, 0.5
    val = t**b * ml_eval(a, 1 + b, t**a) * a * math.exp(-t)
    assert abs(val - 1) <= 1e-2


def test_ml_matches_synthetic_stream():
    R = projective_ring(2)
    T, theta, r = 2.0, 0.3, 3
    A = 0.8 * unit(R) + basis_vector(R, 1)
    s = synthetic_ml_stream(R, r, R.beta_default(), T, theta, A, 200)
    b0 = R.beta_default()[0].real
    for t in (2.0, 10.0):
        v = eval_series(s, t, 0.0, T=T).to_class()
        w = T * cmath.exp(1j * theta) * t
        want = cmath.exp(b0 * cmath.log(w)) * ml_eval(r, 1 + b0, w**r) * A[0] * math.exp(-T * t)
        assert abs(v[0] - want) <= 1e-9 * abs(want)


def test_rl_examples():
    R = projective_ring(1)
    one = lambda x: np.ones_like(x)
    assert abs(rl_integral(one, unit(R), 2.0, R)[0] - 2) <= 1e-13
    assert abs(rl_integral(one, 0.5 * unit(R), 1.0, R)[0] - 2 / math.sqrt(math.pi)) <= 1e-12
    a = unit(R) + basis_vector(R, 1)
    want = reciprocal_gamma(a + unit(R), R)
    assert class_norm(rl_integral(one, a, 1.0, R) - want) <= 1e-12
    with pytest.raises(ValidationError):
        rl_integral(one, -0.5 * unit(R), 1.0, R)


def test_rl_exponential_order_one():
    R = projective_ring(1)
    for t in (0.5, 3.0):
        v = rl_integral(np.exp, unit(R), t, R)
        assert abs(v[0] - (math.exp(t) - 1)) <= 1e-12 * math.exp(t)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-1, 1), st.floats(0.1, 5.0))
def test_rl_power_rule(a, c, t):
    R = projective_ring(1)
    alpha = a * unit(R) + c * basis_vector(R, 1)
    v = rl_integral(lambda x: np.ones_like(x), alpha, t, R)
    want = mul(power_t(alpha, t, R), reciprocal_gamma(alpha + unit(R), R), R)
    assert class_norm(v - want) <= 1e-8 * class_norm(want)


def test_rl_property_examples():
    R = projective_ring(1)
    half = 0.5 * unit(R)
    rep = rl_property_check(half, half, 1.0, [5.0, 10.0, 20.0], R)
    assert rep["semigroup"]["1"] <= 1e-8
    rep = rl_property_check(unit(R) + basis_vector(R, 1), half, 2.0, [5.0, 10.0, 20.0], R)
    assert rep["decreasing"] and rep["identity_residual"] <= 1e-10
    rep = rl_property_check(half, half, -1.0, [5.0, 10.0, 20.0], R)
    assert rep["polynomial_bound"]
    with pytest.raises(ValidationError):
        rl_property_check(-half, half, 1.0, [5.0], R)
