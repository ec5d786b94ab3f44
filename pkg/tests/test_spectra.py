from __future__ import annotations

import math

import numpy as np
import pytest

from amlj import spectra
from amlj.errors import NumericQualityError, ValidationError
from amlj.spectra import (
    c0_correction,
    hypersurface_T,
    pn_spectrum,
    product_T,
    x3_quantum_matrices,
    x3_spectrum,
)
from amlj.streams import projective_stream


@pytest.mark.parametrize("N", [1, 2, 3, 7])
def test_projective_spectrum(N):
    rep = pn_spectrum(N)
    assert rep.spectral_radius == N + 1
    assert rep.rightmost == complex(N + 1, 0)
    assert rep.theta_candidates[0] == 0.0
    for z in rep.eigenvalues:
        assert abs(z ** (N + 1) - (N + 1) ** (N + 1)) <= 1e-12 * (N + 1) ** (N + 1)


def test_closed_forms():
    assert hypersurface_T(4, 4, 2, 0) == 4.0
    assert hypersurface_T(4, 4, 3, 6) == 21.0
    assert math.isclose(hypersurface_T(5, 5, 3, 0), 2 * math.sqrt(27), rel_tol=1e-15)
    assert product_T(2, 3) == 5
    with pytest.raises(ValidationError):
        hypersurface_T(4, 4, 4, 0)


def test_c0_correction():
    s = projective_stream(3, 2)
    assert c0_correction(s, 3) == 6.0
    assert c0_correction(s, 2) == 0.0


def test_x3_matrices_and_spectrum():
    X1, X2 = x3_quantum_matrices()
    C = X1 + 2 * X2
    assert np.trace(C) == -27
    rep = x3_spectrum()
    # frozen from the eigen-solver and cross-checked by the characteristic polynomial
    assert abs(rep.spectral_radius - 26.987658080712844) < 1e-11
    char = np.poly(C)
    assert abs(np.polyval(char, -rep.spectral_radius)) < 1e-6 * abs(np.polyval(char, 0.0)) + 1e-3
    assert rep.theta_candidates == (round(math.pi, 12),)


def test_x3_spectrum_aborts_on_mismatch(monkeypatch):
    monkeypatch.setattr(spectra, "X3_EXPECTED_RADIUS", 30.0)
    with pytest.raises(NumericQualityError):
        spectra.x3_spectrum()


def test_x3_bad_presentation_is_detected(monkeypatch):
    def broken(poly):
        return {k: v for k, v in poly.items() if k[0] < 4 and k[1] < 2}

    monkeypatch.setattr(spectra, "_x3_reduce", broken)
    with pytest.raises(NumericQualityError):
        spectra.x3_quantum_matrices()
