import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crchains.cr_structure import (
    ContactVector,
    apply_J,
    complex_parallel_residual,
    dtheta,
    holomorphic_frame,
    levi_form,
    rossi_frame,
    rossi_mu,
    rotate_quarter_turn,
)
from crchains.exceptions import ParameterError

moduli = st.floats(1e-2, 10.0)
coef = st.floats(-10, 10, allow_nan=False).filter(lambda x: x == 0 or abs(x) > 1e-6)
vectors = st.builds(ContactVector, coef, coef)
e1, e2 = ContactVector(1.0, 0.0), ContactVector(0.0, 1.0)


def test_levi_form_values():
    assert levi_form(1, e1, e1) == 1.0
    assert levi_form(2, e2, e2) == 2.0
    assert levi_form(0.7, e1, e2) == 0.0


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_modulus_validation(bad):
    with pytest.raises(ParameterError):
        levi_form(bad, e1, e1)
    with pytest.raises(ParameterError):
        apply_J(bad, e1)


@given(moduli, vectors)
def test_levi_form_positive_definite(a, v):
    if v == (0.0, 0.0):
        return
    assert levi_form(a, v, v) > 0


@given(moduli, vectors)
def test_J_squares_to_minus_identity(a, v):
    assert np.allclose(apply_J(a, apply_J(a, v)), [-v[0], -v[1]], rtol=1e-12, atol=1e-12)


def test_J_on_basis():
    assert apply_J(1, e1) == pytest.approx(e2)
    a = 2.5
    assert apply_J(a, e1) == pytest.approx((0, 1 / a))
    # the corrected companion formula: J e2 = -a e1
    assert apply_J(a, e2) == pytest.approx((-a, 0))


@given(moduli, vectors, vectors)
def test_levi_form_is_dtheta_of_J(a, v, w):
    assert math.isclose(levi_form(a, v, w), dtheta(v, apply_J(a, w)), rel_tol=1e-12, abs_tol=1e-9)


@given(moduli, vectors, vectors)
def test_a_inverse_a_symmetry(a, v, w):
    swapped = levi_form(1 / a, ContactVector(v[1], v[0]), ContactVector(w[1], w[0]))
    assert math.isclose(swapped, levi_form(a, v, w), rel_tol=1e-12, abs_tol=1e-9)


@given(moduli)
def test_holomorphic_frame_is_i_eigenvector(a):
    Z = holomorphic_frame(a)
    JZ = np.array(apply_J(a, ContactVector(Z[0].real, Z[1].real))) + 1j * np.array(
        apply_J(a, ContactVector(Z[0].imag, Z[1].imag))
    )
    assert np.allclose(JZ, 1j * Z)
    assert np.allclose(holomorphic_frame(1.0), [1, -1j])
    # J(Re Z) = -Im Z
    assert np.allclose(apply_J(a, ContactVector(1, 0)), -np.array([0, Z[1].imag]))


def test_rossi_mu_values():
    assert rossi_mu(0) == 0
    assert rossi_mu(1) == pytest.approx(1 / 3)
    with pytest.raises(ParameterError):
        rossi_mu(-2)
    with pytest.raises(ParameterError):
        rossi_mu(-3)


def _rossi_matches(eps):
    """Frame of which modulus spans the same line as Z - mu(eps) Zbar."""
    R = rossi_frame(rossi_mu(eps))
    return {
        "direct": complex_parallel_residual(holomorphic_frame(1 + eps), R),
        "inverse": complex_parallel_residual(holomorphic_frame(1 / (1 + eps)), R),
        "rotated": complex_parallel_residual(rotate_quarter_turn(holomorphic_frame(1 + eps)), R),
    }


@pytest.mark.parametrize("eps", [0.5, 0.1, 2.0, -0.4])
def test_rossi_correspondence(eps):
    r = _rossi_matches(eps)
    # Z - mu Zbar is the holomorphic frame of the modulus 1/(1+eps) ...
    assert r["inverse"] < 1e-12
    # ... which the quarter turn identifies with the modulus 1+eps
    assert r["rotated"] < 1e-12
    # the unrotated frame of 1+eps is a different line
    assert r["direct"] > 1e-2
