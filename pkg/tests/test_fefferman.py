import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crchains.exceptions import ParameterError
from crchains.fefferman import (
    hamiltonian,
    inverse_metric_matrix,
    metric_from_forms,
    metric_matrix,
    sigma_coefficient,
)

moduli = st.floats(1e-2, 10.0)


def test_metric_entries():
    g = metric_matrix(1.0)
    assert (g[0, 0], g[1, 1], g[2, 2], g[2, 3], g[3, 3]) == (1.0, 1.0, 1.0, -2 / 3, 0.0)
    g = metric_matrix(2.0)
    assert (g[0, 0], g[1, 1], g[2, 2], g[2, 3]) == (0.5, 2.0, 1.25, -2 / 3)
    assert np.count_nonzero(g) == 5


def test_inverse_entries():
    assert inverse_metric_matrix(1.0)[3, 3] == -9 / 4
    assert inverse_metric_matrix(3.0)[3, 3] == pytest.approx(-15 / 4, abs=1e-15)
    h = inverse_metric_matrix(2.0)
    assert (h[0, 0], h[1, 1], h[2, 2], h[2, 3]) == (2.0, 0.5, 0.0, -1.5)


def test_inverse_on_random_moduli(rng):
    for a in rng.uniform(1e-3, 10, 100):
        assert np.max(np.abs(metric_matrix(a) @ inverse_metric_matrix(a) - np.eye(4))) < 1e-14


@pytest.mark.parametrize("a", [0.5, 1.0, math.sqrt(3), 4.0])
def test_lorentzian_signature(a):
    ev = np.linalg.eigvalsh(metric_matrix(a))
    assert np.sum(ev > 0) == 3 and np.sum(ev < 0) == 1


@given(moduli)
def test_metric_from_one_forms(a):
    assert np.max(np.abs(metric_from_forms(a) - metric_matrix(a))) < 1e-14


def test_sigma_coefficient():
    assert sigma_coefficient(1.0) == 0.25
    assert sigma_coefficient(2.0) == 5 / 16


def test_hamiltonian_values():
    assert hamiltonian(1.0, (1, 0, -5 / 12, 1)) == pytest.approx(0, abs=1e-15)
    assert hamiltonian(2.0, (1, 1, 1, 1)) == pytest.approx(-1.65625, abs=1e-15)
    for a in (0.3, 1.0, 7.0):
        assert hamiltonian(a, (0, 0, 3.3, 0)) == 0.0


def test_hamiltonian_is_inverse_metric_quadratic_form(rng):
    for _ in range(50):
        a = rng.uniform(0.05, 10)
        s = rng.normal(size=4)
        assert math.isclose(hamiltonian(a, s), 0.5 * s @ inverse_metric_matrix(a) @ s, rel_tol=1e-13, abs_tol=1e-14)


@given(moduli, st.floats(-4, 4).filter(lambda x: abs(x) > 1e-3))
def test_hamiltonian_homogeneous_of_degree_two(a, lam):
    s = np.array([0.4, -1.1, 0.9, 1.3])
    assert math.isclose(hamiltonian(a, lam * s), lam * lam * hamiltonian(a, s), rel_tol=1e-13)


def test_hamiltonian_broadcasts():
    s = np.array([[1, 0, -5 / 12, 1], [1, 1, 1, 1]], dtype=float)
    out = hamiltonian(1.0, s)
    assert out.shape == (2,)


def test_bad_modulus():
    with pytest.raises(ParameterError):
        metric_matrix(0.0)
    with pytest.raises(ParameterError):
        inverse_metric_matrix(-1.0)
