import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crchains.exceptions import ParameterError
from crchains.lie_group import (
    E1,
    E2,
    E3,
    AlgebraElement,
    GroupElement,
    ReducedState,
    bracket,
    coadjoint,
    exp_group,
    hopf_project,
    minimal_rotation,
    quat_distance,
    quat_mul,
    rotate,
    rotation_matrix,
    su2_exp,
)

from conftest import random_unit_quaternions

finite = st.floats(-5, 5, allow_nan=False)
vec3 = st.tuples(finite, finite, finite)


def _pure(v):
    return np.r_[0.0, np.asarray(v) / 2.0]


def test_structure_constants():
    assert bracket(E1, E2) == E3
    assert bracket(E2, E3) == E1
    assert bracket(E3, E1) == E2


@given(vec3, st.floats(-3, 3))
def test_bracket_antisymmetric_and_fibre_central(v, p):
    xi = AlgebraElement(*v, p)
    assert np.allclose(bracket(xi, xi), 0.0)
    assert bracket(xi, AlgebraElement(0, 0, 0, 1.0)) == AlgebraElement()


def test_jacobi_identity(rng):
    for _ in range(100):
        x, y, z = (AlgebraElement(*rng.normal(size=3)) for _ in range(3))
        total = (
            np.array(bracket(x, bracket(y, z)))
            + np.array(bracket(y, bracket(z, x)))
            + np.array(bracket(z, bracket(x, y)))
        )
        assert np.max(np.abs(total)) < 1e-12


def test_bracket_is_quaternion_commutator(rng):
    # e_i is half the imaginary unit q_i
    for _ in range(20):
        x, y = rng.normal(size=(2, 3))
        comm = quat_mul(_pure(x), _pure(y)) - quat_mul(_pure(y), _pure(x))
        expected = _pure(bracket(AlgebraElement(*x), AlgebraElement(*y))[:3])
        assert np.allclose(comm, expected, atol=1e-12)


def test_exp_of_zero_is_identity():
    g = exp_group(AlgebraElement(), 1.7)
    assert np.allclose(g.q, [1, 0, 0, 0])


def test_e3_subgroup_has_period_four_pi():
    assert np.allclose(exp_group(E3, 2 * math.pi).q, [-1, 0, 0, 0], atol=1e-15)
    assert np.allclose(exp_group(E3, 4 * math.pi).q, [1, 0, 0, 0], atol=1e-15)
    assert np.allclose(exp_group(E3, 0.3).q, [math.cos(0.15), 0, 0, math.sin(0.15)])


def test_exp_matches_matrix_exponential(rng):
    from scipy.linalg import expm

    # su(2) as 2x2 matrices: q_1 = i sigma_3?  use the quaternion -> matrix map w + x i + y j + z k
    def as_matrix(q):
        w, x, y, z = q
        return np.array([[w + 1j * x, y + 1j * z], [-y + 1j * z, w - 1j * x]])

    for _ in range(10):
        v = rng.normal(size=3)
        A = as_matrix(_pure(v))
        assert np.allclose(expm(A), as_matrix(su2_exp(v)), atol=1e-12)


def test_exp_one_parameter_property(rng):
    for _ in range(100):
        xi = AlgebraElement(*rng.normal(size=3), rng.normal())
        s, t = rng.uniform(-3, 3, 2)
        lhs = exp_group(xi, s + t)
        rhs = exp_group(xi, s) * exp_group(xi, t)
        assert quat_distance(lhs.q, rhs.q) < 1e-10
        assert math.isclose(lhs.gamma, rhs.gamma, abs_tol=1e-10) or math.isclose(
            abs(lhs.gamma - rhs.gamma), 2 * math.pi, abs_tol=1e-10
        )


def test_exp_stays_on_unit_sphere():
    v = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
    for t in np.linspace(-10, 10, 41):
        assert math.isclose(np.linalg.norm(su2_exp(t * v)), 1.0, abs_tol=1e-14)


def test_adjoint_of_exp_is_rotation_by_t(rng):
    # Ad_{exp(t e_i)} rotates by angle t about the i-th axis
    for t in rng.uniform(-6, 6, 10):
        R = rotation_matrix(su2_exp([0, 0, t]))
        expected = np.array([[math.cos(t), -math.sin(t), 0], [math.sin(t), math.cos(t), 0], [0, 0, 1]])
        assert np.allclose(R, expected, atol=1e-14)


def test_group_element_validation_and_inverse(rng):
    with pytest.raises(ParameterError):
        GroupElement(np.array([1.0, 1.0, 0, 0]))
    q = random_unit_quaternions(rng, 1)[0]
    g = GroupElement(q, 5.0)
    e = g * g.inverse()
    assert quat_distance(e.q, [1, 0, 0, 0]) < 1e-14
    assert e.gamma < 1e-12 or abs(e.gamma - 2 * math.pi) < 1e-12
    assert 0 <= GroupElement(q, -1.0).gamma < 2 * math.pi


def test_coadjoint_examples(rng):
    M = ReducedState(0.3, -1.2, 0.7, 1.0)
    assert coadjoint(GroupElement.identity(), M) == pytest.approx(M)
    half_turn = exp_group(E3, math.pi)
    assert coadjoint(half_turn, ReducedState(1, 0, 0, 2.0)) == pytest.approx((-1, 0, 0, 2.0), abs=1e-15)
    for q in random_unit_quaternions(rng, 20):
        out = coadjoint(q, M)
        assert math.isclose(np.linalg.norm(out[:3]), np.linalg.norm(M[:3]), rel_tol=1e-14)
        assert out[3] == M[3]


def test_coadjoint_is_group_action(rng):
    qs = random_unit_quaternions(rng, 40)
    for g, h in zip(qs[::2], qs[1::2]):
        M = ReducedState(*rng.normal(size=4))
        lhs = coadjoint(quat_mul(g, h), M)
        rhs = coadjoint(g, coadjoint(h, M))
        assert np.allclose(lhs, rhs, atol=1e-10)


def test_rotate_agrees_with_rotation_matrix(rng):
    for q in random_unit_quaternions(rng, 10):
        v = rng.normal(size=3)
        assert np.allclose(rotate(q, v), rotation_matrix(q) @ v, atol=1e-14)


def test_hopf_projection(rng):
    assert np.allclose(hopf_project([1, 0, 0, 0]), [0, 0, 1])
    qs = random_unit_quaternions(rng, 30)
    assert np.allclose(np.linalg.norm(hopf_project(qs), axis=1), 1.0)
    for q in qs[:10]:
        base = hopf_project(q)
        for t in np.linspace(0, 4 * math.pi, 9):
            assert np.allclose(hopf_project(quat_mul(q, su2_exp([0, 0, t]))), base, atol=1e-14)
    with pytest.raises(ParameterError):
        hopf_project([2.0, 0, 0, 0])


@given(vec3.filter(lambda v: np.linalg.norm(v) > 1e-3), vec3.filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_minimal_rotation_takes_u_to_n(u, n):
    u = np.asarray(u) / np.linalg.norm(u)
    n = np.asarray(n) / np.linalg.norm(n)
    if np.dot(u, n) < -1 + 1e-6:
        return
    q = minimal_rotation(u, n)
    assert np.allclose(rotate(q, u), n, atol=1e-9)
    # the rotation axis is orthogonal to both vectors
    assert abs(np.dot(q[1:], u)) < 1e-9 and abs(np.dot(q[1:], n)) < 1e-9
