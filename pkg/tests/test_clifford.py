import numpy as np
import pytest
from hypothesis import given

from spinform import clifford as cl
from conftest import spinors, vectors

E1, E2 = np.eye(2)
X1, X2, X3 = np.eye(3)


# --- fixed-representation oracles ---------------------------------------------------


def test_e1_on_first_basis_spinor():
    np.testing.assert_allclose(cl.mul2(E1, cl.spinor(1, 0)), [0, -1])


def test_e2_on_first_basis_spinor():
    np.testing.assert_allclose(cl.mul2(E2, cl.spinor(1, 0)), [0, -1j])


def test_zero_vector_acts_as_zero():
    np.testing.assert_array_equal(cl.mul2(np.zeros(2), cl.spinor(3 - 1j, 2j)), [0, 0])


def test_e3_on_first_basis_spinor():
    np.testing.assert_allclose(cl.mul3(X3, cl.spinor(1, 0)), [-1j, 0])


def test_three_dimensional_volume_acts_as_identity():
    phi = cl.spinor(1, 1j)
    out = -cl.mul3(X1, cl.mul3(X2, cl.mul3(X3, phi)))
    np.testing.assert_allclose(out, phi, atol=1e-15)
    np.testing.assert_allclose(cl.volume3(phi), phi, atol=1e-15)


def test_anticommutator_of_distinct_vectors_vanishes():
    phi = cl.spinor(0.3 + 2j, -1.5)
    out = cl.mul2(E1, cl.mul2(E2, phi)) + cl.mul2(E2, cl.mul2(E1, phi))
    np.testing.assert_allclose(out, 0, atol=1e-15)


def test_volume_form_on_first_basis_spinor():
    np.testing.assert_allclose(cl.volume2(cl.spinor(1, 0)), [-1j, 0])
    np.testing.assert_allclose(1j * cl.volume2(cl.spinor(1, 0)), [1, 0])


def test_volume_form_squares_to_minus_one():
    phi = cl.spinor(2 - 1j, 0.5j)
    np.testing.assert_allclose(cl.volume2(cl.volume2(phi)), -phi, atol=1e-15)


def test_conjugate_definition():
    np.testing.assert_array_equal(cl.conjugate(cl.spinor(1, 1j)), [1, -1j])


def test_volume_form_is_minus_i_conjugate():
    phi = cl.spinor(2, 3j)
    np.testing.assert_allclose(cl.volume2(phi), -1j * cl.conjugate(phi), atol=1e-15)


def test_inner_products():
    assert cl.inner(cl.spinor(1, 1j), cl.spinor(1, 1j)) == pytest.approx(2)
    assert cl.inner(cl.spinor(1, 0), cl.spinor(0, 1)) == 0
    assert cl.re_inner(cl.mul2(E1, cl.spinor(1, 2 + 1j)), cl.spinor(1, 2 + 1j)) == pytest.approx(0, abs=1e-15)


def test_inner_is_conjugate_linear_in_second_slot():
    phi, psi = cl.spinor(1 + 1j, 2), cl.spinor(0.5, -1j)
    assert cl.inner(phi, 1j * psi) == pytest.approx(-1j * cl.inner(phi, psi))
    assert cl.inner(1j * phi, psi) == pytest.approx(1j * cl.inner(phi, psi))


def test_reals_round_trip():
    phi = np.array([[1 + 2j, -3j], [0.5, 4 - 1j]])
    assert cl.to_reals(phi).shape == (2, 4)
    np.testing.assert_array_equal(cl.from_reals(cl.to_reals(phi)), phi)


def test_split_into_half_spinors():
    phi = cl.spinor(2 - 1j, 5j)
    plus, minus = cl.split(phi)
    np.testing.assert_array_equal(plus, [2 - 1j, 0])
    np.testing.assert_array_equal(minus, [0, 5j])
    np.testing.assert_array_equal(plus + minus, phi)
    np.testing.assert_array_equal(plus - minus, cl.conjugate(phi))


# --- matrix-level identities ----------------------------------------------------------


@pytest.mark.parametrize("basis", [cl.E2, cl.E3], ids=["dim2", "dim3"])
def test_clifford_relations(basis):
    for j, a in enumerate(basis):
        for k, b in enumerate(basis):
            np.testing.assert_allclose(a @ b + b @ a, -2 * (j == k) * cl.IDENTITY, atol=1e-15)
        np.testing.assert_allclose(a.conj().T, -a, atol=1e-15)


def test_surface_action_is_restriction_of_ambient_action():
    nu = cl.E3[2]
    for j in range(2):
        np.testing.assert_allclose(cl.E3[j] @ nu, cl.E2[j], atol=1e-15)


def test_ambient_frame_acting_through_surface_forms():
    # e1 acts as e2 and as -e1.omega; e2 as -e1; the normal as omega
    np.testing.assert_allclose(cl.E3[0], cl.E2[1], atol=1e-15)
    np.testing.assert_allclose(cl.E3[0], -cl.E2[0] @ cl.OMEGA, atol=1e-15)
    np.testing.assert_allclose(cl.E3[1], -cl.E2[0], atol=1e-15)
    np.testing.assert_allclose(cl.E3[2], cl.OMEGA, atol=1e-15)


def test_bivector_pairing_is_orthogonal():
    phi = cl.spinor(0.7 - 0.2j, 1.1 + 0.4j)
    n2 = cl.norm2(phi)
    images = [cl.act(b, phi) for b in cl.BIVECTORS3]
    for a, x in enumerate(images):
        for b, y in enumerate(images):
            assert cl.re_inner(x, y) == pytest.approx(n2 * (a == b), abs=1e-14)


# --- properties -------------------------------------------------------------------------


@given(spinors(), vectors())
def test_surface_action_is_skew(phi, X):
    assert abs(cl.re_inner(cl.mul2(X, phi), phi)) <= 1e-14 * (1 + np.sum(X**2) * cl.norm2(phi))


@given(spinors(), vectors(3))
def test_ambient_action_is_skew(psi, X):
    assert abs(cl.re_inner(cl.mul3(X, psi), psi)) <= 1e-14 * (1 + np.sum(X**2) * cl.norm2(psi))


@given(spinors(), vectors())
def test_vector_squares_to_minus_length(phi, X):
    out = cl.mul2(X, cl.mul2(X, phi))
    np.testing.assert_allclose(out, -np.sum(X**2) * phi, atol=1e-12 * (1 + np.abs(phi).max() * np.sum(X**2)))


@given(spinors())
def test_half_spinors_are_volume_eigenvectors(phi):
    plus, minus = cl.split(phi)
    np.testing.assert_allclose(1j * cl.volume2(plus), plus, atol=1e-14 * (1 + np.abs(phi).max()))
    np.testing.assert_allclose(1j * cl.volume2(minus), -minus, atol=1e-14 * (1 + np.abs(phi).max()))


@given(spinors(), spinors())
def test_conjugation_is_a_linear_isometric_involution(phi, psi):
    np.testing.assert_array_equal(cl.conjugate(cl.conjugate(phi)), phi)
    assert cl.norm2(cl.conjugate(phi)) == pytest.approx(cl.norm2(phi))
    np.testing.assert_allclose(cl.conjugate(1j * phi + psi), 1j * cl.conjugate(phi) + cl.conjugate(psi))


@given(spinors(), vectors())
def test_conjugation_anticommutes_with_vectors(phi, X):
    # bar(X.phi) = -X.bar(phi): vectors swap the half-spinor bundles
    lhs = cl.conjugate(cl.mul2(X, phi))
    rhs = -cl.mul2(X, cl.conjugate(phi))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_broadcasting_over_grids(rng):
    phi = rng.normal(size=(4, 5, 2)) + 1j * rng.normal(size=(4, 5, 2))
    X = rng.normal(size=(4, 5, 2))
    out = cl.mul2(X, phi)
    assert out.shape == (4, 5, 2)
    np.testing.assert_allclose(out[2, 3], cl.mul2(X[2, 3], phi[2, 3]))
