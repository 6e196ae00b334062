import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_hermitian
from recbound.linalg import (
    MatrixDomainError, NotHermitianError, eigh, exp2m, hermitian, log2m, matrix_fn, pauli, tensor, trace_product,
)
from recbound.states import PSI_MINUS

X, Z, I2 = pauli("X"), pauli("Z"), np.eye(2)


def test_eigh_pauli_x():
    assert np.allclose(eigh(X).eigenvalues, [-1, 1])


def test_eigh_identity():
    assert np.allclose(eigh(np.eye(4)).eigenvalues, 1)


def test_eigh_diagonal():
    s = eigh(np.diag([0.2, 0.8]))
    assert np.allclose(s.eigenvalues, [0.2, 0.8])
    assert np.allclose(np.abs(s.eigenvectors), np.eye(2))


def test_eigh_rejects_nonhermitian():
    with pytest.raises(NotHermitianError, match="max"):
        eigh(np.array([[0, 1], [0, 0]]))


def test_hermitian_symmetrizes_float_noise():
    a = np.array([[1, 1e-14], [0, 1]], dtype=complex)
    h = hermitian(a)
    assert np.array_equal(h, h.conj().T)


@given(st.integers(0, 2**32 - 1), st.integers(1, 16))
def test_eigh_reconstruction(seed, d):
    h = random_hermitian(d, np.random.default_rng(seed))
    s = eigh(h)
    assert np.all(np.diff(s.eigenvalues) >= 0)
    assert np.linalg.norm(s.reconstruct() - h) <= 1e-10
    v = s.eigenvectors
    assert np.linalg.norm(v.conj().T @ v - np.eye(d)) <= 1e-10


def test_exp2_of_zero_is_identity():
    assert np.allclose(exp2m(np.zeros((3, 3))), np.eye(3), atol=1e-15)


def test_log2_of_half_identity():
    assert np.allclose(log2m(np.eye(2) / 2), -np.eye(2), atol=1e-15)


def test_exp2_log2_inverse():
    d = np.diag([0.3, 0.7])
    assert np.abs(exp2m(log2m(d)) - d).max() <= 1e-12


def test_log2_domain_error_names_eigenvalue():
    with pytest.raises(MatrixDomainError, match="-1"):
        log2m(np.diag([1.0, -1.0]))


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_matrix_fn_identity_function(seed, d):
    h = random_hermitian(d, np.random.default_rng(seed))
    assert np.abs(matrix_fn(h, lambda w: w) - h).max() <= 1e-12


def test_tensor_zz():
    assert np.allclose(tensor(Z, Z), np.diag([1, -1, -1, 1]))


def test_tensor_identities():
    assert np.array_equal(tensor(I2, I2), np.eye(4))


def test_xx_flips_01_to_10():
    v01 = np.zeros(4)
    v01[1] = 1
    assert np.allclose(pauli("XX") @ v01, np.eye(4)[2])


def test_pauli_string_fold_associativity():
    x, y, z = pauli("X"), pauli("Y"), pauli("Z")
    assert np.array_equal(np.kron(np.kron(x, y), z), np.kron(x, np.kron(y, z)))
    assert np.array_equal(pauli("XYZ"), np.kron(np.kron(x, y), z))


@pytest.mark.parametrize("label", ["X", "YZ", "XYZ", "IZXY"])
def test_pauli_hermitian_involutory(label):
    p = pauli(label)
    assert p.shape == (2 ** len(label),) * 2
    assert np.allclose(p, p.conj().T)
    assert np.allclose(p @ p, np.eye(p.shape[0]))


def test_pauli_rejects_bad_label():
    with pytest.raises(ValueError):
        pauli("XQ")


def test_trace_product_normalized_identity():
    assert trace_product(np.eye(4), np.eye(4) / 4) == pytest.approx(1.0)


@pytest.mark.parametrize("label", ["ZZ", "XX"])
def test_trace_product_singlet(label):
    # <psi-|P|psi-> from the state vector directly
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    expected = np.vdot(psi, pauli(label) @ psi).real
    assert expected == pytest.approx(-1.0)
    assert trace_product(PSI_MINUS, pauli(label)) == pytest.approx(expected, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_trace_product_symmetric(seed, d):
    rng = np.random.default_rng(seed)
    a, b = random_hermitian(d, rng), random_hermitian(d, rng)
    assert abs(trace_product(a, b) - trace_product(b, a)) <= 1e-12


def test_trace_product_flags_imaginary_residue():
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    b = np.array([[0, 0], [1j, 0]])
    with pytest.raises(ArithmeticError):
        trace_product(a, b)
