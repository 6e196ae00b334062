"""Dense Hermitian linear algebra and spectral matrix functions.

Operators are plain complex ``numpy`` arrays. :func:`hermitian` is the gate
that every externally supplied matrix passes through: tiny asymmetries are
symmetrized away, larger ones are rejected.
"""
from functools import reduce
from typing import Callable, NamedTuple

import numpy as np

SYMMETRIZE_TOL = 1e-12
IMAG_RESIDUE_TOL = 1e-9

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class NotHermitianError(ValueError):
    pass


class MatrixDomainError(ValueError):
    pass


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian(a, tol: float = SYMMETRIZE_TOL) -> np.ndarray:
    """Return ``(a + a^H)/2`` as a complex array, or raise if ``a`` is not Hermitian.

    The asymmetry is measured as the largest entry of ``|a - a^H|``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotHermitianError(f"expected a non-empty square matrix, got shape {a.shape}")
    asym = np.max(np.abs(a - a.conj().T))
    if asym > tol:
        raise NotHermitianError(f"matrix is not Hermitian: max |A - A^H| = {asym:.3e}")
    return 0.5 * (a + a.conj().T)


def eigh(h) -> Spectrum:
    h = hermitian(h)
    w, v = np.linalg.eigh(h)
    return Spectrum(w, v)


def matrix_fn(h, g: Callable[[np.ndarray], np.ndarray], *, checked: bool = True) -> np.ndarray:
    """Apply the scalar function ``g`` to ``h`` through its eigendecomposition.

    ``g`` receives the whole eigenvalue vector. A non-finite value of ``g`` at
    any eigenvalue raises :class:`MatrixDomainError`.
    """
    if checked:
        h = hermitian(h)
    w, v = np.linalg.eigh(h)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        gw = np.asarray(g(w), dtype=float)
    bad = ~np.isfinite(gw)
    if bad.any():
        raise MatrixDomainError(f"function undefined at eigenvalue {w[bad][0]!r}")
    return (v * gw) @ v.conj().T


def exp2m(h) -> np.ndarray:
    return matrix_fn(h, np.exp2)


def log2m(h) -> np.ndarray:
    def _log2(w):
        out = np.full_like(w, np.nan)
        pos = w > 0
        out[pos] = np.log2(w[pos])
        return out

    return matrix_fn(h, _log2)


def sqrtm_psd(h) -> np.ndarray:
    """Square root of a positive semidefinite matrix; tiny negative eigenvalues are clipped."""
    return matrix_fn(h, lambda w: np.sqrt(np.clip(w, 0.0, None)))


def tensor(*ops) -> np.ndarray:
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def pauli(label: str) -> np.ndarray:
    """Matrix of a Pauli string such as ``"XZ"``; qubit 0 is the leftmost factor."""
    label = label.upper()
    if not label or any(c not in _PAULI for c in label):
        raise ValueError(f"invalid Pauli label {label!r}")
    return tensor(*(_PAULI[c] for c in label))


def trace_product(a, b) -> float:
    """Real part of ``tr(a b)`` for Hermitian ``a`` and ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # tr(AB) = sum_ij A_ij B_ji
    t = np.sum(a * b.T)
    if abs(t.imag) > IMAG_RESIDUE_TOL:
        raise ArithmeticError(f"tr(AB) has imaginary residue {t.imag:.3e}; inputs not Hermitian?")
    return float(t.real)


def spectral_norm(h) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(hermitian(h)))))
