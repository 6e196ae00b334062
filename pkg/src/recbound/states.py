"""Density matrices, entropies (in bits), the relative entropy of coherence,
Werner states, random states and measurement records."""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from recbound.linalg import hermitian, matrix_fn, pauli, spectral_norm, trace_product

PSD_TOL = 1e-10
TRACE_TOL = 1e-10
EIG_FLOOR = 1e-12
PROB_SUM_TOL = 1e-9


class InvalidStateError(ValueError):
    pass


class InvalidRecordError(ValueError):
    pass


class InfiniteDivergenceError(ArithmeticError):
    pass


def density(rho) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it symmetrized."""
    rho = hermitian(rho)
    w = np.linalg.eigvalsh(rho)
    if w[0] < -PSD_TOL:
        raise InvalidStateError(f"negative eigenvalue {w[0]:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1) > TRACE_TOL:
        raise InvalidStateError(f"trace {tr!r} differs from 1")
    return rho


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


PSI_MINUS = projector((ket("01") - ket("10")) / np.sqrt(2))
PSI_PLUS = projector((ket("01") + ket("10")) / np.sqrt(2))
RHO_HH = projector(ket("00"))
RHO_VV = projector(ket("11"))


def dephase(rho) -> np.ndarray:
    return np.diag(np.diag(np.asarray(rho))).astype(complex)


def _xlogx(w) -> float:
    w = w[w > EIG_FLOOR]
    return float(np.sum(w * np.log2(w)))


def entropy(rho) -> float:
    """von Neumann entropy in bits."""
    return -_xlogx(np.linalg.eigvalsh(hermitian(rho)))


def rel_entropy(rho, sigma) -> float:
    """Quantum relative entropy ``S(rho || sigma)`` in bits.

    Raises :class:`InfiniteDivergenceError` when ``rho`` has weight on an
    eigendirection of ``sigma`` whose eigenvalue is below the floor.
    """
    rho = hermitian(rho)
    s, v = np.linalg.eigh(hermitian(sigma))
    # diagonal of rho in sigma's eigenbasis
    weights = np.einsum("ij,jk,ki->i", v.conj().T, rho, v).real
    null = s <= EIG_FLOOR
    if np.any(null & (weights > PSD_TOL)):
        j = int(np.flatnonzero(null & (weights > PSD_TOL))[0])
        raise InfiniteDivergenceError(
            f"support violation along sigma eigendirection {j} "
            f"(sigma eigenvalue {s[j]:.3e}, rho weight {weights[j]:.3e})"
        )
    cross = float(np.sum(weights[~null] * np.log2(s[~null])))
    return _xlogx(np.linalg.eigvalsh(rho)) - cross


def rec(rho) -> float:
    """Relative entropy of coherence in the computational basis, in bits."""
    return rel_entropy(rho, dephase(rho))


def rec_entropy_difference(rho) -> float:
    """The same quantity evaluated as ``S(rho_diag) - S(rho)``."""
    p = np.diag(np.asarray(rho)).real
    return -_xlogx(p) - entropy(rho)


def werner(p: float) -> np.ndarray:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner parameter must lie in [0, 1], got {p!r}")
    return p * PSI_MINUS + (1 - p) * np.eye(4, dtype=complex) / 4


def werner_rec_closed_form(p: float) -> float:
    def h(x):
        return 0.0 if x <= 0 else -x * np.log2(x)

    a, b, c = (1 - p) / 4, (1 + p) / 4, (1 + 3 * p) / 4
    diag_entropy = 2 * h(a) + 2 * h(b)
    state_entropy = h(c) + 3 * h(a)
    return float(diag_entropy - state_entropy)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    # eigenvalues below the floor are rounding noise; their square roots are not
    r = matrix_fn(rho, lambda w: np.sqrt(np.where(w > EIG_FLOOR, w, 0.0)))
    inner = np.linalg.eigvalsh(hermitian(r @ np.asarray(sigma) @ r, tol=1e-9))
    f = float(np.sum(np.sqrt(np.where(inner > EIG_FLOOR, inner, 0.0))) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(rho, sigma) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitian(np.asarray(rho) - sigma)))))


def purity(rho) -> float:
    return trace_product(rho, rho)


def random_density(d: int, rank: Optional[int] = None, seed=None) -> np.ndarray:
    """Random state ``G G^H / tr(G G^H)`` with ``G`` a ``d x rank`` complex Ginibre matrix.

    ``seed`` may be anything accepted by :func:`numpy.random.default_rng`,
    including a ``Generator`` (which is then advanced).
    """
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    w = g @ g.conj().T
    return 0.5 * (w + w.conj().T) / np.trace(w).real


@dataclass(frozen=True)
class MeasurementRecord:
    """Computational-basis probabilities plus expectation values of extra observables."""

    basis_probs: np.ndarray
    observables: tuple = ()
    expectations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    labels: Optional[tuple] = None

    def __post_init__(self):
        p = np.asarray(self.basis_probs, dtype=float)
        d = p.size
        if d < 1 or p.ndim != 1:
            raise InvalidRecordError("basis_probs must be a non-empty vector")
        if np.any(p < 0) or abs(p.sum() - 1) > PROB_SUM_TOL:
            raise InvalidRecordError(f"basis_probs must be a probability vector (sum={p.sum()!r})")
        obs = []
        for j, o in enumerate(self.observables):
            try:
                o = hermitian(o)
            except ValueError as exc:
                raise InvalidRecordError(f"observables[{j}]: {exc}") from None
            if o.shape != (d, d):
                raise InvalidRecordError(f"observables[{j}] has shape {o.shape}, expected {(d, d)}")
            obs.append(o)
        q = np.asarray(self.expectations, dtype=float).reshape(-1)
        if q.size != len(obs):
            raise InvalidRecordError(f"{len(obs)} observables but {q.size} expectations")
        for j, (o, qj) in enumerate(zip(obs, q)):
            bound = spectral_norm(o)
            if abs(qj) > bound + PROB_SUM_TOL:
                raise InvalidRecordError(
                    f"expectations[{j}] = {qj!r} exceeds the spectral norm {bound!r} of its observable"
                )
        if self.labels is not None and len(self.labels) != len(obs):
            raise InvalidRecordError("labels must match observables")
        object.__setattr__(self, "basis_probs", p)
        object.__setattr__(self, "observables", tuple(obs))
        object.__setattr__(self, "expectations", q)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.basis_probs.size


def record_from_state(rho, observables: Sequence = (), labels: Optional[Sequence[str]] = None) -> MeasurementRecord:
    """Exact data of ``rho``: its diagonal and ``tr(rho O)`` for each observable.

    Observables may be given as Pauli labels (e.g. ``"XX"``) or matrices.
    """
    rho = np.asarray(rho, dtype=complex)
    mats = []
    names = []
    for o in observables:
        if isinstance(o, str):
            names.append(o.upper())
            mats.append(pauli(o))
        else:
            names.append(None)
            mats.append(np.asarray(o, dtype=complex))
    if labels is None and all(n is not None for n in names):
        labels = names
    q = np.array([trace_product(rho, o) for o in mats])
    p = np.clip(np.diag(rho).real, 0.0, None)
    return MeasurementRecord(p / p.sum(), tuple(mats), q, None if labels is None else tuple(labels))
