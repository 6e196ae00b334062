"""Model of the photonic Werner-state experiment.

State preparation is modelled at the level of the attenuator-weighted mixture
of Psi-, Psi+, |HH> and |VV>. Measurements rotate each photon with a
quarter-wave plate followed by a half-wave plate before a PBS, and
coincidence counts are Poisson distributed.
"""
import itertools
from dataclasses import dataclass

import numpy as np

from recbound.linalg import hermitian, pauli
from recbound.states import PSI_MINUS, PSI_PLUS, RHO_HH, RHO_VV, MeasurementRecord

PAULI_LABELS_2Q = ["".join(s) for s in itertools.product("IXYZ", repeat=2)]
TOMOGRAPHY_SETTINGS = ["".join(s) for s in itertools.product("XYZ", repeat=2)]

# outcome order HH, HV, VH, VV; H encodes the +1 eigenvector
_PARITY = np.array([1, -1, -1, 1])
_FIRST = np.array([1, 1, -1, -1])
_SECOND = np.array([1, -1, 1, -1])

# (half-wave angle, quarter-wave angle) that map the +1/-1 eigenstates to H/V
_PLATE_ANGLES = {
    "Z": (0.0, 0.0),
    "X": (np.pi / 8, np.pi / 4),
    "Y": (np.pi / 8, 0.0),
}


def hwp(theta: float) -> np.ndarray:
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return np.array([[-c, -s], [-s, c]], dtype=complex)


def qwp(zeta: float) -> np.ndarray:
    c, s = np.cos(2 * zeta), np.sin(2 * zeta)
    return np.array([[1 + 1j * c, 1j * s], [1j * s, 1 - 1j * c]]) / np.sqrt(2)


def analyzer(basis: str) -> np.ndarray:
    """Single-photon rotation (QWP then HWP) for measuring X, Y or Z on a PBS."""
    theta, zeta = _PLATE_ANGLES[basis.upper()]
    return hwp(theta) @ qwp(zeta)


@dataclass(frozen=True)
class AttenuatorBank:
    eta1: float
    eta2: float
    eta3: float
    eta4: float

    def __post_init__(self):
        for i, eta in enumerate(self.as_tuple(), 1):
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"eta{i} = {eta!r} is not a transmittance in [0, 1]")

    def as_tuple(self):
        return (self.eta1, self.eta2, self.eta3, self.eta4)


def transmittances(p: float) -> AttenuatorBank:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner parameter must lie in [0, 1], got {p!r}")
    return AttenuatorBank((1 - p) / (2 + 2 * p), (1 + 3 * p) / (2 + 2 * p), (1 - p) / 2, (1 + p) / 2)


def mixture_weights(bank: AttenuatorBank) -> tuple:
    """Normalized weights of (Psi-, Psi+, HH, VV) behind the attenuators."""
    e1, e2, e3, e4 = bank.as_tuple()
    norm = (e1 + e2) * (e3 + e4)
    if norm <= 0:
        raise ValueError("degenerate attenuator configuration: normalization is zero")
    hv = (e1 + e2) * e3 / (2 * norm)
    return (e2 * e4 / norm, e1 * e4 / norm, hv, hv)


def mixed_state(bank: AttenuatorBank) -> np.ndarray:
    w = mixture_weights(bank)
    return w[0] * PSI_MINUS + w[1] * PSI_PLUS + w[2] * RHO_HH + w[3] * RHO_VV


@dataclass(frozen=True)
class CountRecord:
    basis_label: str
    counts: np.ndarray  # HH, HV, VH, VV
    total: float

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (4,) or np.any(c < 0):
            raise ValueError("counts must be four non-negative numbers")
        if not np.isclose(c.sum(), self.total, rtol=0, atol=1e-9 * max(1.0, abs(self.total))):
            raise ValueError(f"counts sum to {c.sum()!r}, not total {self.total!r}")
        object.__setattr__(self, "counts", c)


def outcome_probabilities(rho, setting: str) -> np.ndarray:
    """Coincidence probabilities (HH, HV, VH, VV) for a two-letter setting such as ``"XZ"``."""
    setting = setting.upper()
    if len(setting) != 2 or any(c not in _PLATE_ANGLES for c in setting):
        raise ValueError(f"invalid measurement setting {setting!r}")
    u = np.kron(analyzer(setting[0]), analyzer(setting[1]))
    rotated = u @ np.asarray(rho) @ u.conj().T
    return np.clip(np.diag(rotated).real, 0.0, None)


def exact_counts(rho, setting: str) -> CountRecord:
    """Infinite-shot limit: counts equal to the outcome probabilities."""
    probs = outcome_probabilities(rho, setting)
    return CountRecord(setting.upper(), probs, float(probs.sum()))


def measure_counts(rho, setting: str, shots: int, seed=None) -> CountRecord:
    """Independent Poisson counts with means ``shots * prob``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(shots * outcome_probabilities(rho, setting))
    return CountRecord(setting.upper(), counts, int(counts.sum()))


def _normalized(rec: CountRecord) -> np.ndarray:
    if rec.total <= 0:
        raise ValueError(f"setting {rec.basis_label} recorded no coincidences")
    return rec.counts / rec.total


def parity_expectation(rec: CountRecord) -> float:
    return float(_PARITY @ _normalized(rec))


def estimate_expectations(records) -> dict:
    """Basis probabilities (from ``ZZ``) and correlator expectations of each setting.

    Returns ``{"basis_probs": array or None, "expectations": {label: value}}``.
    """
    out = {"basis_probs": None, "expectations": {}}
    for rec in records:
        out["expectations"][rec.basis_label] = parity_expectation(rec)
        if rec.basis_label == "ZZ":
            out["basis_probs"] = _normalized(rec)
    return out


def record_from_counts(records, observables=("XX",)) -> MeasurementRecord:
    """Solver input from count data: ``ZZ`` supplies the basis probabilities."""
    est = estimate_expectations(records)
    if est["basis_probs"] is None:
        raise ValueError("a ZZ count record is required for the basis probabilities")
    labels = [o.upper() for o in observables]
    missing = [o for o in labels if o not in est["expectations"]]
    if missing:
        raise ValueError(f"no count records for {missing}")
    q = np.array([est["expectations"][o] for o in labels])
    return MeasurementRecord(est["basis_probs"], tuple(pauli(o) for o in labels), q, tuple(labels))


def pauli_expectations(records) -> dict:
    """All 16 two-qubit Pauli expectations from the nine product settings.

    Single-qubit terms are averaged over the three settings that contain them.
    """
    by = {r.basis_label: _normalized(r) for r in records}
    missing = [s for s in TOMOGRAPHY_SETTINGS if s not in by]
    if missing:
        raise ValueError(f"tomography needs all nine settings; missing {missing}")
    e = {"II": 1.0}
    for a, b in itertools.product("XYZ", repeat=2):
        e[a + b] = float(_PARITY @ by[a + b])
    for a in "XYZ":
        e[a + "I"] = float(np.mean([_FIRST @ by[a + b] for b in "XYZ"]))
        e["I" + a] = float(np.mean([_SECOND @ by[b + a] for b in "XYZ"]))
    return e


def qst_linear_inversion(expectations) -> np.ndarray:
    """Linear-inversion estimate projected onto the states by eigenvalue clipping.

    ``expectations`` is a mapping from the 16 labels ``II, IX, ..., ZZ`` to
    values, or a sequence of 16 values in that order.
    """
    if isinstance(expectations, dict):
        vals = [expectations[k] for k in PAULI_LABELS_2Q]
    else:
        vals = list(expectations)
    if len(vals) != 16:
        raise ValueError("two-qubit tomography needs 16 Pauli expectations")
    rho = sum(v * pauli(k) for k, v in zip(PAULI_LABELS_2Q, vals)) / 4
    w, v = np.linalg.eigh(hermitian(rho))
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(4, dtype=complex) / 4
    w /= w.sum()
    return (v * w) @ v.conj().T
