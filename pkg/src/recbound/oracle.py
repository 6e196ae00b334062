"""Brute-force reference values for small systems.

Both the tight bound ``alpha`` (REC minimized subject to all data) and the
relaxed bound (``S(rho || p.b)`` minimized subject to the extra observables
only) are computed by direct minimization over ``rho = L L^H / tr(L L^H)``
with quadratic constraint penalties of increasing weight, restarted from
several random factors. Nothing here touches the dual machinery, so the two
routes check each other.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from recbound import dual
from recbound.linalg import pauli
from recbound.states import MeasurementRecord, random_density, record_from_state

log = logging.getLogger(__name__)

MAX_ORACLE_DIM = 8
_LOG_FLOOR = 1e-300


class OracleFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    restarts: int = 32
    penalty_schedule: tuple = (1e2, 1e4, 1e6, 1e8)
    inner_tol: float = 1e-7
    max_inner_iters: int = 2000
    residual_tol: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        w = np.asarray(self.penalty_schedule, dtype=float)
        if w.size == 0 or np.any(w <= 0) or np.any(np.diff(w) <= 0):
            raise ValueError("penalty_schedule must be strictly increasing positive weights")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class ScatterPoint:
    alpha: float
    beta: float
    instance_seed: int
    beta_status: str = "Converged"

    @property
    def gap(self) -> float:
        return self.alpha - self.beta


class _Penalized:
    """Objective ``F(rho) + w * |residuals|^2`` and its gradient in the real coordinates of ``L``."""

    def __init__(self, d, kind, constraints, targets, log_ref=None):
        self.d = d
        self.kind = kind
        self.c = np.stack(constraints) if len(constraints) else np.zeros((0, d, d), complex)
        self.t = np.asarray(targets, dtype=float)
        self.log_ref = log_ref
        self.weight = 1.0

    def rho_of(self, x):
        d = self.d
        l = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
        w = l @ l.conj().T
        tau = np.trace(w).real
        return l, 0.5 * (w + w.conj().T) / tau, tau

    def residuals(self, rho):
        return np.einsum("ab,jba->j", rho, self.c).real - self.t

    def entropy_part(self, rho):
        ev, vec = np.linalg.eigh(rho)
        ev = np.clip(ev, 0.0, None)
        pos = ev > 0
        xlogx = np.sum(ev[pos] * np.log2(ev[pos]))
        logrho = (vec * np.log2(np.maximum(ev, _LOG_FLOOR))) @ vec.conj().T
        diag = np.clip(np.diag(rho).real, 0.0, None)
        if self.kind == "alpha":
            dpos = diag > 0
            ref = np.zeros_like(diag)
            ref[dpos] = np.log2(diag[dpos])
            val = xlogx - np.sum(diag[dpos] * ref[dpos])
            grad = logrho - np.diag(np.log2(np.maximum(diag, _LOG_FLOOR)))
        else:
            val = xlogx - diag @ self.log_ref
            grad = logrho - np.diag(self.log_ref)
        return float(val), grad

    def __call__(self, x):
        l, rho, tau = self.rho_of(x)
        val, g = self.entropy_part(rho)
        r = self.residuals(rho)
        val += self.weight * float(r @ r)
        g = g + 2 * self.weight * np.tensordot(r, self.c, axes=1)
        h = g - np.trace(g @ rho).real * np.eye(self.d)
        hl = (h @ l) * (2.0 / tau)
        return val, np.concatenate([hl.real.ravel(), hl.imag.ravel()])

    def value(self, rho):
        self.weight = 0.0
        val = self.entropy_part(rho)[0]
        return val


def _penalized_minimum(record: MeasurementRecord, config: OracleConfig, kind: str) -> float:
    d = record.dim
    if d > MAX_ORACLE_DIM:
        raise ValueError(f"oracle is limited to dim <= {MAX_ORACLE_DIM}, got {d}")
    if kind == "alpha":
        basis = [np.diag(np.eye(d)[i]).astype(complex) for i in range(d)]
        constraints = basis + list(record.observables)
        targets = np.concatenate([record.basis_probs, record.expectations])
        log_ref = None
    else:
        constraints = list(record.observables)
        targets = record.expectations
        log_ref = dual.build_problem(record).log_ref
    fun = _Penalized(d, kind, constraints, targets, log_ref)

    rng = np.random.default_rng(config.seed)
    best = np.inf
    worst_residual = np.inf
    for _ in range(config.restarts):
        x = rng.standard_normal(2 * d * d) / np.sqrt(2 * d)
        for w in config.penalty_schedule:
            fun.weight = w
            res = minimize(
                fun, x, jac=True, method="L-BFGS-B",
                options={"maxiter": config.max_inner_iters, "ftol": config.inner_tol * 1e-3, "gtol": config.inner_tol},
            )
            x = res.x
        _, rho, _ = fun.rho_of(x)
        resid = np.max(np.abs(fun.residuals(rho))) if fun.t.size else 0.0
        val = fun.value(rho)
        worst_residual = min(worst_residual, resid)
        if resid <= config.residual_tol:
            best = min(best, val)
    if not np.isfinite(best):
        raise OracleFailure(
            f"no restart met the residual tolerance {config.residual_tol:g} (best residual {worst_residual:.3e})"
        )
    return float(best)


def alpha_direct(record: MeasurementRecord, config: OracleConfig = OracleConfig()) -> float:
    """Smallest REC found over states matching the basis probabilities and all expectations."""
    return _penalized_minimum(record, config, "alpha")


def relaxed_direct(record: MeasurementRecord, config: OracleConfig = OracleConfig()) -> float:
    """Smallest ``S(rho || p.b)`` found over states matching the extra expectations.

    This is the primal of the relaxed problem and should agree with the dual
    bound returned by :func:`recbound.dual.beta_bound`.
    """
    return _penalized_minimum(record, config, "relaxed")


def offdiagonal_paulis(n_qubits: int) -> list:
    """Pauli labels containing at least one X or Y, in lexicographic order."""
    return ["".join(s) for s in itertools.product("IXYZ", repeat=n_qubits) if set(s) - {"I", "Z"}]


def random_instance(dim: int, n_extra: int, seed, observables: Sequence[str] = None) -> MeasurementRecord:
    """Data generated by a random full-rank state.

    The extra observables are ``n_extra`` distinct off-diagonal Pauli strings
    drawn without replacement, unless fixed through ``observables``.
    """
    n = int(round(np.log2(dim)))
    if dim < 2 or 2**n != dim:
        raise ValueError(f"dim must be a power of two, got {dim}")
    rng = np.random.default_rng(seed)
    rho = random_density(dim, dim, rng)
    if observables is None:
        if n_extra < 1:
            raise ValueError("n_extra must be >= 1")
        pool = offdiagonal_paulis(n)
        if n_extra > len(pool):
            raise ValueError(f"only {len(pool)} off-diagonal Pauli strings exist on {n} qubits")
        observables = [pool[i] for i in rng.choice(len(pool), size=n_extra, replace=False)]
    return record_from_state(rho, observables)


def instance_state(dim: int, seed) -> np.ndarray:
    """The state behind :func:`random_instance` for the same ``(dim, seed)``."""
    return random_density(dim, dim, np.random.default_rng(seed))


def scatter_alpha_beta(
    n_points: int,
    dim: int = 4,
    n_extra: int = 1,
    seed: int = 0,
    observables: Sequence[str] = ("XX",),
    oracle_config: OracleConfig = OracleConfig(),
    solver_config: dual.SolverConfig = dual.SolverConfig(),
):
    """Pairs ``(alpha, beta)`` on random instances; returns ``(points, failures)``.

    Instance ``i`` uses seed ``seed + i``. With ``observables=None`` the extra
    observables are drawn at random (``n_extra`` of them).
    """
    points, failures = [], []
    for i in range(n_points):
        s = seed + i
        rec = random_instance(dim, n_extra, s, observables=observables)
        res = dual.beta_bound(rec, solver_config)
        try:
            a = alpha_direct(rec, oracle_config)
        except OracleFailure as exc:
            log.warning("instance %d excluded: %s", s, exc)
            failures.append((s, str(exc)))
            continue
        points.append(ScatterPoint(a, res.beta, s, res.status.value))
    return points, failures


def scatter_summary(points) -> dict:
    gaps = np.array([pt.gap for pt in points])
    return {
        "n": len(points),
        "mean_gap": float(gaps.mean()) if gaps.size else float("nan"),
        "max_gap": float(gaps.max()) if gaps.size else float("nan"),
        "min_gap": float(gaps.min()) if gaps.size else float("nan"),
        "violations": int(np.sum(gaps < -1e-4)),
    }
