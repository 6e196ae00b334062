"""Lower bound on the relative entropy of coherence by gradient ascent on a concave dual.

With ``A = log2(diag(p))`` and the augmented observables ``o' = [o, I]`` and
data ``q' = [q, 1]`` the dual function is

    f(lam) = -(log2(e) / e) * tr 2^(A - lam . o') - lam . q'

whose maximum is the bound ``beta``. The maximizer of the inner Lagrangian is
``rho*(lam) = 2^(A - lam . o') / e`` and ``grad f = tr(rho* o') - q'``.
"""
import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from recbound.states import MeasurementRecord

log = logging.getLogger(__name__)

LOG2E = float(np.log2(np.e))
# cap on the natural-log argument of the matrix exponential
EXPONENT_CAP = 700.0
_CAP_BITS = EXPONENT_CAP / np.log(2)


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    DIVERGED = "Diverged"


class ExponentOverflow(ArithmeticError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    learning_rate: float = 0.05
    tolerance: float = 1e-5
    max_iters: int = 1_000_000
    prob_floor: float = 1e-12
    divergence_bound: float = 1e6
    # "zeros" or "random"; random draws lam0 ~ N(0, 1) from init_seed
    init: str = "zeros"
    init_seed: int = 0
    line_search: bool = False
    # maximize over the identity multiplier in closed form after every step
    exact_trace_step: bool = False
    record_history: bool = False

    def __post_init__(self):
        for name in ("learning_rate", "tolerance", "max_iters", "prob_floor", "divergence_bound"):
            if not getattr(self, name) > 0:
                raise ValueError(f"SolverConfig.{name} must be strictly positive")
        if self.init not in ("zeros", "random"):
            raise ValueError(f"unknown init policy {self.init!r}")


@dataclass(frozen=True)
class DualProblem:
    log_ref: np.ndarray  # diagonal of log2(p . b), floored p
    aug_observables: np.ndarray  # (m, d, d); last entry is the identity
    aug_expectations: np.ndarray  # (m,); last entry is 1

    @property
    def dim(self) -> int:
        return self.log_ref.size

    @property
    def n_multipliers(self) -> int:
        return self.aug_expectations.size

    @property
    def reference(self) -> np.ndarray:
        return np.diag(np.exp2(self.log_ref)).astype(complex)


@dataclass
class SolverResult:
    multipliers: np.ndarray
    beta: float
    iterations: int
    grad_norm: float
    primal: np.ndarray
    status: Status
    history: Optional[list] = field(default=None, repr=False)
    ascent_violations: int = 0

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def build_problem(record: MeasurementRecord, config: SolverConfig = SolverConfig()) -> DualProblem:
    p = np.maximum(record.basis_probs, config.prob_floor)
    p = p / p.sum()
    d = p.size
    obs = [np.asarray(o) for o in record.observables] + [np.eye(d, dtype=complex)]
    q = np.append(record.expectations, 1.0)
    return DualProblem(np.log2(p), np.stack(obs), q)


def _check_lam(prob: DualProblem, lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float).reshape(-1)
    if lam.size != prob.n_multipliers:
        raise ValueError(f"expected {prob.n_multipliers} multipliers, got {lam.size}")
    return lam


def _exp_spectrum(prob: DualProblem, lam: np.ndarray):
    """Eigenvalues and eigenvectors of ``A - lam . o'``."""
    h = np.diag(prob.log_ref).astype(complex) - np.tensordot(lam, prob.aug_observables, axes=1)
    w, v = np.linalg.eigh(h)
    if w[-1] > _CAP_BITS or not np.all(np.isfinite(w)):
        raise ExponentOverflow(f"exponent eigenvalue {w[-1]:.6g} exceeds cap {_CAP_BITS:.6g}")
    return w, v


def _evaluate(prob: DualProblem, lam: np.ndarray, exact_trace: bool = False):
    """Objective, gradient, the unnormalized exponential ``2^(A - lam.o')`` and ``lam``.

    With ``exact_trace`` the identity multiplier is first moved to its
    maximizer ``log2(tr 2^(A - lam.o')) - log2(e)`` given the other entries.
    """
    w, v = _exp_spectrum(prob, lam)
    if exact_trace:
        shift = float(np.log2(np.sum(np.exp2(w - w[-1]))) + w[-1] - LOG2E)
        lam = lam.copy()
        lam[-1] += shift
        w = w - shift
    ew = np.exp2(w)
    e_mat = (v * ew) @ v.conj().T
    f = -(LOG2E / np.e) * ew.sum() - lam @ prob.aug_expectations
    # tr(E O_j) = sum_ab E_ab O_j,ba
    tr_eo = np.einsum("ab,jba->j", e_mat, prob.aug_observables).real
    g = tr_eo / np.e - prob.aug_expectations
    return float(f), g, e_mat, lam


def objective(prob: DualProblem, lam) -> float:
    return _evaluate(prob, _check_lam(prob, lam))[0]


def gradient(prob: DualProblem, lam) -> np.ndarray:
    return _evaluate(prob, _check_lam(prob, lam))[1]


def primal(prob: DualProblem, lam) -> np.ndarray:
    """Minimizer of the Lagrangian at ``lam``; unit trace only at the dual optimum."""
    e_mat = _evaluate(prob, _check_lam(prob, lam))[2]
    rho = e_mat / np.e
    return 0.5 * (rho + rho.conj().T)


def primal_rel_entropy(prob: DualProblem, rho) -> float:
    """``S(rho || p.b)`` for a (possibly unnormalized) positive ``rho``, using the floored reference."""
    w = np.linalg.eigvalsh(rho)
    w = w[w > 0]
    return float(np.sum(w * np.log2(w)) - np.real(np.diag(rho)) @ prob.log_ref)


def constraint_residuals(prob: DualProblem, rho) -> np.ndarray:
    """``tr(rho o'_j) - q'_j``; the last entry is the trace residual."""
    return np.einsum("ab,jba->j", rho, prob.aug_observables).real - prob.aug_expectations


def solve(prob: DualProblem, config: SolverConfig = SolverConfig(), lam0=None) -> SolverResult:
    """Gradient ascent on the dual until ``||grad f|| <= tolerance``.

    With ``config.line_search`` the fixed learning rate becomes the initial
    step of a backtracking search whose step is allowed to double after every
    accepted iteration.
    """
    if lam0 is None or (isinstance(lam0, str) and lam0 == "zeros"):
        if config.init == "random":
            lam = np.random.default_rng(config.init_seed).standard_normal(prob.n_multipliers)
        else:
            lam = np.zeros(prob.n_multipliers)
    else:
        lam = _check_lam(prob, lam0).copy()

    history = [] if config.record_history else None
    exact = config.exact_trace_step
    try:
        f, g, e_mat, lam = _evaluate(prob, lam, exact)
    except ExponentOverflow:
        log.warning("exponent overflow at the initial point")
        return SolverResult(lam, -np.inf, 0, np.inf, np.full((prob.dim,) * 2, np.nan), Status.DIVERGED, history)
    if history is not None:
        history.append(f)
    gnorm = float(np.linalg.norm(g))
    step = config.learning_rate
    violations = 0
    k = 0
    status = Status.MAX_ITERS
    while True:
        if gnorm <= config.tolerance:
            status = Status.CONVERGED
            break
        if k >= config.max_iters:
            break
        try:
            if config.line_search:
                step = min(2.0 * step, 1e6)
                while True:
                    lam_new = lam + step * g
                    try:
                        f_new, g_new, e_new, lam_new = _evaluate(prob, lam_new, exact)
                    except ExponentOverflow:
                        f_new = -np.inf
                    # slack absorbs rounding once the increments reach machine precision
                    if f_new >= f + 0.5 * step * gnorm**2 - 8 * np.finfo(float).eps * (1 + abs(f)):
                        break
                    step *= 0.5
                    if step < 1e-14:
                        # no ascent possible at floating point resolution
                        lam_new, f_new, g_new, e_new = lam, f, g, e_mat
                        break
            else:
                f_new, g_new, e_new, lam_new = _evaluate(prob, lam + config.learning_rate * g, exact)
        except ExponentOverflow as exc:
            log.info("dual diverged after %d iterations: %s", k, exc)
            status = Status.DIVERGED
            break
        k += 1
        if f_new < f - 1e-9:
            violations += 1
            log.debug("ascent violated at iteration %d: %.3e", k, f - f_new)
        if lam_new is lam:
            break
        lam, f, g, e_mat = lam_new, f_new, g_new, e_new
        gnorm = float(np.linalg.norm(g))
        if history is not None:
            history.append(f)
        if np.linalg.norm(lam) > config.divergence_bound:
            status = Status.DIVERGED
            break
    if violations:
        log.warning("%d non-ascent steps at learning rate %g", violations, config.learning_rate)
    rho = e_mat / np.e
    return SolverResult(
        multipliers=lam,
        beta=f,
        iterations=k,
        grad_norm=gnorm,
        primal=0.5 * (rho + rho.conj().T),
        status=status,
        history=history,
        ascent_violations=violations,
    )


def beta_bound(record: MeasurementRecord, config: SolverConfig = SolverConfig()) -> SolverResult:
    return solve(build_problem(record, config), config)
