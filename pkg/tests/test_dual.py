import numpy as np
import pytest
from hypothesis import given, strategies as st

from recbound import dual
from recbound.linalg import exp2m, pauli, trace_product
from recbound.oracle import OracleConfig, instance_state, random_instance, relaxed_direct
from recbound.states import InvalidRecordError, MeasurementRecord, rec, record_from_state, werner

LOG2E = 1.4426950408889634
F_UNIFORM_AT_ZERO = -0.53073784542304299  # -log2(e)/e
G_UNIFORM_AT_ZERO = -0.63212055882855768  # 1/e - 1
ROBUST = dual.SolverConfig(line_search=True, exact_trace_step=True, tolerance=1e-8)

UNIFORM2 = MeasurementRecord(np.array([0.5, 0.5]))


def uniform_problem():
    return dual.build_problem(UNIFORM2)


def instances(n=12, seed=0):
    """Random records with d in {2, 4, 8} and at most four multipliers."""
    out = []
    rng = np.random.default_rng(seed)
    for i in range(n):
        d = [2, 4, 8][i % 3]
        n_extra = int(rng.integers(1, 3 if d == 2 else 4))
        out.append(random_instance(d, n_extra, int(rng.integers(2**31))))
    return out


def central_difference(prob, lam, h=1e-5):
    g = np.zeros_like(lam)
    for j in range(lam.size):
        e = np.zeros_like(lam)
        e[j] = h
        g[j] = (dual.objective(prob, lam + e) - dual.objective(prob, lam - e)) / (2 * h)
    return g


def test_build_problem_uniform():
    prob = uniform_problem()
    assert prob.n_multipliers == 1
    assert np.allclose(prob.aug_observables[-1], np.eye(2))
    assert prob.aug_expectations[-1] == 1.0
    assert np.allclose(prob.log_ref, [-1, -1])


def test_build_problem_floors_zero_probs():
    rec_ = MeasurementRecord(np.array([0, 0.5, 0.5, 0]))
    prob = dual.build_problem(rec_)
    p = np.exp2(prob.log_ref)
    assert p.sum() == pytest.approx(1.0, abs=1e-15)
    assert p[0] == pytest.approx(1e-12, rel=1e-9)


def test_build_problem_counts_multipliers():
    rec_ = record_from_state(np.eye(4) / 4, ["XX", "YY"])
    assert dual.build_problem(rec_).n_multipliers == 3


def test_objective_uniform_values():
    prob = uniform_problem()
    assert dual.objective(prob, [0.0]) == pytest.approx(F_UNIFORM_AT_ZERO, abs=1e-14)
    assert dual.objective(prob, [-LOG2E]) == pytest.approx(0.0, abs=1e-14)


def test_gradient_uniform_values():
    prob = uniform_problem()
    assert dual.gradient(prob, [-LOG2E]) == pytest.approx([0.0], abs=1e-14)
    assert dual.gradient(prob, [0.0]) == pytest.approx([G_UNIFORM_AT_ZERO], abs=1e-14)


def test_objective_rejects_wrong_length():
    with pytest.raises(ValueError):
        dual.objective(uniform_problem(), [0.0, 1.0])


def test_concavity_probe():
    rng = np.random.default_rng(11)
    recs = instances(20, seed=3)
    for k in range(100):
        prob = dual.build_problem(recs[k % len(recs)])
        a = rng.normal(scale=2.0, size=prob.n_multipliers)
        b = rng.normal(scale=2.0, size=prob.n_multipliers)
        mid = dual.objective(prob, (a + b) / 2)
        assert mid >= (dual.objective(prob, a) + dual.objective(prob, b)) / 2 - 1e-9


@pytest.mark.parametrize("rec_", instances(), ids=lambda r: f"d{r.dim}m{r.expectations.size}")
def test_gradient_matches_finite_differences(rec_):
    prob = dual.build_problem(rec_)
    rng = np.random.default_rng(rec_.dim * 7 + rec_.expectations.size)
    for _ in range(20):
        lam = rng.normal(size=prob.n_multipliers)
        g = dual.gradient(prob, lam)
        fd = central_difference(prob, lam)
        assert np.linalg.norm(g - fd) <= 1e-5 * np.linalg.norm(g)


@given(st.integers(0, 2**31 - 1))
def test_gradient_is_constraint_residual(seed):
    rec_ = random_instance(4, 2, seed)
    prob = dual.build_problem(rec_)
    lam = np.random.default_rng(seed).normal(size=prob.n_multipliers)
    rho = dual.primal(prob, lam)
    g = dual.gradient(prob, lam)
    for j in range(prob.n_multipliers):
        assert abs(g[j] - (trace_product(rho, prob.aug_observables[j]) - prob.aug_expectations[j])) <= 1e-10


def test_primal_uniform_at_optimum():
    assert np.allclose(dual.primal(uniform_problem(), [-LOG2E]), np.eye(2) / 2, atol=1e-14)


@given(st.integers(0, 2**31 - 1))
def test_primal_equivalent_form(seed):
    rec_ = random_instance(4, 1, seed)
    prob = dual.build_problem(rec_)
    lam = np.random.default_rng(seed).normal(size=prob.n_multipliers)
    exponent = np.diag(prob.log_ref) - np.tensordot(lam, prob.aug_observables, axes=1)
    expected = exp2m(exponent) / np.e
    other = exp2m(exponent - LOG2E * np.eye(4))
    assert np.allclose(dual.primal(prob, lam), expected, atol=1e-12)
    assert np.allclose(expected, other, atol=1e-12)
    assert np.linalg.eigvalsh(dual.primal(prob, lam))[0] > 0


def test_primal_werner_constraint_at_convergence():
    prob = dual.build_problem(record_from_state(werner(0.6), ["XX"]))
    res = dual.solve(prob)
    assert res.converged
    assert trace_product(res.primal, pauli("XX")) == pytest.approx(-0.6, abs=1e-4)


def test_solve_uniform_analytic():
    res = dual.solve(uniform_problem(), dual.SolverConfig(tolerance=1e-9))
    assert res.converged
    assert res.beta == pytest.approx(0.0, abs=1e-12)
    assert res.multipliers == pytest.approx([-LOG2E], abs=1e-8)


def test_solve_incoherent_target():
    res = dual.beta_bound(record_from_state(werner(0.0), ["XX"]))
    assert res.converged and abs(res.beta) <= 1e-4


def test_solve_singlet_matches_direct_relaxed_oracle():
    rec_ = record_from_state(werner(1.0), ["XX", "YY"])
    res = dual.beta_bound(rec_, ROBUST)
    direct = relaxed_direct(rec_, OracleConfig(restarts=8))
    assert res.converged
    assert abs(res.beta - direct) <= 1e-3


@pytest.mark.parametrize("seed", range(4))
def test_solve_matches_direct_relaxed_oracle_random(seed):
    rec_ = random_instance(4, 2, seed)
    res = dual.beta_bound(rec_)
    assert abs(res.beta - relaxed_direct(rec_, OracleConfig(restarts=4))) <= 1e-4


def test_fixed_step_matches_robust_mode():
    rec_ = random_instance(8, 3, 5)
    a = dual.beta_bound(rec_)
    b = dual.beta_bound(rec_, ROBUST)
    assert a.converged and b.converged
    assert a.beta == pytest.approx(b.beta, abs=1e-8)
    assert b.iterations < a.iterations


def test_beta_never_exceeds_rec_of_pure_singlet():
    res = dual.beta_bound(record_from_state(werner(1.0), ["XX"]), ROBUST)
    assert res.beta <= 1 + 1e-6


def test_more_observables_tighten_bound():
    for p in np.linspace(0, 1, 11):
        one = dual.beta_bound(record_from_state(werner(p), ["XX"]), ROBUST).beta
        two = dual.beta_bound(record_from_state(werner(p), ["XX", "YY"]), ROBUST).beta
        assert two >= one - 1e-6


def test_infeasible_record_rejected():
    with pytest.raises(InvalidRecordError):
        MeasurementRecord(np.full(4, 0.25), (pauli("XX"),), np.array([1.5]))


def test_jointly_infeasible_data_diverge():
    # <X> = <Z> = 1 is outside the Bloch ball
    rec_ = MeasurementRecord(np.array([0.5, 0.5]), (pauli("X"), pauli("Z")), np.array([1.0, 1.0]))
    res = dual.beta_bound(rec_, dual.SolverConfig(divergence_bound=50))
    assert res.status is dual.Status.DIVERGED
    res = dual.beta_bound(rec_, dual.SolverConfig(line_search=True, exact_trace_step=True))
    assert res.status is dual.Status.DIVERGED


def test_max_iters_reports_best_so_far():
    prob = dual.build_problem(random_instance(4, 2, 1))
    res = dual.solve(prob, dual.SolverConfig(max_iters=5, record_history=True))
    assert res.status is dual.Status.MAX_ITERS
    assert res.iterations == 5
    assert res.beta == pytest.approx(max(res.history))
    assert res.beta == dual.objective(prob, res.multipliers)


def test_random_init_is_seeded():
    prob = dual.build_problem(random_instance(4, 1, 2))
    cfg = dual.SolverConfig(init="random", init_seed=3)
    a, b = dual.solve(prob, cfg), dual.solve(prob, cfg)
    assert a.iterations == b.iterations and a.beta == b.beta
    assert a.beta == pytest.approx(dual.solve(prob).beta, abs=1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        dual.SolverConfig(learning_rate=0)
    with pytest.raises(ValueError):
        dual.SolverConfig(init="sobol")


@pytest.mark.parametrize("rec_", instances(9, seed=8), ids=lambda r: f"d{r.dim}m{r.expectations.size}")
def test_convergence_invariants(rec_):
    cfg = dual.SolverConfig(record_history=True)
    prob = dual.build_problem(rec_, cfg)
    res = dual.solve(prob, cfg)
    assert res.converged and res.grad_norm <= cfg.tolerance
    assert res.beta == dual.objective(prob, res.multipliers)
    # zero duality gap
    assert abs(res.beta - dual.primal_rel_entropy(prob, res.primal)) <= 10 * cfg.tolerance
    resid = dual.constraint_residuals(prob, res.primal)
    assert abs(resid[-1]) <= 1e-5
    assert np.max(np.abs(resid[:-1])) <= 1e-4
    # monotone ascent
    assert np.all(np.diff(res.history) >= -1e-9)
    assert res.ascent_violations == 0


@pytest.mark.parametrize("seed", range(6))
def test_bound_below_rec_of_witness(seed):
    rec_ = random_instance(4, 2, seed)
    assert dual.beta_bound(rec_).beta <= rec(instance_state(4, seed)) + 1e-4
