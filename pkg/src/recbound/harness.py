"""Drivers behind the command line: problem files, sweeps, scatter and simulation,
CSV output and run manifests."""
import csv
import hashlib
import io
import json
import logging
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import numpy as np
import scipy

from recbound import dual, experiment, oracle
from recbound.linalg import pauli
from recbound.states import MeasurementRecord, rec, record_from_state, werner, werner_rec_closed_form

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240817
WERNER_P_VALUES = (0.0, 0.1, 0.2, 1 / 3, 0.4, 0.6, 0.8, 1.0)
WORKERS_ENV = "RECBOUND_WORKERS"

BENCH_COLUMNS = ["N", "lambda_count", "trial", "seed", "T", "beta", "status"]
BENCH_SUMMARY_COLUMNS = ["N", "lambda_count", "mean_T", "std_T", "n_excluded"]
SCATTER_COLUMNS = ["seed", "alpha", "beta", "gap"]
SIMULATE_COLUMNS = [
    "p", "obs_set", "beta_mean", "beta_std", "rec_qst_mean", "rec_qst_std", "rec_ideal",
    "n_reps", "n_excluded",
]


class InputError(ValueError):
    """Problem or scenario file that cannot be turned into a valid input."""


# ---------------------------------------------------------------- utilities


def derive_seed(*keys: int) -> int:
    """Deterministic 32-bit seed from a root seed and indices."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: str, columns, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(csv_path: str, command: str, config: dict, seed, started: float, extra: Optional[dict] = None) -> str:
    from recbound import __version__

    manifest = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "seed": seed,
        "versions": {
            "recbound": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wall_clock_s": time.time() - started,
        "output": os.path.abspath(csv_path),
    }
    if extra:
        manifest.update(extra)
    path = csv_path + ".manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
    return path


def resolve_workers(flag: Optional[int]) -> int:
    if flag is not None:
        return max(1, int(flag))
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _pmap(fn, items, workers: int):
    """Ordered map; results come back in input order regardless of completion order."""
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


# ---------------------------------------------------------------- problem files

_SOLVER_KEYS = {f.name for f in fields(dual.SolverConfig)}
_SOLVER_ALIASES = {"eta": "learning_rate", "tol": "tolerance", "epsilon": "tolerance"}


def solver_config_from(overrides: dict, base: dual.SolverConfig = dual.SolverConfig(), where: str = "solver"):
    if not isinstance(overrides, dict):
        raise InputError(f"{where}: expected an object")
    kw = {}
    for k, v in overrides.items():
        name = _SOLVER_ALIASES.get(k, k)
        if name not in _SOLVER_KEYS:
            raise InputError(f"{where}.{k}: unknown solver option")
        kw[name] = v
    try:
        return replace(base, **kw)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _parse_matrix(entry, d: int, where: str) -> np.ndarray:
    if not isinstance(entry, list) or len(entry) != d:
        raise InputError(f"{where}: expected {d} rows")
    out = np.zeros((d, d), dtype=complex)
    for i, row in enumerate(entry):
        if not isinstance(row, list) or len(row) != d:
            raise InputError(f"{where}[{i}]: expected {d} entries")
        for j, z in enumerate(row):
            if isinstance(z, (int, float)) and not isinstance(z, bool):
                out[i, j] = z
            elif isinstance(z, list) and len(z) == 2 and all(isinstance(t, (int, float)) for t in z):
                out[i, j] = complex(z[0], z[1])
            else:
                raise InputError(f"{where}[{i}][{j}]: expected a number or a [re, im] pair")
    return out


def parse_problem(doc) -> tuple:
    """Return ``(MeasurementRecord, solver overrides)`` from a decoded problem document."""
    if not isinstance(doc, dict):
        raise InputError("top level: expected an object")
    for key in ("dimension", "basis_probs"):
        if key not in doc:
            raise InputError(f"{key}: missing required field")
    d = doc["dimension"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise InputError("dimension: expected a positive integer")
    probs = doc["basis_probs"]
    if not isinstance(probs, list) or len(probs) != d or not all(isinstance(x, (int, float)) for x in probs):
        raise InputError(f"basis_probs: expected {d} numbers")
    obs_doc = doc.get("observables", [])
    exp_doc = doc.get("expectations", [])
    if not isinstance(obs_doc, list):
        raise InputError("observables: expected a list")
    if not isinstance(exp_doc, list) or not all(isinstance(x, (int, float)) for x in exp_doc):
        raise InputError("expectations: expected a list of numbers")
    if len(exp_doc) != len(obs_doc):
        raise InputError(f"expectations: {len(exp_doc)} values for {len(obs_doc)} observables")
    mats, labels = [], []
    for j, o in enumerate(obs_doc):
        where = f"observables[{j}]"
        if isinstance(o, str):
            o = {"pauli": o}
        if not isinstance(o, dict) or len(set(o) & {"pauli", "matrix"}) != 1:
            raise InputError(f"{where}: expected {{'pauli': label}} or {{'matrix': rows}}")
        if "pauli" in o:
            try:
                m = pauli(o["pauli"])
            except (ValueError, AttributeError, TypeError):
                raise InputError(f"{where}.pauli: invalid Pauli label {o['pauli']!r}") from None
            if m.shape[0] != d:
                raise InputError(f"{where}.pauli: {o['pauli']!r} acts on dimension {m.shape[0]}, not {d}")
            labels.append(str(o["pauli"]).upper())
        else:
            m = _parse_matrix(o["matrix"], d, f"{where}.matrix")
            labels.append(f"M{j}")
        mats.append(m)
    try:
        record = MeasurementRecord(np.array(probs, float), tuple(mats), np.array(exp_doc, float), tuple(labels))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return record, doc.get("solver", {})


def load_problem(path: str) -> tuple:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return parse_problem(doc)


def estimate_report(record: MeasurementRecord, config: dual.SolverConfig) -> tuple:
    prob = dual.build_problem(record, config)
    res = dual.solve(prob, config)
    resid = dual.constraint_residuals(prob, res.primal) if res.status is not dual.Status.DIVERGED else []
    report = {
        "beta": res.beta,
        "lambda_star": [float(x) for x in res.multipliers],
        "iterations": res.iterations,
        "grad_norm": res.grad_norm,
        "status": res.status.value,
        "primal_constraint_residuals": [float(x) for x in resid],
    }
    return report, res


# ---------------------------------------------------------------- bench


def _bench_trial(args):
    n, lam_count, trial, seed, eta, eps = args
    dim = 2**n
    s = derive_seed(seed, n, lam_count, trial)
    n_extra = lam_count - 1
    rec_ = oracle.random_instance(dim, n_extra, s, observables=() if n_extra == 0 else None)
    res = dual.beta_bound(rec_, dual.SolverConfig(learning_rate=eta, tolerance=eps))
    return {"N": n, "lambda_count": lam_count, "trial": trial, "seed": s,
            "T": res.iterations, "beta": res.beta, "status": res.status.value}


def bench(qubits=(2, 3, 4), lambdas=(1, 2, 3), trials=100, eta=0.05, eps=1e-5, seed=DEFAULT_SEED, workers=1):
    """Iteration counts of the fixed-step ascent on random instances.

    Returns ``(rows, summary)``. Non-converged trials are kept in ``rows`` and
    excluded from the summary means.
    """
    for n in qubits:
        avail = len(oracle.offdiagonal_paulis(n))
        if any(lc - 1 > avail or lc < 1 for lc in lambdas):
            raise ValueError(f"lambda counts {lambdas} not realizable on {n} qubits")
    jobs = [(n, lc, t, seed, eta, eps) for n in qubits for lc in lambdas for t in range(trials)]
    rows = _pmap(_bench_trial, jobs, workers)
    summary = []
    for n in qubits:
        for lc in lambdas:
            ts = [r["T"] for r in rows if r["N"] == n and r["lambda_count"] == lc and r["status"] == "Converged"]
            total = sum(1 for r in rows if r["N"] == n and r["lambda_count"] == lc)
            summary.append({
                "N": n, "lambda_count": lc,
                "mean_T": float(np.mean(ts)) if ts else float("nan"),
                "std_T": float(np.std(ts, ddof=1)) if len(ts) > 1 else 0.0,
                "n_excluded": total - len(ts),
            })
    return rows, summary


# ---------------------------------------------------------------- scatter


def _scatter_point(args):
    s, dim, n_extra, fixed_obs, ocfg = args
    pts, fails = oracle.scatter_alpha_beta(1, dim, n_extra, s, observables=fixed_obs, oracle_config=ocfg)
    return pts, fails


def oracle_scatter(points=500, dim=4, n_extra=1, seed=DEFAULT_SEED, oracle_config=None, workers=1):
    """``(alpha, beta)`` pairs; with ``dim == 4`` and ``n_extra == 1`` the observable is ``XX``.

    Returns ``(rows, summary, failures)``.
    """
    if dim > oracle.MAX_ORACLE_DIM:
        raise ValueError(f"oracle scatter is limited to dim <= {oracle.MAX_ORACLE_DIM}")
    ocfg = oracle_config or oracle.OracleConfig()
    fixed = ("X" * int(np.log2(dim)),) if n_extra == 1 else None
    jobs = [(seed + i, dim, n_extra, fixed, ocfg) for i in range(points)]
    results = _pmap(_scatter_point, jobs, workers)
    pts = [p for r in results for p in r[0]]
    failures = [f for r in results for f in r[1]]
    rows = [{"seed": p.instance_seed, "alpha": p.alpha, "beta": p.beta, "gap": p.gap} for p in pts]
    summary = oracle.scatter_summary(pts)
    summary["oracle_failures"] = len(failures)
    return rows, summary, failures


# ---------------------------------------------------------------- simulate

SIMULATE_SOLVER = dual.SolverConfig(tolerance=1e-8, line_search=True, exact_trace_step=True)


@dataclass
class Scenario:
    p_values: tuple = WERNER_P_VALUES
    observable_sets: tuple = (("XX",), ("XX", "YY"))
    shots: int = 100_000
    repetitions: int = 1000
    seed: int = DEFAULT_SEED
    noiseless: bool = False
    qst: bool = True
    solver: dual.SolverConfig = field(default_factory=lambda: SIMULATE_SOLVER)


def parse_scenario(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise InputError("top level: expected an object")
    known = {f.name for f in fields(Scenario)}
    for k in doc:
        if k not in known:
            raise InputError(f"{k}: unknown scenario field")
    kw = {}
    if "p_values" in doc:
        pv = doc["p_values"]
        if not isinstance(pv, list) or not pv or not all(isinstance(x, (int, float)) and 0 <= x <= 1 for x in pv):
            raise InputError("p_values: expected a non-empty list of numbers in [0, 1]")
        kw["p_values"] = tuple(float(x) for x in pv)
    if "observable_sets" in doc:
        os_ = doc["observable_sets"]
        if not isinstance(os_, list) or not os_:
            raise InputError("observable_sets: expected a non-empty list of label lists")
        sets = []
        for i, s in enumerate(os_):
            if not isinstance(s, list) or not s or any(x not in ("XX", "YY") for x in s):
                raise InputError(f"observable_sets[{i}]: labels must be drawn from XX, YY")
            sets.append(tuple(s))
        kw["observable_sets"] = tuple(sets)
    for k in ("shots", "repetitions", "seed"):
        if k in doc:
            v = doc[k]
            if not isinstance(v, int) or isinstance(v, bool) or v < (0 if k == "seed" else 1):
                raise InputError(f"{k}: expected a positive integer")
            kw[k] = v
    for k in ("noiseless", "qst"):
        if k in doc:
            if not isinstance(doc[k], bool):
                raise InputError(f"{k}: expected true or false")
            kw[k] = doc[k]
    if "solver" in doc:
        kw["solver"] = solver_config_from(doc["solver"], SIMULATE_SOLVER)
    return Scenario(**kw)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return parse_scenario(doc)


def _obs_set_name(obs) -> str:
    return "+".join(("ZZ",) + tuple(obs))


def _simulate_rep(args):
    """One repetition at one p: beta per observable set and REC of the tomographic estimate."""
    p, shots, s, obs_sets, qst, solver = args
    rho = experiment.mixed_state(experiment.transmittances(p))
    rng = np.random.default_rng(s)
    settings = experiment.TOMOGRAPHY_SETTINGS if qst else ["ZZ", "XX", "YY"]
    records = [experiment.measure_counts(rho, st, shots, rng) for st in settings]
    betas = []
    for obs in obs_sets:
        res = dual.beta_bound(experiment.record_from_counts(records, obs), solver)
        betas.append(res.beta if res.converged else np.nan)
    rec_qst = rec(experiment.qst_linear_inversion(experiment.pauli_expectations(records))) if qst else np.nan
    return betas, rec_qst


def simulate(scenario: Scenario, workers: int = 1):
    rows = []
    for ip, p in enumerate(scenario.p_values):
        ideal = werner_rec_closed_form(p)
        if scenario.noiseless:
            rho = experiment.mixed_state(experiment.transmittances(p))
            records = [experiment.exact_counts(rho, st) for st in experiment.TOMOGRAPHY_SETTINGS]
            betas = np.array([[dual.beta_bound(experiment.record_from_counts(records, obs), scenario.solver).beta
                               for obs in scenario.observable_sets]])
            qst = np.array([rec(experiment.qst_linear_inversion(experiment.pauli_expectations(records)))])
        else:
            jobs = [(p, scenario.shots, derive_seed(scenario.seed, ip, r), scenario.observable_sets,
                     scenario.qst, scenario.solver) for r in range(scenario.repetitions)]
            out = _pmap(_simulate_rep, jobs, workers)
            betas = np.array([o[0] for o in out])
            qst = np.array([o[1] for o in out])
        for j, obs in enumerate(scenario.observable_sets):
            b = betas[:, j]
            ok = b[np.isfinite(b)]
            rows.append({
                "p": p,
                "obs_set": _obs_set_name(obs),
                "beta_mean": float(ok.mean()) if ok.size else float("nan"),
                "beta_std": float(ok.std(ddof=1)) if ok.size > 1 else 0.0,
                "rec_qst_mean": float(np.mean(qst)),
                "rec_qst_std": float(np.std(qst, ddof=1)) if qst.size > 1 else 0.0,
                "rec_ideal": ideal,
                "n_reps": int(b.size),
                "n_excluded": int(b.size - ok.size),
            })
    return rows


def scenario_dict(s: Scenario) -> dict:
    d = asdict(s)
    d["solver"] = asdict(s.solver)
    return d


def noiseless_beta(p: float, observables, config: dual.SolverConfig = SIMULATE_SOLVER) -> float:
    return dual.beta_bound(record_from_state(werner(p), observables), config).beta
