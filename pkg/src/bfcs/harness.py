"""Batch experiments: data generation, solver runs, sweeps and result files.

Output directory layout::

    results.csv       one row per (trial, algorithm, epsilon), see RESULT_FIELDS
    timings.csv       wall time per row (kept apart so results.csv is reproducible)
    points.csv        mean metrics per (algorithm, epsilon)
    summary.csv       mean/std per algorithm at its best epsilon by mean SNR
    config.echo.json  the resolved configuration
    images/*.pgm      8-bit min-max scaled images, with (min, max) in *.meta

Each trial draws its signal, sensing matrix and noise from seeds derived from
``(master_seed, trial_index)``, so any row can be rerun on its own.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import io as bio
from .barriers import BarrierKind
from .errors import InvalidInputError
from .model import (GroupSignalSpec, gaussian_sensing_matrix, generate_group_signal,
                    measure, sign_consistency_error, snr_db, support_f1)
from .solvers import SolverConfig, Variant, solve

log = logging.getLogger(__name__)

RESULT_FIELDS = [
    "trial", "trial_seed", "algorithm", "variant", "barrier", "epsilon", "status",
    "snr_db", "sign_consistency_error", "support_f1", "iterations", "reason",
    "residual", "nnz", "norm", "digest", "error",
]
SUMMARY_FIELDS = [
    "algorithm", "best_epsilon", "completed", "trials",
    "snr_db_mean", "snr_db_std", "sign_consistency_error_mean", "sign_consistency_error_std",
    "support_f1_mean", "support_f1_std", "iterations_mean",
]
POINT_FIELDS = ["algorithm", "epsilon", "completed", "trials", "snr_db_mean", "snr_db_std"]

# metrics written for a failed run
FAILED_SNR = -math.inf
FAILED_ITERATIONS = -1

# solver fields an algorithm entry may override
_SOLVER_KEYS = {"K", "tau", "max_iters", "rel_change_tol", "nonneg", "init", "proj_tol"}


class ConfigError(InvalidInputError):
    """Invalid experiment configuration or unusable output location."""


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _parse_float(x):
    if x is None or x == "":
        return None
    return float(x)


@dataclass
class AlgorithmSpec:
    """One algorithm column of the experiment.

    ``epsilon_grid`` is ignored for BIHT; ``solver`` overrides SolverConfig
    fields (K, tau, max_iters, rel_change_tol, nonneg, init, proj_tol).
    """

    variant: Variant
    barrier: BarrierKind
    epsilon_grid: list = field(default_factory=list)
    solver: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self.variant = Variant(self.variant)
        self.barrier = BarrierKind(self.barrier)
        self.epsilon_grid = [float(e) for e in self.epsilon_grid]
        if not self.name:
            self.name = f"{self.variant.value}-{self.barrier.value}"
        unknown = set(self.solver) - _SOLVER_KEYS
        if unknown:
            raise ConfigError(f"{self.name}: unknown solver keys {sorted(unknown)}")
        if self.variant is not Variant.BIHT and not self.epsilon_grid:
            raise ConfigError(f"{self.name}: epsilon_grid must be non-empty")

    def points(self):
        return [None] if self.variant is Variant.BIHT else list(self.epsilon_grid)

    def solver_config(self, epsilon):
        try:
            return SolverConfig(variant=self.variant, barrier=self.barrier,
                                epsilon=epsilon, **self.solver)
        except (InvalidInputError, TypeError) as exc:
            raise ConfigError(f"{self.name}: {exc}") from exc


@dataclass
class ExperimentConfig:
    signal: GroupSignalSpec = field(default_factory=GroupSignalSpec)
    M: int = 200
    noise_variance: float = 0.01
    algorithms: list = field(default_factory=list)
    n_trials: int = 10
    master_seed: int = 0
    output_dir: str = "results"
    workers: int = 1
    save_images: bool = True

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.M < 1:
            raise ConfigError("M must be >= 1")
        if not self.noise_variance >= 0:
            raise ConfigError("noise_variance must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must fit in an unsigned 64-bit integer")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate algorithm names in {names}")
        for alg in self.algorithms:
            for eps in alg.points():
                alg.solver_config(eps)

    def algorithm(self, name):
        for alg in self.algorithms:
            if alg.name == name:
                return alg
        raise ConfigError(f"unknown algorithm {name!r}")

    def to_dict(self):
        sig = asdict(self.signal)
        sig.pop("seed")
        return {
            "signal": sig,
            "M": self.M,
            "noise_variance": self.noise_variance,
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
            "output_dir": str(self.output_dir),
            "workers": self.workers,
            "save_images": self.save_images,
            "algorithms": [
                {"name": a.name, "variant": a.variant.value, "barrier": a.barrier.value,
                 "epsilon_grid": [_json_float(e) for e in a.epsilon_grid],
                 "solver": dict(a.solver)}
                for a in self.algorithms
            ],
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            sig = dict(d.pop("signal", {}))
            sig.pop("seed", None)
            signal = GroupSignalSpec(**sig, seed=None)
            algs = [AlgorithmSpec(**a) for a in d.pop("algorithms", [])]
            return cls(signal=signal, algorithms=algs, **d)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


def _json_float(x):
    # JSON has no infinity literal
    return "inf" if math.isinf(x) else x


def load_config(path):
    try:
        with open(path) as fh:
            return ExperimentConfig.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def paper_config(**changes):
    """The reference setup: 400x100 image, 10 vertical groups of 9 at +-10,
    M=200 Gaussian measurements, noise variance 0.01, tau=1 (l1) and 1/M (l2),
    and the six algorithm variants with per-algorithm epsilon grids."""
    # grids bracket the best mean-SNR radius of a 6-trial calibration sweep
    # (scripts/calibrate_epsilon.py, master seed 1); l1 iterates are ~700x
    # larger than l2 ones, hence the very different radii
    fused = {"proj_tol": 1e-3}
    algs = [
        AlgorithmSpec(Variant.BIHT, BarrierKind.L1),
        AlgorithmSpec(Variant.BIHT, BarrierKind.L2),
        AlgorithmSpec(Variant.FBCS_TV, BarrierKind.L1, [4e5, 6e5, 1e6], dict(fused)),
        AlgorithmSpec(Variant.FBCS_TV, BarrierKind.L2, [15.0, 20.0, 30.0], dict(fused)),
        AlgorithmSpec(Variant.FBCS_MTV, BarrierKind.L1, [3.0, 10.0, 30.0], dict(fused)),
        AlgorithmSpec(Variant.FBCS_MTV, BarrierKind.L2, [0.01, 0.03, 0.05], dict(fused)),
    ]
    cfg = ExperimentConfig(signal=GroupSignalSpec(seed=None), M=200, noise_variance=0.01,
                           algorithms=algs, n_trials=10)
    return replace(cfg, **changes) if changes else cfg


# ---------------------------------------------------------------------------
# seeds and data
# ---------------------------------------------------------------------------

def trial_seed(master_seed, trial_index):
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index),))
    return int(ss.generate_state(1, np.uint64)[0])


def trial_data(config, seed):
    """``(X, A, Y)`` for one trial seed."""
    sx, sa, sw = (int(s.generate_state(1, np.uint64)[0])
                  for s in np.random.SeedSequence(seed).spawn(3))
    X = generate_group_signal(replace(config.signal, seed=sx))
    A = gaussian_sensing_matrix(config.M, config.signal.n_rows, seed=sa)
    Y = measure(A, X, config.noise_variance, seed=sw)
    return X, A, Y


def run_digest(X_hat, trace):
    """Hash of the estimate and the per-iteration trace, for exact replay checks."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(X_hat, dtype="<f8").tobytes())
    for series in (trace.barrier, trace.residual, trace.change):
        h.update(np.asarray(series, dtype="<f8").tobytes())
    h.update(np.asarray(trace.nnz, dtype="<i8").tobytes())
    return h.hexdigest()[:32]


@dataclass
class TrialResult:
    trial: int
    trial_seed: int
    algorithm: str
    variant: str
    barrier: str
    epsilon: float | None
    status: str = "ok"
    snr_db: float = FAILED_SNR
    sign_consistency_error: float = math.nan
    support_f1: float = 0.0
    iterations: int = FAILED_ITERATIONS
    reason: str = ""
    residual: float = math.nan
    nnz: int = -1
    norm: float = math.nan
    digest: str = ""
    error: str = ""
    seconds: float = 0.0

    @property
    def ok(self):
        return self.status == "ok"

    def row(self):
        return {k: _fmt(getattr(self, k)) for k in RESULT_FIELDS}

    @classmethod
    def from_row(cls, row):
        return cls(
            trial=int(row["trial"]), trial_seed=int(row["trial_seed"]),
            algorithm=row["algorithm"], variant=row["variant"], barrier=row["barrier"],
            epsilon=_parse_float(row["epsilon"]), status=row["status"],
            snr_db=float(row["snr_db"]),
            sign_consistency_error=float(row["sign_consistency_error"]),
            support_f1=float(row["support_f1"]), iterations=int(row["iterations"]),
            reason=row["reason"], residual=float(row["residual"]), nnz=int(row["nnz"]), norm=float(row["norm"]),
            digest=row["digest"], error=row["error"],
        )


def run_single(config, alg, epsilon, trial, seed, data=None):
    """Run one algorithm at one parameter point; returns ``(TrialResult, X_hat)``."""
    X, A, Y = data if data is not None else trial_data(config, seed)
    res = TrialResult(trial=trial, trial_seed=seed, algorithm=alg.name,
                      variant=alg.variant.value, barrier=alg.barrier.value, epsilon=epsilon)
    start = time.perf_counter()
    try:
        X_hat, trace = solve(A, Y, alg.solver_config(epsilon))
    except Exception as exc:  # recorded, the batch goes on
        res.status = "failed"
        res.error = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        res.seconds = time.perf_counter() - start
        log.warning("trial %d %s eps=%s failed: %s", trial, alg.name, epsilon, res.error)
        return res, None
    res.seconds = time.perf_counter() - start
    res.snr_db = snr_db(X, X_hat)
    res.sign_consistency_error = sign_consistency_error(Y, A, X_hat)
    res.support_f1 = support_f1(X, X_hat)
    res.iterations = trace.iterations
    res.reason = trace.reason
    res.residual = float(trace.residual[-1])
    res.nnz = int(np.count_nonzero(X_hat))
    res.norm = float(np.linalg.norm(X_hat))
    res.digest = run_digest(X_hat, trace)
    return res, X_hat


def run_trial(config, trial):
    """All algorithms and parameter points for one trial index."""
    seed = trial_seed(config.master_seed, trial)
    data = trial_data(config, seed)
    runs = []
    for alg in config.algorithms:
        for eps in alg.points():
            runs.append(run_single(config, alg, eps, trial, seed, data))
    return trial, data[0], runs


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def _point_key(eps):
    return -math.inf if eps is None else eps


def _mean_std(values):
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=float)
    return float(np.mean(arr)), float(np.std(arr))


def point_table(results, n_trials):
    """Mean/std SNR per (algorithm, epsilon) over completed runs."""
    groups = {}
    for r in results:
        groups.setdefault((r.algorithm, r.epsilon), []).append(r)
    table = []
    for (name, eps), rs in groups.items():
        done = [r for r in rs if r.ok]
        mean, std = _mean_std([r.snr_db for r in done])
        table.append({"algorithm": name, "epsilon": eps, "completed": len(done),
                      "trials": n_trials, "snr_db_mean": mean, "snr_db_std": std,
                      "runs": done})
    return table


def best_points(results, n_trials):
    """Best epsilon per algorithm by mean SNR; ties go to the smaller epsilon.

    Points without any completed run are never chosen.
    """
    best = {}
    for p in point_table(results, n_trials):
        if p["completed"] == 0:
            best.setdefault(p["algorithm"], None)
            continue
        cur = best.get(p["algorithm"])
        if (cur is None or p["snr_db_mean"] > cur["snr_db_mean"]
                or (p["snr_db_mean"] == cur["snr_db_mean"]
                    and _point_key(p["epsilon"]) < _point_key(cur["epsilon"]))):
            best[p["algorithm"]] = p
    return best


def summary_table(results, n_trials, order=None):
    best = best_points(results, n_trials)
    names = order or list(best)
    rows = []
    for name in names:
        p = best.get(name)
        if p is None:
            rows.append({"algorithm": name, "best_epsilon": None, "completed": 0,
                         "trials": n_trials, **{k: math.nan for k in SUMMARY_FIELDS[4:]}})
            continue
        runs = p["runs"]
        row = {"algorithm": name, "best_epsilon": p["epsilon"], "completed": p["completed"],
               "trials": n_trials}
        for metric in ("snr_db", "sign_consistency_error", "support_f1"):
            row[f"{metric}_mean"], row[f"{metric}_std"] = _mean_std([getattr(r, metric) for r in runs])
        row["iterations_mean"] = _mean_std([r.iterations for r in runs])[0]
        rows.append(row)
    return rows


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row[k]) for k in header})


def read_results(path):
    with open(path, newline="") as fh:
        return [TrialResult.from_row(row) for row in csv.DictReader(fh)]


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

@dataclass
class ExperimentResult:
    results: list
    summary: list
    output_dir: Path

    @property
    def n_failed(self):
        return sum(not r.ok for r in self.results)

    def by_algorithm(self):
        return {row["algorithm"]: row for row in self.summary}


def _prepare_output(out):
    out = Path(out)
    try:
        (out / "images").mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("ok")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _image_name(name, eps_index):
    return f"{name}_eps{eps_index}" if eps_index is not None else name


def _save_image(out, stem, X):
    lo, hi = bio.save_pgm(out / "images" / f"{stem}.pgm", X)
    (out / "images" / f"{stem}.meta").write_text(f"min {lo!r}\nmax {hi!r}\n")


def run_experiment(config: ExperimentConfig):
    """Run every trial and write all tables and images under ``config.output_dir``.

    Trials may run in worker processes; results are written in
    (trial, algorithm, epsilon) order by this process alone.
    """
    out = _prepare_output(config.output_dir)
    (out / "config.echo.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n")
    eps_index = {a.name: {e: i for i, e in enumerate(a.epsilon_grid)} for a in config.algorithms}

    trials = range(config.n_trials)
    results = []
    with open(out / "results.csv", "w", newline="") as fres, \
            open(out / "timings.csv", "w", newline="") as ftime:
        wres = csv.DictWriter(fres, fieldnames=RESULT_FIELDS, lineterminator="\n")
        wtime = csv.writer(ftime, lineterminator="\n")
        wres.writeheader()
        wtime.writerow(["trial", "algorithm", "epsilon", "seconds"])

        def consume(item):
            trial, X, runs = item
            if config.save_images:
                _save_image(out, f"trial{trial:03d}_truth", X)
            for res, X_hat in runs:
                wres.writerow(res.row())
                wtime.writerow([res.trial, res.algorithm, _fmt(res.epsilon), repr(res.seconds)])
                if config.save_images and X_hat is not None:
                    idx = eps_index[res.algorithm].get(res.epsilon)
                    _save_image(out, f"trial{trial:03d}_{_image_name(res.algorithm, idx)}", X_hat)
                results.append(res)
            fres.flush()
            log.info("trial %d done", trial)

        if config.workers == 1:
            for t in trials:
                consume(run_trial(config, t))
        else:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                for item in pool.map(run_trial, [config] * len(trials), trials):
                    consume(item)

    points = point_table(results, config.n_trials)
    _write_csv(out / "points.csv", POINT_FIELDS, points)
    summary = summary_table(results, config.n_trials, [a.name for a in config.algorithms])
    _write_csv(out / "summary.csv", SUMMARY_FIELDS, summary)
    return ExperimentResult(results, summary, out)


def with_epsilon_grid(config, grid):
    """Copy of ``config`` with new epsilon grids.

    ``grid`` is either one list applied to every constrained algorithm or a
    mapping from algorithm name to its list.
    """
    algs = []
    for a in config.algorithms:
        g = grid.get(a.name) if isinstance(grid, dict) else grid
        if a.variant is Variant.BIHT or g is None:
            algs.append(a)
            continue
        if len(g) == 0:
            raise ConfigError(f"{a.name}: empty epsilon grid")
        algs.append(replace(a, epsilon_grid=[float(e) for e in g]))
    return replace(config, algorithms=algs)


def sweep_epsilon(config, grid):
    """Run on ``grid`` and return ``{algorithm: (best_epsilon, mean_snr)}``."""
    result = run_experiment(with_epsilon_grid(config, grid))
    return {row["algorithm"]: (row["best_epsilon"], row["snr_db_mean"])
            for row in result.summary}, result


def replay_row(csv_path, row_index):
    """Rerun row ``row_index`` (0-based, header excluded) of a results file.

    The configuration is read from ``config.echo.json`` beside the CSV.
    Returns ``(recorded, replayed)`` TrialResults.
    """
    csv_path = Path(csv_path)
    rows = read_results(csv_path)
    if not 0 <= row_index < len(rows):
        raise ConfigError(f"row {row_index} out of range, file has {len(rows)} rows")
    config = load_config(csv_path.parent / "config.echo.json")
    recorded = rows[row_index]
    alg = config.algorithm(recorded.algorithm)
    replayed, _ = run_single(config, alg, recorded.epsilon, recorded.trial, recorded.trial_seed)
    return recorded, replayed


def same_result(a, b):
    return a.row() == b.row()


def default_workers():
    return max(1, os.cpu_count() or 1)
