"""Cross-entropy policy search over the flat policy parameters.

Each iteration samples a population from a Gaussian, scores every candidate
on a freshly generated problem batch (summed IPC score, reference cost taken
from the population itself), and refits the Gaussian to the best ``m``
candidates with exponential smoothing.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .features import ScalingProfile, calibrate
from .generators import generate_batch, get_schedule
from .policy import THETA_SIZE, PolicyFile
from .runner import Contender, RunJob, ground_generated, run_jobs
from .scoring import ipc_scores
from .search.engine import Budget
from .seeding import derive_seed

JITTER_START = 1e-8
JITTER_MAX = 1e-2
CHECKPOINT_FORMAT = "paraplan-cem-checkpoint/1"
LOG_FIELDS = [
    "kind", "iteration", "candidate", "problem", "outcome", "solved", "cost", "expansions",
    "wall_ms", "score", "gamma", "mean_score", "elite_mean_score",
]


class CemError(RuntimeError):
    pass


@dataclass(frozen=True)
class CemConfig:
    iterations: int = 10
    problems: int = 20
    population: int = 50
    elite: int = 10
    alpha: float = 0.7
    time_limit: float = 5.0
    max_expansions: int | None = None
    seed: int = 0
    domain: str = "transport-lite"
    schedule: str = "default"
    heuristic: str = "ff"
    clock: str = "virtual"
    diagonal: bool = False

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.problems < 1:
            raise ValueError("need at least one problem per iteration")
        if not 0 < self.elite < self.population:
            raise ValueError(f"need 0 < elite < population, got m={self.elite}, n={self.population}")
        if self.elite < 2:
            raise ValueError("elite size must be at least 2 for the covariance update")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"smoothing alpha must lie in (0, 1], got {self.alpha}")

    def budget(self) -> Budget:
        return Budget(time_limit=self.time_limit, max_expansions=self.max_expansions)

    @classmethod
    def from_dict(cls, d: dict) -> "CemConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass
class GaussianOverTheta:
    mu: np.ndarray
    sigma: np.ndarray

    @classmethod
    def initial(cls, dim: int = THETA_SIZE) -> "GaussianOverTheta":
        return cls(np.zeros(dim), np.eye(dim))

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


@dataclass
class IterationStats:
    iteration: int
    scores: list[float]
    gamma: float
    elites: list[int]
    nu: np.ndarray
    c_min: list[int | None] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def mean_score(self) -> float:
        return float(np.mean(self.scores))

    @property
    def elite_mean_score(self) -> float:
        return float(np.mean([self.scores[j] for j in self.elites]))


def factor(sigma: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of sigma + jitter*I, growing the jitter on failure."""
    eye = np.eye(sigma.shape[0])
    jitter = JITTER_START
    while jitter <= JITTER_MAX:
        try:
            return np.linalg.cholesky(sigma + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 2
    raise CemError(
        f"covariance not factorizable even with jitter {JITTER_MAX:g}; "
        f"min eigenvalue {np.linalg.eigvalsh(sigma).min():.3g}"
    )


def sample_population(dist: GaussianOverTheta, n: int, rng: np.random.Generator) -> np.ndarray:
    """n x dim matrix of i.i.d. draws from N(mu, sigma)."""
    chol = factor(dist.sigma)
    z = rng.standard_normal((n, dist.dim))
    return dist.mu + z @ chol.T


def select_elites(scores, m: int) -> tuple[list[int], float]:
    """Indices of the m best scores (ties to the lower index) and the m-th best score."""
    order = sorted(range(len(scores)), key=lambda j: (-scores[j], j))
    elites = order[:m]
    return elites, float(scores[elites[-1]])


def update(dist: GaussianOverTheta, elites: np.ndarray, alpha: float,
           diagonal: bool = False) -> GaussianOverTheta:
    elites = np.asarray(elites, dtype=np.float64)
    m = elites.shape[0]
    if m < 2:
        raise ValueError("update needs at least two elites")
    nu = elites.mean(axis=0)
    dev = elites - nu
    if diagonal:
        cov = np.diag((dev * dev).sum(axis=0) / (m - 1))
    else:
        cov = dev.T @ dev / (m - 1)
        cov = 0.5 * (cov + cov.T)
    mu = (1 - alpha) * dist.mu + alpha * nu
    sigma = (1 - alpha) * dist.sigma + alpha * cov
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
        raise CemError("non-finite distribution after update")
    return GaussianOverTheta(mu, sigma)


def cem_step(dist, rng, t: int, evaluate: Callable, config: CemConfig):
    """One iteration: sample, evaluate, select, refit. Returns (new dist, stats, extra)."""
    start = time.perf_counter()
    thetas = sample_population(dist, config.population, rng)
    scores, extra = evaluate(t, thetas)
    elites, gamma = select_elites(scores, config.elite)
    new = update(dist, thetas[elites], config.alpha, config.diagonal)
    stats = IterationStats(t, [float(s) for s in scores], gamma, elites, thetas[elites].mean(axis=0))
    stats.wall_time = time.perf_counter() - start
    return new, stats, extra


def synthetic_objective(target, dims: slice = slice(0, 10)):
    """Score = -||theta[dims] - target||^2 for each row, bypassing the planner."""
    target = np.asarray(target, dtype=np.float64)

    def evaluate(t, thetas):
        d = thetas[:, dims] - target
        return list(-(d * d).sum(axis=1)), None

    return evaluate


def optimize(evaluate: Callable, config: CemConfig, dim: int = THETA_SIZE, seed: int | None = None):
    """Plain CEM loop without files; returns (final dist, list of IterationStats)."""
    rng = np.random.default_rng(derive_seed("cem", config.seed if seed is None else seed))
    dist = GaussianOverTheta.initial(dim)
    history = []
    for t in range(config.iterations):
        dist, stats, _ = cem_step(dist, rng, t, evaluate, config)
        history.append(stats)
    return dist, history


# -- planner-backed evaluation -------------------------------------------------


def training_batch(config: CemConfig, t: int):
    schedule = get_schedule(config.domain, config.schedule)
    return generate_batch(schedule, config.seed, batch=t, count=config.problems)


def evaluate_population(thetas, problems, tasks, config: CemConfig, profile: ScalingProfile,
                        t: int, workers: int | None = None):
    """Cost matrix (None for failures) and the run records, in (j, k) order."""
    budget = config.budget()
    jobs = []
    for j, theta in enumerate(thetas):
        contender = Contender(f"cand{j}", theta=tuple(float(x) for x in theta), profile=profile)
        for k, (p, task) in enumerate(zip(problems, tasks)):
            jobs.append(RunJob(p.problem_id, p.domain, task, contender, derive_seed("run", config.seed, t, j, k),
                               budget, config.heuristic, config.clock))
    records = run_jobs(jobs, workers)
    r = len(problems)
    costs = [[rec.cost if rec.solved else None for rec in records[j * r:(j + 1) * r]]
             for j in range(len(thetas))]
    return costs, records


def calibration_tasks(config: CemConfig):
    schedule = get_schedule(config.domain, config.schedule)
    return ground_generated(generate_batch(schedule, derive_seed("calibration", config.seed), 0))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def log_rows(t: int, records, r: int, stats: IterationStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for idx, rec in enumerate(records):
        j, k = divmod(idx, r)
        w.writerow([_fmt(v) for v in (
            "run", t, j, rec.problem_id, rec.outcome, rec.solved, rec.cost, rec.expansions,
            rec.wall_ms, None, None, None, None)])
    for j, s in enumerate(stats.scores):
        w.writerow([_fmt(v) for v in ("candidate", t, j, None, None, None, None, None, None, s,
                                       None, None, None)])
    w.writerow([_fmt(v) for v in ("summary", t, None, None, None, None, None, None, None, None,
                                   stats.gamma, stats.mean_score, stats.elite_mean_score)])
    return buf.getvalue()


def _digest(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def save_checkpoint(path: Path, iteration: int, dist: GaussianOverTheta, rng, log_bytes: int,
                    config: CemConfig, profile_checksum: str) -> None:
    payload = {
        "iteration": iteration,
        "mu": dist.mu.tolist(),
        "sigma": dist.sigma.tolist(),
        "rng_state": rng.bit_generator.state,
        "log_bytes": log_bytes,
        "config": asdict(config),
        "profile_checksum": profile_checksum,
    }
    body = {"format": CHECKPOINT_FORMAT, "payload": payload, "sha256": _digest(payload)}
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(body))
    os.replace(tmp, path)


def load_checkpoint(path: Path, config: CemConfig):
    try:
        body = json.loads(path.read_text())
        payload = body["payload"]
        ok = body.get("format") == CHECKPOINT_FORMAT and body.get("sha256") == _digest(payload)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise CemError(f"checkpoint {path} unreadable: {e}") from None
    if not ok:
        raise CemError(f"checkpoint {path} is corrupt (checksum mismatch); refusing to resume")
    # the iteration count may grow between runs; everything else must match
    if {**payload["config"], "iterations": 0} != {**asdict(config), "iterations": 0}:
        raise CemError(f"checkpoint {path} was written for a different configuration")
    dist = GaussianOverTheta(np.asarray(payload["mu"]), np.asarray(payload["sigma"]))
    rng = np.random.default_rng()
    rng.bit_generator.state = payload["rng_state"]
    return payload["iteration"], dist, rng, payload["log_bytes"], payload["profile_checksum"]


@dataclass
class TrainResult:
    mu: np.ndarray
    dist: GaussianOverTheta
    history: list[IterationStats]
    profile: ScalingProfile
    policy_path: Path | None = None


def train(config: CemConfig, out_dir=None, profile: ScalingProfile | None = None,
          resume: bool = False, workers: int | None = None,
          progress: Callable[[IterationStats], None] | None = None) -> TrainResult:
    """Run CEM training; with ``out_dir`` writes profile, log, checkpoint and policy files."""
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    ckpt = out / "checkpoint.json" if out else None
    log_path = out / "train_log.csv" if out else None
    profile_path = out / "profile.json" if out else None

    start_t = 0
    if resume:
        if ckpt is None or not ckpt.exists():
            raise CemError("nothing to resume: no checkpoint in the output directory")
        start_t, dist, rng, log_bytes, checksum = load_checkpoint(ckpt, config)
        profile = ScalingProfile.load(profile_path)
        if profile.checksum() != checksum:
            raise CemError("scaling profile changed since the checkpoint was written")
        with open(log_path, "r+b") as fh:
            fh.truncate(log_bytes)
    else:
        dist = GaussianOverTheta.initial()
        rng = np.random.default_rng(derive_seed("cem", config.seed))
        if profile is None:
            profile = calibrate(calibration_tasks(config), budget=config.budget(),
                                seed=config.seed, clock=config.clock, heuristic=config.heuristic,
                                provenance={"domain": config.domain, "schedule": config.schedule})
        if out is not None:
            profile.save(profile_path)
            log_path.write_text(",".join(LOG_FIELDS) + "\n")
            save_checkpoint(ckpt, 0, dist, rng, log_path.stat().st_size, config, profile.checksum())

    history = []
    for t in range(start_t, config.iterations):
        try:
            problems = training_batch(config, t)
            tasks = ground_generated(problems)
        except Exception as e:
            raise CemError(f"iteration {t}: problem generation failed: {e}") from e
        records_box = {}

        def evaluate(t_, thetas):
            costs, records = evaluate_population(thetas, problems, tasks, config, profile, t_, workers)
            records_box["records"] = records
            records_box["costs"] = costs
            return ipc_scores(costs), None

        dist, stats, _ = cem_step(dist, rng, t, evaluate, config)
        costs = records_box["costs"]
        stats.c_min = [min((row[k] for row in costs if row[k] is not None), default=None)
                       for k in range(len(problems))]
        history.append(stats)
        if out is not None:
            with open(log_path, "a") as fh:
                fh.write(log_rows(t, records_box["records"], len(problems), stats))
            save_checkpoint(ckpt, t + 1, dist, rng, log_path.stat().st_size, config, profile.checksum())
        if progress:
            progress(stats)

    policy_path = None
    if out is not None:
        policy_path = out / "policy.json"
        PolicyFile(dist.mu.copy(), "profile.json", profile.checksum(),
                   {"trainer": asdict(config), "iterations_done": config.iterations}).save(policy_path)
    return TrainResult(dist.mu.copy(), dist, history, profile, policy_path)
