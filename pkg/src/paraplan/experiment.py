"""Desk-scale learning experiment: train a policy, then compare it with the presets."""

from __future__ import annotations

from dataclasses import dataclass

from .cem import CemConfig, train
from .cli import evaluate, evaluation_problems
from .runner import Contender
from .search.engine import Budget
from .search.params import PRESETS
from .seeding import derive_seed

BASELINES = ("gbfs", "eps-greedy", "rw", "local", "mixed")


@dataclass
class ExperimentResult:
    master_seed: int
    sums: dict[str, float]
    records: list
    mu: list

    @property
    def learned(self) -> float:
        return self.sums["learned"]

    def best_baseline(self) -> tuple[str, float]:
        name = max(BASELINES, key=lambda b: (self.sums[b], b))
        return name, self.sums[name]


def desk_config(master_seed: int, **overrides) -> CemConfig:
    base = dict(iterations=15, problems=10, population=16, elite=4, alpha=0.7, time_limit=5.0,
                domain="transport-lite", schedule="desk", seed=derive_seed("train", master_seed))
    base.update(overrides)
    return CemConfig(**base)


def learning_effect(master_seed: int, config: CemConfig | None = None, batches: int = 3,
                    runs: int = 3, workers: int | None = None, out_dir=None) -> ExperimentResult:
    config = config or desk_config(master_seed)
    result = train(config, out_dir, workers=workers)
    learned = Contender("learned", theta=tuple(float(x) for x in result.mu), profile=result.profile)
    contenders = [learned] + [Contender(b, params=PRESETS[b]) for b in BASELINES]
    problems = evaluation_problems([f"{config.domain}:{config.schedule}"], batches,
                                   derive_seed("held-out", master_seed))
    records, rows, _ = evaluate(problems, contenders, runs, derive_seed("eval-runs", master_seed),
                                Budget(time_limit=config.time_limit), config.heuristic, config.clock,
                                workers)
    return ExperimentResult(master_seed, {c: total for c, _, total in rows}, records,
                            [float(x) for x in result.mu])
