"""Search-state features and their per-domain max-scaling."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

FEATURE_NAMES = ("h0", "h_min", "elapsed", "stall", "generated", "unique", "expanded")
PROFILE_FORMAT = "paraplan-scaling/1"


@dataclass(frozen=True)
class FeatureVector:
    h0: float
    h_min: float
    elapsed: float
    stall: int
    generated: int
    unique: int
    expanded: int

    def values(self) -> tuple:
        return (self.h0, self.h_min, self.elapsed, self.stall, self.generated, self.unique, self.expanded)


@dataclass(frozen=True)
class ScalingProfile:
    maxima: tuple[float, ...]
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if len(self.maxima) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} divisors, got {len(self.maxima)}")
        if any(not m > 0 for m in self.maxima):
            raise ValueError("all scaling divisors must be positive")

    def to_json(self) -> str:
        body = {
            "format": PROFILE_FORMAT,
            "divisors": dict(zip(FEATURE_NAMES, (float(m) for m in self.maxima))),
            "provenance": self.provenance,
        }
        return json.dumps(body, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScalingProfile":
        body = json.loads(text)
        if body.get("format") != PROFILE_FORMAT:
            raise ValueError(f"not a scaling profile (format {body.get('format')!r})")
        div = body["divisors"]
        return cls(tuple(float(div[n]) for n in FEATURE_NAMES), body.get("provenance", {}))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "ScalingProfile":
        return cls.from_json(Path(path).read_text())

    def checksum(self) -> str:
        canon = ",".join(repr(float(m)) for m in self.maxima)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


UNIT_PROFILE = ScalingProfile((1.0,) * len(FEATURE_NAMES), {"source": "unit"})


def scale(fv: FeatureVector, profile: ScalingProfile) -> list[float]:
    """Element-wise division by the profile maxima; values above 1 are kept."""
    return [v / m for v, m in zip(fv.values(), profile.maxima)]


def calibrate(tasks, params=None, budget=None, seed: int = 0, clock: str = "virtual",
              heuristic: str = "ff", provenance: dict | None = None) -> ScalingProfile:
    """Per-feature maxima observed while running fixed parameters on ``tasks``.

    Every cycle-start snapshot and the final statistics of every run count.
    Maxima of zero become 1.
    """
    from .search.engine import Budget, ParametrizedSearch
    from .search.params import preset
    from .seeding import derive_seed

    tasks = list(tasks)
    if not tasks:
        raise ValueError("calibration needs at least one problem")
    params = params or preset("mixed")
    budget = budget or Budget()
    maxima = [0.0] * len(FEATURE_NAMES)
    started = 0
    for k, task in enumerate(tasks):
        snaps: list[FeatureVector] = []

        def recorder(fv, _snaps=snaps):
            _snaps.append(fv)
            return params

        search = ParametrizedSearch(
            task, recorder, heuristic=heuristic, seed=derive_seed("calibrate", seed, k),
            budget=budget, clock=clock,
        )
        try:
            search.run()
        except Exception:
            continue
        started += 1
        snaps.append(search.snapshot())
        for fv in snaps:
            for i, v in enumerate(fv.values()):
                if v > maxima[i]:
                    maxima[i] = float(v)
    if not started:
        raise RuntimeError("no calibration run could be initialized")
    info = {"params": params.canonical(), "seed": seed, "problems": len(tasks), "clock": clock,
            "heuristic": heuristic}
    info.update(provenance or {})
    return ScalingProfile(tuple(m if m > 0 else 1.0 for m in maxima), info)


__all__ = ["FEATURE_NAMES", "FeatureVector", "ScalingProfile", "UNIT_PROFILE", "calibrate", "scale"]
