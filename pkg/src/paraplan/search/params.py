"""Search parameters and the fixed baseline presets."""

from __future__ import annotations

import math
from dataclasses import dataclass

_KEYS = ("eps", "S", "R", "L", "C", "c")


@dataclass(frozen=True)
class SearchParams:
    """The six knobs of the parametrized search, held fixed within a cycle.

    epsilon: probability of expanding a uniformly random open node.
    stall: expansions without h_min progress needed before random walks start.
    walks: random walks launched after each expansion once stalled.
    walk_length: steps per random walk.
    cycle: expansions per global/local cycle.
    local_frac: share of the cycle spent on the local open list.
    """

    epsilon: float = 0.0
    stall: int = 0
    walks: int = 0
    walk_length: int = 0
    cycle: int = 200
    local_frac: float = 0.0

    def __post_init__(self):
        for name in ("epsilon", "local_frac"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("stall", "walks", "walk_length", "cycle"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    def split(self) -> tuple[int, int]:
        """(global steps, local steps) for one cycle; never more than ``cycle`` in total."""
        n_local = math.floor(self.local_frac * self.cycle)
        n_global = min(math.floor((1.0 - self.local_frac) * self.cycle), self.cycle - n_local)
        return n_global, n_local

    def canonical(self) -> str:
        return (
            f"eps={self.epsilon!r},S={self.stall},R={self.walks},L={self.walk_length},"
            f"C={self.cycle},c={self.local_frac!r}"
        )

    @classmethod
    def parse(cls, text: str) -> "SearchParams":
        """Parse ``eps=0.5,S=10,R=5,L=10,C=200,c=0.5``; missing keys keep defaults."""
        values = {}
        aliases = {"eps": "epsilon", "epsilon": "epsilon", "ε": "epsilon", "S": "stall",
                   "R": "walks", "L": "walk_length", "C": "cycle", "c": "local_frac"}
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, sep, value = part.partition("=")
            if not sep or key.strip() not in aliases:
                raise ValueError(f"bad parameter assignment {part!r}; keys are {', '.join(_KEYS)}")
            field = aliases[key.strip()]
            values[field] = float(value) if field in ("epsilon", "local_frac") else int(value)
        return cls(**values)


# C is irrelevant for c=0 configurations but must be positive so cycles make progress.
PRESETS = {
    "gbfs": SearchParams(epsilon=0.0, stall=0, walks=0, walk_length=0, cycle=200, local_frac=0.0),
    "eps-greedy": SearchParams(epsilon=0.5, stall=0, walks=0, walk_length=0, cycle=200, local_frac=0.0),
    "rw": SearchParams(epsilon=0.0, stall=10, walks=5, walk_length=10, cycle=200, local_frac=0.0),
    "local": SearchParams(epsilon=0.0, stall=0, walks=0, walk_length=0, cycle=200, local_frac=1.0),
    "mixed": SearchParams(epsilon=0.5, stall=10, walks=5, walk_length=10, cycle=200, local_frac=0.5),
}


def preset(name: str) -> SearchParams:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
