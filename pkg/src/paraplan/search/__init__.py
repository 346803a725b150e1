from .engine import (
    EXHAUSTED, SOLVED, TIMEOUT, Budget, ParametrizedSearch, SearchOutcome, SearchStats,
    format_trace, random_walk, run,
)
from .openlist import OpenList, pop
from .params import PRESETS, SearchParams, preset

__all__ = [
    "EXHAUSTED", "SOLVED", "TIMEOUT", "Budget", "OpenList", "PRESETS", "ParametrizedSearch",
    "SearchOutcome", "SearchParams", "SearchStats", "format_trace", "pop", "preset",
    "random_walk", "run",
]
