"""Delete-relaxation heuristics: hFF, hadd, hmax and goal-count.

The public functions return ``math.inf`` when the goal is unreachable even
under the delete relaxation. Search code uses ``make_evaluator`` directly and
works with the kernel's raw ``-1`` sentinel instead.
"""

from __future__ import annotations

import math

from .kernels import HEURISTICS, INFINITE
from .task import GroundTask, StateSet

INF = math.inf


def make_evaluator(task: GroundTask, name: str = "ff"):
    """Fresh evaluator with its own scratch buffers (one per search run)."""
    return task.compiled.evaluator(name)


def _value(v: int) -> float | int:
    return INF if v == INFINITE else v


def h_max(task: GroundTask, s: StateSet):
    return _value(make_evaluator(task, "max").evaluate(s))


def h_add(task: GroundTask, s: StateSet):
    return _value(make_evaluator(task, "add").evaluate(s))


def h_goalcount(task: GroundTask, s: StateSet):
    return _value(make_evaluator(task, "goalcount").evaluate(s))


def h_ff(task: GroundTask, s: StateSet) -> tuple[float | int, tuple[int, ...]]:
    """hFF value and the extracted relaxed plan (operator indices, ascending)."""
    value, plan = make_evaluator(task, "ff").relaxed_plan(s)
    return _value(value), tuple(plan)


__all__ = ["HEURISTICS", "INF", "h_add", "h_ff", "h_goalcount", "h_max", "make_evaluator"]
