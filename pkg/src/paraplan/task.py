"""Ground STRIPS tasks, states, transitions and plans.

States are packed bit-vectors stored as immutable ``bytes`` objects: fact ``i``
lives in byte ``i >> 3`` under mask ``1 << (i & 7)``. Being ``bytes`` they hash
cheaply, which the search relies on for duplicate detection, and the compiled
kernels can read them without copying.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

StateSet = bytes


class TaskError(ValueError):
    """Raised for malformed tasks or violated operator contracts."""


def state_width(n_facts: int) -> int:
    return (n_facts + 7) >> 3


def make_state(facts: Iterable[int], n_facts: int) -> StateSet:
    buf = bytearray(state_width(n_facts))
    for f in facts:
        if not 0 <= f < n_facts:
            raise TaskError(f"fact index {f} out of range 0..{n_facts - 1}")
        buf[f >> 3] |= 1 << (f & 7)
    return bytes(buf)


def has_fact(state: StateSet, f: int) -> bool:
    return bool(state[f >> 3] & (1 << (f & 7)))


def state_facts(state: StateSet) -> list[int]:
    out = []
    for i, byte in enumerate(state):
        while byte:
            low = byte & -byte
            out.append((i << 3) + low.bit_length() - 1)
            byte ^= low
    return out


@dataclass(frozen=True)
class GroundOperator:
    name: str
    pre: frozenset[int]
    add: frozenset[int]
    delete: frozenset[int]
    cost: int = 1

    def __post_init__(self):
        if self.cost < 0:
            raise TaskError(f"operator {self.name!r} has negative cost {self.cost}")
        if self.add & self.delete:
            # delete-then-add: facts both deleted and added end up true
            object.__setattr__(self, "delete", self.delete - self.add)


@dataclass(frozen=True)
class GroundTask:
    facts: tuple[str, ...]
    operators: tuple[GroundOperator, ...]
    init: StateSet
    goal: frozenset[int]
    domain_name: str = ""
    problem_name: str = ""
    seed: int | None = None

    def __post_init__(self):
        n = len(self.facts)
        if len(self.init) != state_width(n):
            raise TaskError("initial state width does not match fact count")
        if n % 8 and self.init[-1] >> (n % 8):
            raise TaskError("initial state sets facts beyond the fact table")
        names = set()
        for op in self.operators:
            if op.name in names:
                raise TaskError(f"duplicate operator name {op.name!r}")
            names.add(op.name)
            for f in itertools.chain(op.pre, op.add, op.delete):
                if not 0 <= f < n:
                    raise TaskError(f"operator {op.name!r} references fact {f} >= {n}")
        for f in self.goal:
            if not 0 <= f < n:
                raise TaskError(f"goal references fact {f} >= {n}")

    @property
    def n_facts(self) -> int:
        return len(self.facts)

    @cached_property
    def compiled(self):
        """Kernel-side representation, built lazily and never pickled."""
        from .kernels import CompiledTask

        return CompiledTask(self)

    @cached_property
    def goal_state(self) -> StateSet:
        return make_state(self.goal, self.n_facts)

    def __getstate__(self):
        state = dict(self.__dict__)
        state.pop("compiled", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)

    def is_goal(self, s: StateSet) -> bool:
        return all(has_fact(s, f) for f in self.goal)

    def fact_index(self, name: str) -> int:
        return self._fact_ids[name]

    @cached_property
    def _fact_ids(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.facts)}

    @cached_property
    def operator_ids(self) -> dict[str, int]:
        return {op.name: i for i, op in enumerate(self.operators)}


@dataclass(frozen=True)
class Plan:
    steps: tuple[int, ...]
    cost: int

    @classmethod
    def from_steps(cls, task: GroundTask, steps: Sequence[int]) -> "Plan":
        return cls(tuple(steps), sum(task.operators[o].cost for o in steps))

    def __len__(self):
        return len(self.steps)


@dataclass
class ValidationReport:
    ok: bool
    final_state: StateSet
    failed_step: int | None = None
    reason: str = ""
    cost: int = 0


def applicable(task: GroundTask, s: StateSet, o: int) -> bool:
    return all(has_fact(s, f) for f in task.operators[o].pre)


def apply(task: GroundTask, s: StateSet, o: int) -> StateSet:
    op = task.operators[o]
    if not applicable(task, s, o):
        raise TaskError(f"operator {op.name!r} is not applicable")
    buf = bytearray(s)
    for f in op.delete:
        buf[f >> 3] &= ~(1 << (f & 7)) & 0xFF
    for f in op.add:
        buf[f >> 3] |= 1 << (f & 7)
    return bytes(buf)


def successors(task: GroundTask, s: StateSet) -> list[tuple[int, StateSet]]:
    """Applicable operators in ascending index order with their successor states."""
    return task.compiled.successors(s)


def validate_plan(task: GroundTask, plan: Plan | Sequence[int]) -> ValidationReport:
    steps = plan.steps if isinstance(plan, Plan) else tuple(plan)
    s = task.init
    cost = 0
    for i, o in enumerate(steps):
        if not 0 <= o < len(task.operators):
            return ValidationReport(False, s, i, f"operator index {o} out of range", cost)
        if not applicable(task, s, o):
            return ValidationReport(
                False, s, i, f"precondition of {task.operators[o].name!r} unsatisfied", cost
            )
        s = apply(task, s, o)
        cost += task.operators[o].cost
    if not task.is_goal(s):
        return ValidationReport(False, s, len(steps), "goal unsatisfied", cost)
    return ValidationReport(True, s, None, "", cost)


class OracleOverflow(RuntimeError):
    """The brute-force oracle hit its state limit before deciding the task."""


def brute_force_optimal(task: GroundTask, limit: int = 200_000) -> Plan | None:
    """Minimum-cost plan by uniform-cost search over the whole state space.

    Returns ``None`` when the task is unsolvable and raises ``OracleOverflow``
    when more than ``limit`` states would have to be expanded.
    """
    ops = task.operators
    counter = itertools.count()
    frontier = [(0, next(counter), task.init)]
    best = {task.init: 0}
    parent: dict[StateSet, tuple[StateSet, int] | None] = {task.init: None}
    closed = set()
    while frontier:
        g, _, s = heapq.heappop(frontier)
        if s in closed:
            continue
        if task.is_goal(s):
            steps = []
            while parent[s] is not None:
                s, o = parent[s]
                steps.append(o)
            steps.reverse()
            return Plan(tuple(steps), g)
        closed.add(s)
        if len(closed) > limit:
            raise OracleOverflow(f"more than {limit} states expanded")
        for o, t in successors(task, s):
            ng = g + ops[o].cost
            if t not in closed and ng < best.get(t, ng + 1):
                best[t] = ng
                parent[t] = (s, o)
                heapq.heappush(frontier, (ng, next(counter), t))
    return None


# -- text formats -----------------------------------------------------------

DUMP_HEADER = "ground-task v1"


def _ints(xs) -> str:
    return " ".join(str(x) for x in sorted(xs))


def dump_task(task: GroundTask) -> str:
    """Canonical line-oriented dump used for golden files and ``--dump-ground``."""
    lines = [
        DUMP_HEADER,
        f"domain {task.domain_name}",
        f"problem {task.problem_name}",
        f"seed {'-' if task.seed is None else task.seed}",
        f"facts {task.n_facts}",
    ]
    lines += [f"{i} {name}" for i, name in enumerate(task.facts)]
    lines.append(f"operators {len(task.operators)}")
    for i, op in enumerate(task.operators):
        lines.append(
            f"{i} {op.name} | cost {op.cost} | pre {_ints(op.pre)} | add {_ints(op.add)} | del {_ints(op.delete)}"
        )
    lines.append(f"init {_ints(state_facts(task.init))}")
    lines.append(f"goal {_ints(task.goal)}")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def load_task(text: str) -> GroundTask:
    lines = text.splitlines()
    if not lines or lines[0] != DUMP_HEADER:
        raise TaskError("not a ground-task dump")

    def field_value(line: str, key: str) -> str:
        if not line.startswith(key):
            raise TaskError(f"expected {key!r}, got {line!r}")
        return line[len(key):].strip()

    domain = field_value(lines[1], "domain")
    problem = field_value(lines[2], "problem")
    seed_text = field_value(lines[3], "seed")
    n = int(field_value(lines[4], "facts"))
    facts = tuple(line.split(" ", 1)[1] for line in lines[5 : 5 + n])
    pos = 5 + n
    n_ops = int(field_value(lines[pos], "operators"))
    ops = []
    for line in lines[pos + 1 : pos + 1 + n_ops]:
        head, cost, pre, add, dele = (part.strip() for part in line.split("|"))
        sets = [frozenset(int(x) for x in part.split()[1:]) for part in (pre, add, dele)]
        ops.append(GroundOperator(head.split(" ", 1)[1], sets[0], sets[1], sets[2], int(cost.split()[1])))
    pos += 1 + n_ops
    init = [int(x) for x in field_value(lines[pos], "init").split()]
    goal = frozenset(int(x) for x in field_value(lines[pos + 1], "goal").split())
    return GroundTask(
        facts, tuple(ops), make_state(init, n), goal, domain, problem,
        None if seed_text == "-" else int(seed_text),
    )


def format_plan(task: GroundTask, plan: Plan) -> str:
    lines = [f"({task.operators[o].name})" for o in plan.steps]
    unit = all(task.operators[o].cost == 1 for o in plan.steps)
    lines.append(f"; cost = {plan.cost} ({'unit cost' if unit else 'general cost'})")
    return "\n".join(lines) + "\n"


def parse_plan(task: GroundTask, text: str) -> Plan:
    steps = []
    for raw in text.splitlines():
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise TaskError(f"malformed plan line {raw!r}")
        name = " ".join(line[1:-1].split())
        try:
            steps.append(task.operator_ids[name])
        except KeyError:
            raise TaskError(f"unknown operator {name!r}") from None
    return Plan.from_steps(task, steps)


@dataclass
class TaskBuilder:
    """Convenience for hand-built tasks in tests and examples."""

    facts: list[str] = field(default_factory=list)
    operators: list[GroundOperator] = field(default_factory=list)

    def fact(self, name: str) -> int:
        self.facts.append(name)
        return len(self.facts) - 1

    def op(self, name, pre=(), add=(), delete=(), cost=1) -> int:
        self.operators.append(
            GroundOperator(name, frozenset(pre), frozenset(add), frozenset(delete), cost)
        )
        return len(self.operators) - 1

    def build(self, init=(), goal=(), name="handmade") -> GroundTask:
        n = len(self.facts)
        return GroundTask(
            tuple(self.facts), tuple(self.operators), make_state(init, n), frozenset(goal), name, name
        )
