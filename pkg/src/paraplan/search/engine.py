"""The parametrized planner: interleaved global/local greedy best-first search
with epsilon-random expansion and stall-triggered random walks."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Union

from ..features import FeatureVector
from ..heuristics import make_evaluator
from ..kernels import INFINITE
from ..task import GroundTask, Plan, StateSet
from .openlist import OpenList
from .params import SearchParams

SOLVED = "solved"
EXHAUSTED = "exhausted"
TIMEOUT = "timeout"

# one virtual tick per expansion or random-walk step
VIRTUAL_TICK = 0.001

ParamSource = Union[SearchParams, Callable[[FeatureVector], SearchParams]]


@dataclass(frozen=True)
class Budget:
    """Run limits. ``time_limit`` is measured on the run's clock (virtual or wall)."""

    time_limit: float | None = 5.0
    max_expansions: int | None = None
    wall_limit: float | None = None
    max_idle_cycles: int = 1000


@dataclass
class SearchStats:
    expanded: int = 0
    generated: int = 1
    unique: int = 1
    duplicates: int = 0
    dead_ends: int = 0
    evaluations: int = 0
    walk_steps: int = 0
    cycles: int = 0
    elapsed: float = 0.0
    wall_time: float = 0.0


@dataclass
class SearchOutcome:
    status: str
    plan: Plan | None
    stats: SearchStats
    h0: int
    reason: str = ""
    params_log: list = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


class _Stop(Exception):
    def __init__(self, status, reason=""):
        self.status = status
        self.reason = reason


def walk_with_ops(ctask, s: StateSet, length: int, rng: random.Random) -> list[tuple[int, StateSet]]:
    out = []
    cur = s
    for _ in range(length):
        ops = ctask.applicable_ops(cur)
        if not ops:
            break
        o = ops[rng.randrange(len(ops))]
        cur = ctask.apply(cur, o)
        out.append((o, cur))
    return out


def random_walk(task: GroundTask, s: StateSet, length: int, rng: random.Random) -> list[StateSet]:
    """States visited by a uniform random walk of up to ``length`` steps, excluding ``s``."""
    return [t for _, t in walk_with_ops(task.compiled, s, length, rng)]


class ParametrizedSearch:
    """One search run. Not reusable; build a new instance per run."""

    def __init__(
        self,
        task: GroundTask,
        params: ParamSource,
        *,
        heuristic: str = "ff",
        seed: int = 0,
        budget: Budget = Budget(),
        clock: str = "virtual",
        trace: list | None = None,
        check_ledger: bool = False,
    ):
        if clock not in ("virtual", "wall"):
            raise ValueError(f"clock must be 'virtual' or 'wall', got {clock!r}")
        self.task = task
        self.ctask = task.compiled
        self.evaluator = make_evaluator(task, heuristic)
        self.source = params
        self.rng = random.Random(seed)
        self.budget = budget
        self.clock = clock
        self.trace = trace
        self.check_ledger = check_ledger

        self.states: list[StateSet] = []
        self.parent: list[int] = []
        self.op: list[int] = []
        self.g: list[int] = []
        self.h: list[int] = []
        self.seen: dict[StateSet, int] = {}
        self.global_open = OpenList()
        self.local_open = OpenList()
        self.stats = SearchStats()
        self.params = params if isinstance(params, SearchParams) else None
        self.h0 = 0
        self.h_min = 0
        self.stall = 0
        self.ticks = 0
        self.cycle_index = -1
        self.params_log: list[tuple[int, SearchParams]] = []
        self._start = 0.0
        self._initialized = False

    # -- clock and features ---------------------------------------------------

    def elapsed(self) -> float:
        if self.clock == "virtual":
            return self.ticks * VIRTUAL_TICK
        return time.perf_counter() - self._start

    def snapshot(self) -> FeatureVector:
        st = self.stats
        return FeatureVector(
            self.h0, self.h_min, self.elapsed(), self.stall, st.generated, st.unique, st.expanded
        )

    # -- node bookkeeping -----------------------------------------------------

    def _new_node(self, s, parent, op, g, h):
        nid = len(self.states)
        self.states.append(s)
        self.parent.append(parent)
        self.op.append(op)
        self.g.append(g)
        self.h.append(h)
        self.seen[s] = nid
        return nid

    def _insert(self, s, parent, op, open_list):
        """Handle one generated state; returns the node id now standing for it."""
        st = self.stats
        st.generated += 1
        nid = self.seen.get(s)
        if nid is not None:
            st.duplicates += 1
            return nid
        h = self.evaluator.evaluate(s)
        st.evaluations += 1
        st.unique += 1
        nid = self._new_node(s, parent, op, self.g[parent] + self.task.operators[op].cost, h)
        if h == INFINITE:
            st.dead_ends += 1
            return nid
        if h < self.h_min:
            self.h_min = h
            self.stall = 0
        open_list.push(h, nid)
        return nid

    def extract_plan(self, nid: int) -> Plan:
        steps = []
        while self.parent[nid] >= 0:
            steps.append(self.op[nid])
            nid = self.parent[nid]
        steps.reverse()
        return Plan.from_steps(self.task, steps)

    def ledger_balanced(self) -> bool:
        st = self.stats
        lhs = len(self.global_open) + len(self.local_open) + st.expanded + st.duplicates + st.dead_ends
        return lhs == st.generated

    # -- budget -----------------------------------------------------------------

    def _check_budget(self):
        b = self.budget
        if b.time_limit is not None and self.elapsed() >= b.time_limit:
            raise _Stop(TIMEOUT, "time limit")
        if b.max_expansions is not None and self.stats.expanded >= b.max_expansions:
            raise _Stop(TIMEOUT, "expansion limit")
        if b.wall_limit is not None and time.perf_counter() - self._start >= b.wall_limit:
            raise _Stop(TIMEOUT, "wall-clock limit")

    # -- algorithm ----------------------------------------------------------------

    def initialize(self):
        self._start = time.perf_counter()
        s0 = self.task.init
        h0 = self.evaluator.evaluate(s0)
        self.stats.evaluations += 1
        self._new_node(s0, -1, -1, 0, h0)
        self.h0 = self.h_min = h0
        if h0 != INFINITE:
            self.global_open.push(h0, 0)
        else:
            self.stats.dead_ends += 1
        self._initialized = True

    def refresh_params(self) -> SearchParams:
        self.cycle_index += 1
        self.stats.cycles += 1
        if isinstance(self.source, SearchParams):
            self.params = self.source
        else:
            self.params = self.source(self.snapshot())
            self.params_log.append((self.cycle_index, self.params))
        if self.trace is not None:
            self.trace.append(("cycle", self.cycle_index, self.params.canonical()))
        return self.params

    def step(self, which: str):
        """One search step on the global or local list.

        Returns ``None`` while in progress, a ``Plan`` on success, and raises
        ``_Stop`` when the search must end.
        """
        if which == "global":
            open_list = self.global_open
            if not open_list:
                raise _Stop(EXHAUSTED, "global open list empty")
        else:
            open_list = self.local_open
            if not open_list:
                if not self.global_open:
                    raise _Stop(EXHAUSTED, "global open list empty")
                h, nid = self.global_open.pop_min()
                open_list.push(h, nid)
        p = self.params
        h, nid = open_list.pop(p.epsilon, self.rng)
        s = self.states[nid]
        if self.trace is not None:
            self.trace.append(("expand", nid, h, which, self.cycle_index))
        if self.ctask.is_goal(s):
            return self.extract_plan(nid)
        st = self.stats
        st.expanded += 1
        self.stall += 1
        self.ticks += 1
        insert = self._insert
        for o, t in self.ctask.successors(s):
            insert(t, nid, o, open_list)
        if self.stall > p.stall and p.walks > 0 and p.walk_length > 0:
            for _ in range(p.walks):
                prev = nid
                for o, t in walk_with_ops(self.ctask, s, p.walk_length, self.rng):
                    st.walk_steps += 1
                    self.ticks += 1
                    prev = insert(t, prev, o, open_list)
        if self.check_ledger and not self.ledger_balanced():
            raise AssertionError("search ledger out of balance")
        return None

    def _finish(self, status, plan=None, reason=""):
        self.stats.elapsed = self.elapsed()
        self.stats.wall_time = time.perf_counter() - self._start
        return SearchOutcome(status, plan, self.stats, self.h0, reason, self.params_log)

    def run(self) -> SearchOutcome:
        if not self._initialized:
            self.initialize()
        idle = 0
        try:
            self._check_budget()
            if not self.global_open:
                raise _Stop(EXHAUSTED, "initial state is a dead end")
            while True:
                before = self.stats.expanded
                p = self.refresh_params()
                n_global, n_local = p.split()
                for _ in range(n_global):
                    self._check_budget()
                    plan = self.step("global")
                    if plan is not None:
                        return self._finish(SOLVED, plan)
                if self.global_open:
                    h, nid = self.global_open.pop_min()
                    self.local_open.push(h, nid)
                for _ in range(n_local):
                    self._check_budget()
                    plan = self.step("local")
                    if plan is not None:
                        return self._finish(SOLVED, plan)
                self.local_open.merge_into(self.global_open)
                if self.stats.expanded == before:
                    if not self.global_open:
                        raise _Stop(EXHAUSTED, "global open list empty")
                    idle += 1
                    if idle >= self.budget.max_idle_cycles:
                        raise _Stop(TIMEOUT, "idle-cycle limit")
                    self._check_budget()
                else:
                    idle = 0
        except _Stop as stop:
            self.local_open.merge_into(self.global_open)
            return self._finish(stop.status, None, stop.reason)


def run(
    task: GroundTask,
    params: ParamSource,
    budget: Budget = Budget(),
    seed: int = 0,
    **kwargs,
) -> SearchOutcome:
    return ParametrizedSearch(task, params, budget=budget, seed=seed, **kwargs).run()


def format_trace(trace) -> str:
    lines = []
    params = ""
    for event in trace:
        if event[0] == "cycle":
            params = event[2]
            lines.append(f"cycle {event[1]} {params}")
        else:
            _, nid, h, which, cycle = event
            lines.append(f"expand node={nid} h={h} list={which} cycle={cycle} {params}")
    return "\n".join(lines) + ("\n" if lines else "")
