"""Instantiate action schemas over objects and build a ``GroundTask``."""

from __future__ import annotations

import itertools
from math import prod

from ..task import GroundOperator, GroundTask, make_state
from .syntax import ROOT_TYPE, Atom, DomainAst, PddlError, ProblemAst

DEFAULT_OPERATOR_CAP = 500_000


class TaskTooLarge(PddlError):
    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"task too large: {count} candidate operators exceed the cap of {cap}")


def objects_by_type(domain: DomainAst, problem: ProblemAst) -> dict[str, list[str]]:
    """Objects (constants included) of each type, subtypes folded in, sorted by name."""
    parent = domain.parent_map()
    members: dict[str, set[str]] = {t: set() for t in parent}
    members[ROOT_TYPE] = set()
    for obj, t in tuple(domain.constants) + tuple(problem.objects):
        seen = set()
        while True:
            members.setdefault(t, set()).add(obj)
            if t == ROOT_TYPE or t in seen:
                break
            seen.add(t)
            t = parent.get(t, ROOT_TYPE)
    return {t: sorted(objs) for t, objs in members.items()}


def fact_name(atom: Atom) -> str:
    return " ".join((atom.predicate,) + atom.args)


def _bind(atom: Atom, binding: dict[str, str]) -> str:
    return " ".join((atom.predicate,) + tuple(binding.get(a, a) for a in atom.args))


def candidate_count(domain: DomainAst, problem: ProblemAst) -> int:
    members = objects_by_type(domain, problem)
    return sum(prod(len(members.get(t, ())) for _, t in a.parameters) for a in domain.actions)


def ground(
    domain: DomainAst,
    problem: ProblemAst,
    operator_cap: int = DEFAULT_OPERATOR_CAP,
    seed: int | None = None,
) -> GroundTask:
    members = objects_by_type(domain, problem)
    total = candidate_count(domain, problem)
    if total > operator_cap:
        raise TaskTooLarge(total, operator_cap)

    numeric = {fact_name(f): v for f, v in problem.numeric_init}
    raw_ops = []
    for schema in domain.actions:
        names = [v for v, _ in schema.parameters]
        domains = [members.get(t, []) for _, t in schema.parameters]
        for combo in itertools.product(*domains):
            binding = dict(zip(names, combo))
            if schema.cost is None:
                cost = 1
            elif schema.cost.function is None:
                cost = schema.cost.value
            else:
                # resolved after pruning: unreachable instantiations need no value
                cost = _bind(schema.cost.function, binding)
            pre = {_bind(a, binding) for a in schema.precondition}
            add = {_bind(a, binding) for a in schema.add}
            dele = {_bind(a, binding) for a in schema.delete} - add
            raw_ops.append((" ".join((schema.name,) + combo), pre, add, dele, cost))

    # single relaxed-reachability pass from the initial state
    reached = {fact_name(a) for a in problem.init}
    waiting: dict[str, list[int]] = {}
    missing = []
    for i, (_, pre, _, _, _) in enumerate(raw_ops):
        need = [f for f in pre if f not in reached]
        missing.append(len(need))
        for f in need:
            waiting.setdefault(f, []).append(i)
    fired = [i for i, m in enumerate(missing) if m == 0]
    queue = []
    for i in fired:
        for f in raw_ops[i][2]:
            if f not in reached:
                reached.add(f)
                queue.append(f)
    while queue:
        f = queue.pop()
        for i in waiting.get(f, ()):
            missing[i] -= 1
            if missing[i] == 0:
                fired.append(i)
                for g in raw_ops[i][2]:
                    if g not in reached:
                        reached.add(g)
                        queue.append(g)

    goal_names = {fact_name(a) for a in problem.goal}
    facts = sorted(reached | goal_names)
    index = {f: i for i, f in enumerate(facts)}
    kept = sorted((raw_ops[i] for i in set(fired)), key=lambda op: op[0])
    for i, (name, pre, add, dele, cost) in enumerate(kept):
        if isinstance(cost, str):
            if cost not in numeric:
                raise PddlError(f"no initial value for cost term ({cost}) used by {name}")
            kept[i] = (name, pre, add, dele, numeric[cost])
    operators = tuple(
        GroundOperator(
            name,
            frozenset(index[f] for f in pre),
            frozenset(index[f] for f in add),
            frozenset(index[f] for f in dele if f in index),
            cost,
        )
        for name, pre, add, dele, cost in kept
    )
    init = make_state((index[fact_name(a)] for a in problem.init), len(facts))
    return GroundTask(
        tuple(facts), operators, init, frozenset(index[g] for g in goal_names),
        domain.name, problem.name, seed,
    )
