"""Independent reference implementations used as test oracles."""

import heapq
import math

from paraplan.heuristics import INF, make_evaluator
from paraplan.task import apply, applicable, state_facts


def _bits(facts):
    m = 0
    for f in facts:
        m |= 1 << f
    return m


def h_plus(task, s):
    """Optimal delete-relaxed plan cost by uniform-cost search over fact sets."""
    goal = _bits(task.goal)
    ops = [(_bits(o.pre), _bits(o.add), o.cost) for o in task.operators]
    start = _bits(state_facts(s))
    dist = {start: 0}
    heap = [(0, start)]
    while heap:
        g, v = heapq.heappop(heap)
        if g > dist[v]:
            continue
        if v & goal == goal:
            return g
        for pre, add, c in ops:
            if v & pre == pre and add & ~v:
                w = v | add
                if g + c < dist.get(w, math.inf):
                    dist[w] = g + c
                    heapq.heappush(heap, (g + c, w))
    return INF


def fixpoint(task, s, combine):
    """hmax / hadd by Bellman-Ford style iteration to a fixpoint."""
    cost = {f: (0 if f in set(state_facts(s)) else INF) for f in range(len(task.facts))}
    changed = True
    while changed:
        changed = False
        for o in task.operators:
            pre = combine([cost[f] for f in o.pre]) if o.pre else 0
            if pre == INF:
                continue
            for f in o.add:
                if pre + o.cost < cost[f]:
                    cost[f] = pre + o.cost
                    changed = True
    if not task.goal:
        return 0
    return combine([cost[f] for f in task.goal])


def relaxed_replay_reaches_goal(task, s, plan):
    facts = set(state_facts(s))
    todo = list(plan)
    progress = True
    while todo and progress:
        progress = False
        for o in list(todo):
            op = task.operators[o]
            if op.pre <= facts:
                facts |= op.add
                todo.remove(o)
                progress = True
    return not todo and task.goal <= facts


def reference_gbfs(task, heuristic="ff", max_expansions=None):
    """Textbook eager GBFS: open list ordered by (h, generation order), duplicate
    states dropped at generation, dead ends never queued, goal test on pop.

    Returns the popped states in order (the goal state last, if found).
    """
    h = make_evaluator(task, heuristic)
    dead = -1
    counter = 0
    h0 = h.evaluate(task.init)
    frontier = [] if h0 == dead else [(h0, counter, task.init)]
    seen = {task.init}
    popped = []
    while frontier:
        _, _, s = heapq.heappop(frontier)
        popped.append(s)
        if task.is_goal(s):
            break
        if max_expansions is not None and len(popped) > max_expansions:
            break
        for o in range(len(task.operators)):
            if not applicable(task, s, o):
                continue
            t = apply(task, s, o)
            if t in seen:
                continue
            seen.add(t)
            counter += 1
            ht = h.evaluate(t)
            if ht != dead:
                heapq.heappush(frontier, (ht, counter, t))
    return popped


def engine_expansions(search, trace):
    """States popped by the engine, read off its trace."""
    return [search.states[e[1]] for e in trace if e[0] == "expand"]
