"""Pure-Python search kernels.

Mirrors ``_kernels.pyx`` operation for operation; both backends must return
identical values, supporters and successor orders. States cross the boundary
as packed little-endian ``bytes`` and are handled internally as Python ints.
"""

from heapq import heappop, heappush

INFINITE = -1

HEURISTICS = ("ff", "add", "max", "goalcount")


def _mask(facts):
    m = 0
    for f in facts:
        m |= 1 << f
    return m


class CompiledTask:
    def __init__(self, task):
        self.n_facts = task.n_facts
        self.n_ops = len(task.operators)
        self.width = (self.n_facts + 7) >> 3
        ops = task.operators
        self.pre = [tuple(sorted(o.pre)) for o in ops]
        self.add = [tuple(sorted(o.add)) for o in ops]
        self.cost = [o.cost for o in ops]
        self.pre_mask = [_mask(o.pre) for o in ops]
        self.add_mask = [_mask(o.add) for o in ops]
        self.keep_mask = [~_mask(o.delete) for o in ops]
        self.goal = tuple(sorted(task.goal))
        self.goal_mask = _mask(task.goal)
        self.pre_of = [[] for _ in range(self.n_facts)]
        for i, pre in enumerate(self.pre):
            for f in pre:
                self.pre_of[f].append(i)
        self.no_pre = [i for i, pre in enumerate(self.pre) if not pre]
        self.n_pre = [len(p) for p in self.pre]

    def _int(self, s):
        return int.from_bytes(s, "little")

    def _bytes(self, v):
        return v.to_bytes(self.width, "little")

    def is_goal(self, s):
        return (self._int(s) & self.goal_mask) == self.goal_mask

    def applicable_ops(self, s):
        v = self._int(s)
        return [i for i, m in enumerate(self.pre_mask) if v & m == m]

    def apply(self, s, o):
        v = self._int(s)
        return self._bytes((v & self.keep_mask[o]) | self.add_mask[o])

    def successors(self, s):
        v = self._int(s)
        keep, add, to_bytes, width = self.keep_mask, self.add_mask, int.to_bytes, self.width
        return [
            (i, to_bytes((v & keep[i]) | add[i], width, "little"))
            for i, m in enumerate(self.pre_mask)
            if v & m == m
        ]

    def evaluator(self, kind="ff"):
        return Evaluator(self, kind)


class Evaluator:
    """Delete-relaxation heuristic evaluator bound to one compiled task."""

    def __init__(self, ctask, kind="ff"):
        if kind not in HEURISTICS:
            raise ValueError(f"unknown heuristic {kind!r}; choose from {', '.join(HEURISTICS)}")
        self.ctask = ctask
        self.kind = kind
        self.evaluations = 0

    def _explore(self, s, use_max):
        """Generalized Dijkstra over the delete relaxation.

        Returns (fact costs, best supporters); unreached facts keep cost None.
        Stops once every goal fact is settled.
        """
        ct = self.ctask
        v = int.from_bytes(s, "little")
        cost = [None] * ct.n_facts
        sup = [-1] * ct.n_facts
        settled = [False] * ct.n_facts
        remaining = list(ct.n_pre)
        acc = [0] * ct.n_ops
        heap = []
        f = 0
        while v:
            if v & 1:
                cost[f] = 0
                heap.append((0, f))
            v >>= 1
            f += 1
        goals_left = sum(1 for g in ct.goal if cost[g] != 0)
        if goals_left == 0:
            return cost, sup

        def trigger(o, value):
            for p in ct.add[o]:
                if settled[p]:
                    continue
                c = cost[p]
                if c is None or value < c:
                    cost[p] = value
                    sup[p] = o
                    heappush(heap, (value, p))
                elif value == c and o < sup[p]:
                    sup[p] = o

        for o in ct.no_pre:
            trigger(o, ct.cost[o])
        goal_set = ct.goal_mask
        while heap:
            c, f = heappop(heap)
            if settled[f] or c != cost[f]:
                continue
            settled[f] = True
            if sup[f] != -1 and (goal_set >> f) & 1:
                goals_left -= 1
                if goals_left == 0:
                    break
            for o in ct.pre_of[f]:
                if use_max:
                    if c > acc[o]:
                        acc[o] = c
                else:
                    acc[o] += c
                remaining[o] -= 1
                if remaining[o] == 0:
                    trigger(o, acc[o] + ct.cost[o])
        return cost, sup

    def evaluate(self, s):
        self.evaluations += 1
        kind = self.kind
        if kind == "ff":
            return self._ff(s)[0]
        ct = self.ctask
        cost, sup = self._explore(s, kind != "add")
        total = 0
        for g in ct.goal:
            c = cost[g]
            if c is None:
                return INFINITE
            if kind == "add":
                total += c
            elif kind == "max":
                total = max(total, c)
            elif sup[g] != -1:
                total += 1
        return total

    def relaxed_plan(self, s):
        self.evaluations += 1
        return self._ff(s)

    def _ff(self, s):
        ct = self.ctask
        cost, sup = self._explore(s, False)
        stack = []
        for g in ct.goal:
            if cost[g] is None:
                return INFINITE, []
            if sup[g] != -1:
                stack.append(g)
        marked = set()
        done = set()
        total = 0
        while stack:
            p = stack.pop()
            if p in done:
                continue
            done.add(p)
            o = sup[p]
            if o not in marked:
                marked.add(o)
                total += ct.cost[o]
                for q in ct.pre[o]:
                    if sup[q] != -1 and q not in done:
                        stack.append(q)
        return total, sorted(marked)
