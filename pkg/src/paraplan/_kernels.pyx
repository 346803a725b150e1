# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels: successor generation and delete-relaxation heuristics.

Behaviour is pinned to ``_pykernels``; the test-suite runs both backends
against the same fixtures.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize, PyBytes_AS_STRING
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset

INFINITE = -1
HEURISTICS = ("ff", "add", "max", "goalcount")

cdef long long UNREACHED = -1


cdef int* _csr(list rows, int* total_out, int** start_out) except NULL:
    cdef int n = len(rows), total = 0, i, k = 0
    for row in rows:
        total += len(row)
    cdef int* start = <int*> malloc((n + 1) * sizeof(int))
    cdef int* data = <int*> malloc((total + 1) * sizeof(int))
    if start == NULL or data == NULL:
        raise MemoryError()
    for i in range(n):
        start[i] = k
        for v in rows[i]:
            data[k] = v
            k += 1
    start[n] = k
    total_out[0] = total
    start_out[0] = start
    return data


cdef class CompiledTask:
    cdef public int n_facts, n_ops, width
    cdef int n_goal, n_no_pre, total_add
    cdef int *pre_start
    cdef int *pre_data
    cdef int *add_start
    cdef int *add_data
    cdef int *del_start
    cdef int *del_data
    cdef int *preof_start
    cdef int *preof_data
    cdef int *n_pre
    cdef int *goal
    cdef int *no_pre
    cdef char *goal_flag
    cdef long long *cost

    def __cinit__(self):
        self.pre_start = self.pre_data = NULL
        self.add_start = self.add_data = NULL
        self.del_start = self.del_data = NULL
        self.preof_start = self.preof_data = NULL
        self.n_pre = self.goal = self.no_pre = NULL
        self.goal_flag = NULL
        self.cost = NULL

    def __init__(self, task):
        cdef int i, total
        ops = task.operators
        self.n_facts = task.n_facts
        self.n_ops = len(ops)
        self.width = (self.n_facts + 7) >> 3
        pre = [sorted(o.pre) for o in ops]
        add = [sorted(o.add) for o in ops]
        self.pre_data = _csr(pre, &total, &self.pre_start)
        self.add_data = _csr(add, &self.total_add, &self.add_start)
        self.del_data = _csr([sorted(o.delete) for o in ops], &total, &self.del_start)
        preof = [[] for _ in range(self.n_facts)]
        for i in range(self.n_ops):
            for f in pre[i]:
                preof[f].append(i)
        self.preof_data = _csr(preof, &total, &self.preof_start)
        no_pre = [i for i in range(self.n_ops) if not pre[i]]
        goal = sorted(task.goal)
        self.n_goal = len(goal)
        self.n_no_pre = len(no_pre)
        self.n_pre = <int*> malloc((self.n_ops + 1) * sizeof(int))
        self.goal = <int*> malloc((self.n_goal + 1) * sizeof(int))
        self.no_pre = <int*> malloc((self.n_no_pre + 1) * sizeof(int))
        self.cost = <long long*> malloc((self.n_ops + 1) * sizeof(long long))
        self.goal_flag = <char*> malloc(self.n_facts + 1)
        if (self.n_pre == NULL or self.goal == NULL or self.no_pre == NULL or self.cost == NULL
                or self.goal_flag == NULL):
            raise MemoryError()
        memset(self.goal_flag, 0, self.n_facts + 1)
        for i in range(self.n_ops):
            self.n_pre[i] = len(pre[i])
            self.cost[i] = ops[i].cost
        for i in range(self.n_goal):
            self.goal[i] = goal[i]
            self.goal_flag[goal[i]] = 1
        for i in range(self.n_no_pre):
            self.no_pre[i] = no_pre[i]

    def __dealloc__(self):
        free(self.pre_start); free(self.pre_data)
        free(self.add_start); free(self.add_data)
        free(self.del_start); free(self.del_data)
        free(self.preof_start); free(self.preof_data)
        free(self.n_pre); free(self.goal); free(self.no_pre); free(self.cost); free(self.goal_flag)

    cdef inline bint _applicable(self, const unsigned char* s, int o) nogil:
        cdef int k, f
        for k in range(self.pre_start[o], self.pre_start[o + 1]):
            f = self.pre_data[k]
            if not (s[f >> 3] & (1 << (f & 7))):
                return False
        return True

    cdef bytes _apply(self, const unsigned char* s, int o):
        cdef bytes out = PyBytes_FromStringAndSize(NULL, self.width)
        cdef unsigned char* t = <unsigned char*> PyBytes_AS_STRING(out)
        cdef int k, f
        memcpy(t, s, self.width)
        for k in range(self.del_start[o], self.del_start[o + 1]):
            f = self.del_data[k]
            t[f >> 3] &= ~(1 << (f & 7))
        for k in range(self.add_start[o], self.add_start[o + 1]):
            f = self.add_data[k]
            t[f >> 3] |= 1 << (f & 7)
        return out

    def is_goal(self, bytes state):
        cdef const unsigned char* s = <const unsigned char*> PyBytes_AS_STRING(state)
        cdef int i, f
        for i in range(self.n_goal):
            f = self.goal[i]
            if not (s[f >> 3] & (1 << (f & 7))):
                return False
        return True

    def applicable_ops(self, bytes state):
        cdef const unsigned char* s = <const unsigned char*> PyBytes_AS_STRING(state)
        cdef int o
        return [o for o in range(self.n_ops) if self._applicable(s, o)]

    def apply(self, bytes state, int o):
        return self._apply(<const unsigned char*> PyBytes_AS_STRING(state), o)

    def successors(self, bytes state):
        cdef const unsigned char* s = <const unsigned char*> PyBytes_AS_STRING(state)
        cdef int o
        cdef list out = []
        for o in range(self.n_ops):
            if self._applicable(s, o):
                out.append((o, self._apply(s, o)))
        return out

    def evaluator(self, kind="ff"):
        return Evaluator(self, kind)


cdef class Evaluator:
    """Delete-relaxation heuristic evaluator with per-run scratch buffers."""

    cdef readonly CompiledTask ctask
    cdef readonly str kind
    cdef public long long evaluations
    cdef int mode
    cdef long long *fcost
    cdef int *sup
    cdef char *settled
    cdef int *remaining
    cdef long long *acc
    cdef long long *heap_cost
    cdef int *heap_fact
    cdef int heap_size, heap_cap
    cdef char *marked_op
    cdef char *done
    cdef int *stack

    def __cinit__(self):
        self.fcost = NULL
        self.sup = self.remaining = self.heap_fact = self.stack = NULL
        self.settled = self.marked_op = self.done = NULL
        self.acc = self.heap_cost = NULL

    def __init__(self, CompiledTask ctask, kind="ff"):
        if kind not in HEURISTICS:
            raise ValueError(f"unknown heuristic {kind!r}; choose from {', '.join(HEURISTICS)}")
        self.ctask = ctask
        self.kind = kind
        self.mode = HEURISTICS.index(kind)
        self.evaluations = 0
        cdef int nf = ctask.n_facts + 1, no = ctask.n_ops + 1
        self.heap_cap = ctask.n_facts + ctask.total_add + 1
        self.fcost = <long long*> malloc(nf * sizeof(long long))
        self.sup = <int*> malloc(nf * sizeof(int))
        self.settled = <char*> malloc(nf)
        self.done = <char*> malloc(nf)
        self.stack = <int*> malloc(nf * sizeof(int))
        self.remaining = <int*> malloc(no * sizeof(int))
        self.acc = <long long*> malloc(no * sizeof(long long))
        self.marked_op = <char*> malloc(no)
        self.heap_cost = <long long*> malloc(self.heap_cap * sizeof(long long))
        self.heap_fact = <int*> malloc(self.heap_cap * sizeof(int))
        if (self.fcost == NULL or self.sup == NULL or self.settled == NULL or self.done == NULL
                or self.stack == NULL or self.remaining == NULL or self.acc == NULL
                or self.marked_op == NULL or self.heap_cost == NULL or self.heap_fact == NULL):
            raise MemoryError()

    def __dealloc__(self):
        free(self.fcost); free(self.sup); free(self.settled); free(self.done); free(self.stack)
        free(self.remaining); free(self.acc); free(self.marked_op)
        free(self.heap_cost); free(self.heap_fact)

    # binary heap keyed by (cost, fact), same order as heapq on tuples
    cdef inline bint _less(self, int i, int j) nogil:
        if self.heap_cost[i] != self.heap_cost[j]:
            return self.heap_cost[i] < self.heap_cost[j]
        return self.heap_fact[i] < self.heap_fact[j]

    cdef inline void _swap(self, int i, int j) nogil:
        cdef long long c = self.heap_cost[i]
        cdef int f = self.heap_fact[i]
        self.heap_cost[i] = self.heap_cost[j]
        self.heap_fact[i] = self.heap_fact[j]
        self.heap_cost[j] = c
        self.heap_fact[j] = f

    cdef inline void _push(self, long long c, int f) nogil:
        cdef int i = self.heap_size, parent
        self.heap_size += 1
        self.heap_cost[i] = c
        self.heap_fact[i] = f
        while i > 0:
            parent = (i - 1) >> 1
            if self._less(i, parent):
                self._swap(i, parent)
                i = parent
            else:
                break

    cdef inline void _pop(self, long long* c, int* f) nogil:
        cdef int i = 0, l, r, m, n
        c[0] = self.heap_cost[0]
        f[0] = self.heap_fact[0]
        self.heap_size -= 1
        n = self.heap_size
        if n == 0:
            return
        self.heap_cost[0] = self.heap_cost[n]
        self.heap_fact[0] = self.heap_fact[n]
        while True:
            l = 2 * i + 1
            r = l + 1
            m = i
            if l < n and self._less(l, m):
                m = l
            if r < n and self._less(r, m):
                m = r
            if m == i:
                break
            self._swap(i, m)
            i = m

    cdef inline void _trigger(self, int o, long long value):
        cdef CompiledTask ct = self.ctask
        cdef int k, p
        cdef long long c
        for k in range(ct.add_start[o], ct.add_start[o + 1]):
            p = ct.add_data[k]
            if self.settled[p]:
                continue
            c = self.fcost[p]
            if c == UNREACHED or value < c:
                self.fcost[p] = value
                self.sup[p] = o
                self._push(value, p)
            elif value == c and o < self.sup[p]:
                self.sup[p] = o

    cdef void _explore(self, const unsigned char* s, bint use_max):
        cdef CompiledTask ct = self.ctask
        cdef int f, i, k, o, goals_left = 0
        cdef long long c
        self.heap_size = 0
        for f in range(ct.n_facts):
            self.sup[f] = -1
            self.settled[f] = 0
            if s[f >> 3] & (1 << (f & 7)):
                self.fcost[f] = 0
                self._push(0, f)
            else:
                self.fcost[f] = UNREACHED
        for i in range(ct.n_goal):
            if self.fcost[ct.goal[i]] != 0:
                goals_left += 1
        if goals_left == 0:
            return
        for o in range(ct.n_ops):
            self.remaining[o] = ct.n_pre[o]
            self.acc[o] = 0
        for i in range(ct.n_no_pre):
            o = ct.no_pre[i]
            self._trigger(o, ct.cost[o])
        while self.heap_size > 0:
            self._pop(&c, &f)
            if self.settled[f] or c != self.fcost[f]:
                continue
            self.settled[f] = 1
            if self.sup[f] != -1 and ct.goal_flag[f]:
                goals_left -= 1
                if goals_left == 0:
                    break
            for k in range(ct.preof_start[f], ct.preof_start[f + 1]):
                o = ct.preof_data[k]
                if use_max:
                    if c > self.acc[o]:
                        self.acc[o] = c
                else:
                    self.acc[o] += c
                self.remaining[o] -= 1
                if self.remaining[o] == 0:
                    self._trigger(o, self.acc[o] + ct.cost[o])

    cdef long long _ff(self, const unsigned char* s, list plan_out):
        cdef CompiledTask ct = self.ctask
        cdef int i, g, p, o, k, q, top = 0
        cdef long long total = 0
        self._explore(s, False)
        for i in range(ct.n_goal):
            if self.fcost[ct.goal[i]] == UNREACHED:
                return UNREACHED
        memset(self.done, 0, ct.n_facts)
        memset(self.marked_op, 0, ct.n_ops)
        # each fact is pushed at most once because ``done`` is set on push
        for i in range(ct.n_goal):
            g = ct.goal[i]
            if self.sup[g] != -1 and not self.done[g]:
                self.done[g] = 1
                self.stack[top] = g
                top += 1
        while top > 0:
            top -= 1
            p = self.stack[top]
            o = self.sup[p]
            if not self.marked_op[o]:
                self.marked_op[o] = 1
                total += ct.cost[o]
                for k in range(ct.pre_start[o], ct.pre_start[o + 1]):
                    q = ct.pre_data[k]
                    if self.sup[q] != -1 and not self.done[q]:
                        self.done[q] = 1
                        self.stack[top] = q
                        top += 1
        if plan_out is not None:
            for o in range(ct.n_ops):
                if self.marked_op[o]:
                    plan_out.append(o)
        return total

    def evaluate(self, bytes state):
        cdef const unsigned char* s = <const unsigned char*> PyBytes_AS_STRING(state)
        cdef CompiledTask ct = self.ctask
        cdef long long total = 0, c
        cdef int i, g
        self.evaluations += 1
        if self.mode == 0:
            return self._ff(s, None)
        self._explore(s, self.mode != 1)
        for i in range(ct.n_goal):
            g = ct.goal[i]
            c = self.fcost[g]
            if c == UNREACHED:
                return INFINITE
            if self.mode == 1:
                total += c
            elif self.mode == 2:
                if c > total:
                    total = c
            elif self.sup[g] != -1:
                total += 1
        return total

    def relaxed_plan(self, bytes state):
        cdef list plan = []
        self.evaluations += 1
        cdef long long h = self._ff(<const unsigned char*> PyBytes_AS_STRING(state), plan)
        if h == UNREACHED:
            return INFINITE, []
        return h, plan
