"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--states 200]

Times heuristic evaluation and successor generation on states sampled by
random walks, then a full GBFS run per backend in a fresh interpreter (the
backend is fixed at import, so the search comparison needs a subprocess).
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from paraplan.generators import domain_text, generate
from paraplan.kernels import backends
from paraplan.runner import ground_text
from paraplan.search.engine import random_walk

PROBLEMS = [
    ("gripper", {"balls": 12}),
    ("blocksworld", {"blocks": 10}),
    ("transport-lite", {"cities": 12, "trucks": 2, "packages": 8}),
]

SEARCH_SNIPPET = """
import time
from paraplan.kernels import BACKEND
from paraplan.generators import domain_text, generate
from paraplan.runner import ground_text
from paraplan.search import Budget, preset, run
task = ground_text(domain_text({d!r}), generate({d!r}, {p!r}, 0), 0)
t = time.perf_counter()
out = run(task, preset("gbfs"), Budget(time_limit=None, max_expansions=2000), seed=0)
print(BACKEND, out.stats.expanded, time.perf_counter() - t)
"""


def sample_states(task, n, seed=0):
    rng = random.Random(seed)
    states = [task.init]
    while len(states) < n:
        states += random_walk(task, task.init, rng.randint(1, 30), rng)
    return states[:n]


def bench_kernels(task, states, repeat):
    rows = {}
    for name, mod in backends().items():
        ct = mod.CompiledTask(task)
        cells = {}
        for h in ("ff", "add", "max"):
            ev = ct.evaluator(h)
            t = min(timeit.repeat(lambda: [ev.evaluate(s) for s in states], number=1, repeat=repeat))
            cells[h] = t / len(states) * 1e6
        t = min(timeit.repeat(lambda: [ct.successors(s) for s in states], number=1, repeat=repeat))
        cells["succ"] = t / len(states) * 1e6
        rows[name] = cells
    return rows


def bench_search(domain, params):
    out = {}
    for name, flag in (("cython", "0"), ("python", "1")):
        env = dict(os.environ, PARAPLAN_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", SEARCH_SNIPPET.format(d=domain, p=params)],
                             env=env, capture_output=True, text=True, check=True)
        backend, expanded, secs = res.stdout.split()
        if backend == name:
            out[name] = (int(expanded), float(secs))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--states", type=int, default=200)
    args = ap.parse_args()
    print(f"{'problem':<28}{'backend':<9}{'ff us':>9}{'add us':>9}{'max us':>9}{'succ us':>9}")
    for domain, params in PROBLEMS:
        task = ground_text(domain_text(domain), generate(domain, params, 0), 0)
        label = f"{domain} ({len(task.operators)} ops)"
        rows = bench_kernels(task, sample_states(task, args.states), args.repeat)
        for name, c in rows.items():
            print(f"{label:<28}{name:<9}{c['ff']:>9.1f}{c['add']:>9.1f}{c['max']:>9.1f}{c['succ']:>9.1f}")
        if len(rows) == 2:
            print(f"{'':<28}{'speedup':<9}"
                  + "".join(f"{rows['python'][k] / rows['cython'][k]:>9.1f}" for k in ("ff", "add", "max", "succ")))
    print()
    print("GBFS, 2000 expansions max, fresh interpreter per backend")
    for domain, params in PROBLEMS:
        res = bench_search(domain, params)
        cells = "  ".join(f"{b}: {e} exp in {s:.2f}s" for b, (e, s) in res.items())
        print(f"  {domain:<16}{cells}")


if __name__ == "__main__":
    main()
