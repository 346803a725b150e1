import random

import pytest

from paraplan.generators import domain_text, generate
from paraplan.kernels import backends
from paraplan.runner import ground_text
from paraplan.task import GroundOperator, GroundTask, make_state

BACKENDS = backends()


def make_task(domain: str, seed: int = 0, **params) -> GroundTask:
    return ground_text(domain_text(domain), generate(domain, params, seed), seed)


def random_task(rng: random.Random, n_facts: int = 8, n_ops: int = 10, max_cost: int = 3,
                zero_cost: bool = False) -> GroundTask:
    """Small random STRIPS task; may be unsolvable."""
    facts = tuple(f"f{i}" for i in range(n_facts))
    ops = []
    lo = 0 if zero_cost else 1
    for i in range(n_ops):
        pre = frozenset(rng.sample(range(n_facts), rng.randint(0, min(3, n_facts))))
        add = frozenset(rng.sample(range(n_facts), rng.randint(1, min(3, n_facts))))
        dele = frozenset(rng.sample(range(n_facts), rng.randint(0, min(2, n_facts))))
        ops.append(GroundOperator(f"o{i}", pre, add, dele, rng.randint(lo, max_cost)))
    init = make_state(rng.sample(range(n_facts), rng.randint(1, min(3, n_facts))), n_facts)
    goal = frozenset(rng.sample(range(n_facts), rng.randint(1, min(3, n_facts))))
    return GroundTask(facts, tuple(ops), init, goal, "random", f"r{rng.random():.6f}")


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


@pytest.fixture
def gripper2():
    return make_task("gripper", seed=3, balls=2)


# one line per acceptance criterion, printed after the run whatever the capture mode
ACCEPTANCE: list[str] = []


def report(label: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE.append(f"{label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: (int(s.split()[1].rstrip(":ab")), s)):
            terminalreporter.write_line(line)
