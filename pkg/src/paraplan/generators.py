"""Seeded problem generators for the bundled domains, plus difficulty schedules."""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from math import comb, factorial

from .seeding import derive_seed

DOMAINS = ("gripper", "blocksworld", "transport-lite")


def domain_text(domain: str) -> str:
    if domain not in DOMAINS:
        raise ValueError(f"unknown domain {domain!r}; choose from {', '.join(DOMAINS)}")
    return resources.files("paraplan").joinpath(f"data/domains/{domain}.pddl").read_text()


def gen_gripper(balls: int, seed: int) -> str:
    if balls < 1:
        raise ValueError("gripper needs at least one ball")
    rng = random.Random(seed)
    names = [f"ball{i}" for i in range(1, balls + 1)]
    rooms = [rng.choice(("rooma", "roomb")) for _ in names]
    init = ["(at-robby rooma)", "(free left)", "(free right)"]
    init += [f"(at {b} {r})" for b, r in zip(names, rooms)]
    goal = " ".join(f"(at {b} roomb)" for b in names)
    return (
        f"; gripper balls={balls} seed={seed}\n"
        f"(define (problem gripper-{balls}-{seed})\n"
        f"  (:domain gripper)\n"
        f"  (:objects rooma roomb - room left right - gripper {' '.join(names)} - ball)\n"
        f"  (:init {' '.join(init)})\n"
        f"  (:goal (and {goal})))\n"
    )


@lru_cache(maxsize=None)
def _bw_states(n: int) -> int:
    """Number of blocksworld configurations of n labelled blocks (sets of towers)."""
    if n == 0:
        return 1
    return sum(comb(n - 1, k - 1) * factorial(k) * _bw_states(n - k) for k in range(1, n + 1))


def sample_towers(blocks: list[str], rng: random.Random) -> list[list[str]]:
    """Uniformly random tower configuration, bottom block first.

    Splits off the tower holding the first remaining block with probability
    proportional to the number of configurations it leaves, then recurses.
    """
    rest = list(blocks)
    towers = []
    while rest:
        n = len(rest)
        weights = [comb(n - 1, k - 1) * factorial(k) * _bw_states(n - k) for k in range(1, n + 1)]
        k = rng.choices(range(1, n + 1), weights=weights)[0]
        first, others = rest[0], rest[1:]
        mates = rng.sample(others, k - 1)
        tower = [first] + mates
        rng.shuffle(tower)
        towers.append(tower)
        chosen = set(mates)
        rest = [b for b in others if b not in chosen]
    return towers


def tower_facts(towers: list[list[str]]) -> list[str]:
    facts = []
    for tower in towers:
        facts.append(f"(ontable {tower[0]})")
        for below, above in zip(tower, tower[1:]):
            facts.append(f"(on {above} {below})")
        facts.append(f"(clear {tower[-1]})")
    return facts


def gen_blocksworld(blocks: int, seed: int) -> str:
    if blocks < 1:
        raise ValueError("blocksworld needs at least one block")
    rng = random.Random(seed)
    names = [f"b{i}" for i in range(1, blocks + 1)]
    init = tower_facts(sample_towers(names, rng)) + ["(handempty)"]
    goal = [f for f in tower_facts(sample_towers(names, rng)) if not f.startswith("(clear")]
    return (
        f"; blocksworld blocks={blocks} seed={seed}\n"
        f"(define (problem blocksworld-{blocks}-{seed})\n"
        f"  (:domain blocksworld)\n"
        f"  (:objects {' '.join(names)} - block)\n"
        f"  (:init {' '.join(init)})\n"
        f"  (:goal (and {' '.join(goal)})))\n"
    )


def road_network(cities: int, rng: random.Random) -> dict[tuple[int, int], int]:
    """Random spanning tree plus extra edges; symmetric integer lengths in [1, 10]."""
    edges: dict[tuple[int, int], int] = {}
    for i in range(1, cities):
        j = rng.randrange(i)
        edges[(j, i)] = rng.randint(1, 10)
    for _ in range(cities // 2):
        a, b = sorted(rng.sample(range(cities), 2))
        if (a, b) not in edges:
            edges[(a, b)] = rng.randint(1, 10)
    return edges


def gen_transport_lite(cities: int, trucks: int, packages: int, seed: int) -> str:
    if cities < 2 or trucks < 1 or packages < 1:
        raise ValueError("transport-lite needs cities >= 2, trucks >= 1, packages >= 1")
    rng = random.Random(seed)
    locs = [f"city{i}" for i in range(1, cities + 1)]
    truck_names = [f"truck{i}" for i in range(1, trucks + 1)]
    pkg_names = [f"pkg{i}" for i in range(1, packages + 1)]
    init = []
    numeric = []
    for (a, b), length in sorted(road_network(cities, rng).items()):
        for x, y in ((a, b), (b, a)):
            init.append(f"(road {locs[x]} {locs[y]})")
            numeric.append(f"(= (road-length {locs[x]} {locs[y]}) {length})")
    for t in truck_names:
        init.append(f"(at {t} {rng.choice(locs)})")
    goal = []
    for p in pkg_names:
        origin, target = rng.sample(locs, 2)
        init.append(f"(at {p} {origin})")
        goal.append(f"(at {p} {target})")
    body = "\n    ".join(init + numeric + ["(= (total-cost) 0)"])
    return (
        f"; transport-lite cities={cities} trucks={trucks} packages={packages} seed={seed}\n"
        f"(define (problem transport-{cities}-{trucks}-{packages}-{seed})\n"
        f"  (:domain transport-lite)\n"
        f"  (:objects {' '.join(locs)} - location {' '.join(truck_names)} - truck "
        f"{' '.join(pkg_names)} - package)\n"
        f"  (:init\n    {body})\n"
        f"  (:goal (and {' '.join(goal)}))\n"
        f"  (:metric minimize (total-cost)))\n"
    )


GENERATORS = {
    "gripper": gen_gripper,
    "blocksworld": gen_blocksworld,
    "transport-lite": gen_transport_lite,
}


def generate(domain: str, params: dict, seed: int) -> str:
    try:
        gen = GENERATORS[domain]
    except KeyError:
        raise ValueError(f"unknown domain {domain!r}") from None
    return gen(seed=seed, **params)


@dataclass(frozen=True)
class DifficultySchedule:
    """Generator parameters for each problem slot; reused for every batch."""

    domain: str
    slots: tuple[tuple[tuple[str, int], ...], ...]
    name: str = "custom"

    def __len__(self):
        return len(self.slots)

    def params(self, k: int) -> dict:
        return dict(self.slots[k])


def _graded(lo: int, hi: int, r: int) -> list[int]:
    return [lo + ((hi - lo) * i) // (r - 1) for i in range(r)] if r > 1 else [lo]


def _schedule(domain: str, name: str, rows) -> DifficultySchedule:
    return DifficultySchedule(domain, tuple(tuple(sorted(p.items())) for p in rows), name)


SCHEDULES = {
    ("gripper", "default"): _schedule("gripper", "default", [{"balls": b} for b in _graded(4, 20, 20)]),
    ("gripper", "small"): _schedule("gripper", "small", [{"balls": b} for b in _graded(1, 4, 4)]),
    ("blocksworld", "default"): _schedule(
        "blocksworld", "default", [{"blocks": b} for b in _graded(4, 10, 20)]
    ),
    ("blocksworld", "small"): _schedule("blocksworld", "small", [{"blocks": b} for b in _graded(2, 5, 4)]),
    ("transport-lite", "default"): _schedule(
        "transport-lite", "default",
        [{"cities": c, "trucks": 1 + c // 6, "packages": c // 2 + 1} for c in _graded(4, 12, 20)],
    ),
    ("transport-lite", "small"): _schedule(
        "transport-lite", "small",
        [{"cities": c, "trucks": 1, "packages": 2} for c in _graded(3, 5, 4)],
    ),
    ("transport-lite", "desk"): _schedule(
        "transport-lite", "desk",
        [{"cities": c, "trucks": 2, "packages": p}
         for c, p in zip(_graded(8, 12, 10), _graded(4, 8, 10))],
    ),
}


def get_schedule(domain: str, name: str = "default") -> DifficultySchedule:
    try:
        return SCHEDULES[(domain, name)]
    except KeyError:
        names = sorted(n for d, n in SCHEDULES if d == domain)
        raise ValueError(f"no schedule {name!r} for {domain}; available: {', '.join(names)}") from None


@dataclass(frozen=True)
class GeneratedProblem:
    problem_id: str
    domain: str
    params: dict
    seed: int
    text: str


def generate_batch(schedule: DifficultySchedule, master_seed: int, batch: int = 0,
                   count: int | None = None) -> list[GeneratedProblem]:
    """One problem per schedule slot; seeds derived from (master, batch, slot).

    ``count`` takes a prefix of the schedule, or cycles through it when larger.
    """
    out = []
    for k in range(len(schedule) if count is None else count):
        params = schedule.params(k % len(schedule))
        seed = derive_seed("problem", master_seed, batch, k)
        text = generate(schedule.domain, params, seed)
        out.append(GeneratedProblem(f"{schedule.domain}-b{batch}-p{k}", schedule.domain, params, seed, text))
    return out
