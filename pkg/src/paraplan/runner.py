"""Single planner runs as picklable jobs, run records, and a worker pool."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import asdict, dataclass, fields

import numpy as np

from .features import ScalingProfile
from .generators import GeneratedProblem, domain_text
from .pddl import ground, parse_domain, parse_problem
from .policy import PolicyController, decode
from .search.engine import VIRTUAL_TICK, Budget, ParametrizedSearch
from .search.params import SearchParams
from .task import GroundTask, validate_plan

ERROR = "error"


@dataclass(frozen=True)
class Contender:
    """Something that picks search parameters: a fixed configuration or a policy."""

    name: str
    params: SearchParams | None = None
    theta: tuple | None = None
    profile: ScalingProfile | None = None

    def __post_init__(self):
        if (self.params is None) == (self.theta is None):
            raise ValueError("a contender needs exactly one of params or theta")
        if self.theta is not None and self.profile is None:
            raise ValueError("a policy contender needs a scaling profile")

    @property
    def config_id(self) -> str:
        if self.params is not None:
            return self.params.canonical()
        return f"policy:{self.name}"

    def source(self):
        if self.params is not None:
            return self.params
        return PolicyController(decode(np.asarray(self.theta)), self.profile)


@dataclass(frozen=True)
class RunJob:
    problem_id: str
    domain: str
    task: GroundTask
    contender: Contender
    seed: int
    budget: Budget
    heuristic: str = "ff"
    clock: str = "virtual"


@dataclass
class RunRecord:
    problem_id: str
    domain: str
    contender: str
    config_id: str
    outcome: str
    cost: int | None
    expansions: int
    generated: int
    unique: int
    wall_ms: int
    seed: int
    note: str = ""

    @property
    def solved(self) -> bool:
        return self.outcome == "solved"


RECORD_FIELDS = [f.name for f in fields(RunRecord)]


def clock_ms(elapsed: float, clock: str) -> int:
    # the virtual clock is integral in ticks; avoid float rounding drift
    if clock == "virtual":
        return int(round(elapsed / VIRTUAL_TICK))
    return int(round(elapsed * 1000))


def execute(job: RunJob, plan_out: list | None = None, trace: list | None = None) -> RunRecord:
    """Run one job; crashes become an ``error`` record instead of propagating."""
    c = job.contender
    try:
        search = ParametrizedSearch(
            job.task, c.source(), heuristic=job.heuristic, seed=job.seed,
            budget=job.budget, clock=job.clock, trace=trace,
        )
        out = search.run()
    except Exception as e:  # isolated: recorded as a failed run
        note = f"{type(e).__name__}: {e}".replace("\n", " ")
        return RunRecord(job.problem_id, job.domain, c.name, c.config_id, ERROR, None, 0, 0, 0, 0,
                         job.seed, note)
    cost = None
    if out.solved:
        report = validate_plan(job.task, out.plan)
        if not report.ok:
            raise AssertionError(f"engine produced an invalid plan on {job.problem_id}: {report.reason}")
        cost = out.plan.cost
        if plan_out is not None:
            plan_out.append(out.plan)
    st = out.stats
    return RunRecord(
        job.problem_id, job.domain, c.name, c.config_id, out.status, cost, st.expanded,
        st.generated, st.unique, clock_ms(st.elapsed, job.clock), job.seed,
    )


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get("PARAPLAN_WORKERS")
    if env:
        return max(1, int(env))
    if requested:
        return max(1, requested)
    return 1


def run_jobs(jobs: list[RunJob], workers: int | None = None) -> list[RunRecord]:
    """Execute jobs, returning records in job order regardless of completion order."""
    n = worker_count(workers)
    if n <= 1 or len(jobs) <= 1:
        return [execute(j) for j in jobs]
    import multiprocessing as mp

    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    with ctx.Pool(min(n, len(jobs))) as pool:
        return pool.map(execute, jobs, chunksize=max(1, len(jobs) // (4 * n)))


def ground_text(domain_pddl: str, problem_pddl: str, seed: int | None = None) -> GroundTask:
    domain = parse_domain(domain_pddl)
    return ground(domain, parse_problem(problem_pddl, domain), seed=seed)


def ground_generated(problems: list[GeneratedProblem]) -> list[GroundTask]:
    texts: dict[str, str] = {}
    out = []
    for p in problems:
        if p.domain not in texts:
            texts[p.domain] = domain_text(p.domain)
        out.append(ground_text(texts[p.domain], p.text, p.seed))
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(RECORD_FIELDS)
    for r in records:
        d = asdict(r)
        w.writerow([_fmt(d[k]) for k in RECORD_FIELDS])
    return buf.getvalue()


def read_records(text: str) -> list[RunRecord]:
    rows = csv.DictReader(io.StringIO(text))
    missing = {"problem_id", "config_id", "outcome", "cost"} - set(rows.fieldnames or ())
    if missing:
        raise ValueError(f"run-record CSV lacks columns: {', '.join(sorted(missing))}")
    out = []
    for row in rows:
        def num(key, default=0):
            v = row.get(key, "")
            return int(v) if v not in ("", None) else default

        out.append(RunRecord(
            row["problem_id"], row.get("domain") or "all", row.get("contender") or row["config_id"],
            row["config_id"], row["outcome"], int(row["cost"]) if row["cost"] else None,
            num("expansions"), num("generated"), num("unique"), num("wall_ms"), num("seed"),
            row.get("note") or "",
        ))
    return out

