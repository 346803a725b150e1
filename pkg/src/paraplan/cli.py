"""Command-line entry point: ``paraplan <command> ...``.

Exit codes for ``solve``: 0 solved, 1 search space exhausted, 2 timeout.
Usage and input errors exit with 3 or more.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .features import ScalingProfile, calibrate
from .generators import DOMAINS, SCHEDULES, domain_text, generate, generate_batch, get_schedule
from .pddl import PddlError, ground, parse_domain, parse_problem
from .policy import PolicyFile
from .runner import (
    Contender, RunJob, execute, ground_generated, read_records, records_to_csv, run_jobs,
)
from .scoring import domains_of, format_table, score_records, score_table, table_csv
from .search.engine import EXHAUSTED, SOLVED, TIMEOUT, Budget, format_trace
from .search.params import PRESETS, SearchParams, preset
from .seeding import derive_seed
from .task import dump_task, format_plan

EXIT_CODES = {SOLVED: 0, EXHAUSTED: 1, TIMEOUT: 2}
EXIT_USAGE = 3
EXIT_INPUT = 4
EXIT_RUN_ERROR = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "timeout"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _seed(args) -> int:
    if args.seed is None:
        args.seed = int.from_bytes(os.urandom(4), "big")
        _say(f"seed: {args.seed}")
    return args.seed


def _budget(args) -> Budget:
    return Budget(time_limit=args.time_limit, max_expansions=args.max_expansions,
                  wall_limit=getattr(args, "wall_limit", None))


def _load_policy(path: str, profile_override: str | None, name: str | None = None) -> Contender:
    pf = PolicyFile.load(path)
    profile = pf.resolve_profile(path, profile_override)
    return Contender(name or Path(path).stem, theta=tuple(float(x) for x in pf.theta), profile=profile)


def _contender(spec: str, profile_override: str | None = None) -> Contender:
    """Preset name, ``params:eps=..,S=..``, or ``[name=]path/to/policy.json``."""
    if spec in PRESETS:
        return Contender(spec, params=PRESETS[spec])
    if spec.startswith("params:"):
        p = SearchParams.parse(spec[len("params:"):])
        return Contender(p.canonical(), params=p)
    name, sep, path = spec.partition("=")
    if not sep:
        name, path = None, spec
    if not Path(path).exists():
        raise UsageError(f"contender {spec!r} is neither a preset ({', '.join(PRESETS)}) nor a policy file")
    return _load_policy(path, profile_override, name)


def _add_budget_args(p, time_limit=5.0):
    p.add_argument("--time-limit", type=float, default=time_limit,
                   help="seconds per run on the run clock (default %(default)s)")
    p.add_argument("--max-expansions", type=int, default=None)
    p.add_argument("--clock", choices=("virtual", "wall"), default="virtual",
                   help="virtual: 1 ms per expansion or walk step, deterministic (default)")
    p.add_argument("--heuristic", choices=("ff", "add", "max", "goalcount"), default="ff")


# -- solve ------------------------------------------------------------------------


def cmd_solve(args) -> int:
    try:
        domain = parse_domain(Path(args.domain).read_text())
        problem = parse_problem(Path(args.problem).read_text(), domain)
        task = ground(domain, problem)
    except (OSError, PddlError) as e:
        _say(f"error: {e}")
        return EXIT_INPUT
    chosen = sum(x is not None for x in (args.preset, args.params, args.policy))
    if chosen > 1:
        raise UsageError("give at most one of --preset, --params, --policy")
    if args.policy:
        try:
            contender = _load_policy(args.policy, args.profile)
        except (OSError, ValueError) as e:
            _say(f"error: {e}")
            return EXIT_INPUT
    else:
        params = SearchParams.parse(args.params) if args.params else preset(args.preset or "gbfs")
        # named by the parameter values, so equal configurations give equal records
        contender = Contender(params.canonical(), params=params)
    seed = _seed(args)
    trace = [] if args.trace else None
    job = RunJob(problem.name, domain.name, task, contender, seed, _budget(args), args.heuristic, args.clock)
    plans: list = []
    record = execute(job, plans, trace)
    if trace is not None:
        Path(args.trace).write_text(format_trace(trace))
    if record.outcome not in EXIT_CODES:
        _say(f"error: run failed: {record.note}")
        return EXIT_RUN_ERROR
    text = records_to_csv([record])
    if args.record:
        path = Path(args.record)
        new = not path.exists() or path.stat().st_size == 0
        with open(path, "a") as fh:
            fh.write(text if new else text.split("\n", 1)[1])
    else:
        sys.stdout.write(text)
    if plans:
        plan_text = format_plan(task, plans[0])
        if args.plan_out:
            Path(args.plan_out).write_text(plan_text)
        elif args.record:
            sys.stdout.write(plan_text)
    _say(f"{record.outcome}: cost={record.cost} expansions={record.expansions}")
    return EXIT_CODES[record.outcome]


# -- train ------------------------------------------------------------------------


def cmd_train(args) -> int:
    from .cem import CemConfig, CemError, train

    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    overrides = {
        "domain": args.domain, "schedule": args.schedule, "iterations": args.iterations,
        "problems": args.problems, "population": args.population, "elite": args.elite,
        "alpha": args.alpha, "time_limit": args.time_limit, "max_expansions": args.max_expansions,
        "heuristic": args.heuristic, "clock": args.clock,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.diagonal:
        base["diagonal"] = True
    if args.seed is not None or "seed" not in base:
        base["seed"] = _seed(args)
    if "problems" not in base and "domain" in base:
        base["problems"] = len(get_schedule(base["domain"], base.get("schedule", "default")))
    try:
        config = CemConfig.from_dict(base)
        get_schedule(config.domain, config.schedule)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from None
    _say("config: " + ", ".join(f"{k}={v}" for k, v in vars(config).items()))
    profile = ScalingProfile.load(args.profile) if args.profile else None

    def progress(stats):
        _say(f"iteration {stats.iteration}: gamma={stats.gamma:.3f} mean={stats.mean_score:.3f} "
             f"elite_mean={stats.elite_mean_score:.3f} ({stats.wall_time:.1f}s)")

    try:
        result = train(config, args.out_dir, profile=profile, resume=args.resume,
                       workers=args.workers, progress=progress)
    except CemError as e:
        _say(f"error: {e}")
        return EXIT_INPUT
    _say(f"policy written to {result.policy_path}")
    return 0


# -- evaluate ----------------------------------------------------------------------


def _problem_dir(path: Path):
    """(problem id, domain name, task) for every problem file next to a domain file."""
    domain_file = path / "domain.pddl"
    if not domain_file.exists():
        raise UsageError(f"{path} has no domain.pddl")
    domain = parse_domain(domain_file.read_text())
    out = []
    for f in sorted(path.glob("*.pddl")):
        if f.name == "domain.pddl":
            continue
        problem = parse_problem(f.read_text(), domain)
        out.append((f"{path.name}/{f.stem}", domain.name, ground(domain, problem)))
    return out


def evaluation_problems(generated: list[str], batches: int, seed: int):
    out = []
    for spec in generated:
        domain, _, sched = spec.partition(":")
        schedule = get_schedule(domain, sched or "default")
        for b in range(batches):
            probs = generate_batch(schedule, derive_seed("evaluate", seed), batch=b)
            for p, task in zip(probs, ground_generated(probs)):
                out.append((p.problem_id, domain, task))
    return out


def evaluate(problems, contenders: list[Contender], runs: int, seed: int, budget: Budget,
             heuristic: str = "ff", clock: str = "virtual", workers: int | None = None,
             reference: dict | None = None):
    """Run every contender on every problem ``runs`` times; returns (records, rows, domains)."""
    jobs = []
    for c in contenders:
        for pid, dname, task in problems:
            for i in range(runs):
                jobs.append(RunJob(pid, dname, task, c, derive_seed("eval", seed, pid, i), budget,
                                   heuristic, clock))
    records = run_jobs(jobs, workers)
    per_problem = score_records(records, reference)
    rows, domains = score_table(per_problem, domains_of(records), [c.name for c in contenders])
    return records, rows, domains


def _read_reference(path) -> dict[str, int]:
    import csv

    with open(path) as fh:
        return {row["problem_id"]: int(row["cost"]) for row in csv.DictReader(fh) if row.get("cost")}


def cmd_evaluate(args) -> int:
    seed = _seed(args)
    if not args.contenders:
        raise UsageError("need at least one contender")
    contenders = [_contender(s, args.profile) for s in args.contenders]
    if len({c.name for c in contenders}) != len(contenders):
        raise UsageError("contender names must be unique (use name=path for policies)")
    problems = []
    for d in args.problems_dir or ():
        problems += _problem_dir(Path(d))
    problems += evaluation_problems(args.generated or [], args.batches, seed)
    if not problems:
        raise UsageError("no problems: give --problems-dir or --generated")
    reference = _read_reference(args.reference) if args.reference else None
    records, rows, domains = evaluate(problems, contenders, args.runs, seed, _budget(args),
                                      args.heuristic, args.clock, args.workers, reference)
    table = format_table(rows, domains)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "records.csv").write_text(records_to_csv(records))
        (out / "scores.csv").write_text(table_csv(rows, domains))
        (out / "table.txt").write_text(table)
    sys.stdout.write(table)
    return 0


# -- calibrate / generate / score / ground --------------------------------------------


def cmd_calibrate(args) -> int:
    seed = _seed(args)
    schedule = get_schedule(args.domain, args.schedule)
    tasks = ground_generated(generate_batch(schedule, derive_seed("calibration", seed), 0))
    params = SearchParams.parse(args.params) if args.params else preset(args.preset)
    profile = calibrate(tasks, params=params, budget=_budget(args), seed=seed, clock=args.clock,
                        heuristic=args.heuristic,
                        provenance={"domain": args.domain, "schedule": args.schedule})
    if args.out:
        profile.save(args.out)
        _say(f"profile written to {args.out}")
    else:
        sys.stdout.write(profile.to_json())
    return 0


def cmd_generate(args) -> int:
    seed = _seed(args)
    if args.params:
        params = {}
        for part in args.params.split(","):
            k, _, v = part.partition("=")
            params[k.strip()] = int(v)
        text = generate(args.domain, params, seed)
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / "domain.pddl").write_text(domain_text(args.domain))
            (out / "problem.pddl").write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    schedule = get_schedule(args.domain, args.schedule)
    problems = generate_batch(schedule, seed, args.batch)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "domain.pddl").write_text(domain_text(args.domain))
        for p in problems:
            (out / f"{p.problem_id}.pddl").write_text(p.text)
        _say(f"{len(problems)} problems written to {out}")
    else:
        sys.stdout.write("\n".join(p.text for p in problems))
    return 0


def cmd_score(args) -> int:
    records = []
    for path in args.records:
        records += read_records(Path(path).read_text())
    reference = _read_reference(args.reference) if args.reference else None
    per_problem = score_records(records, reference)
    order = list(dict.fromkeys(r.contender for r in records))
    rows, domains = score_table(per_problem, domains_of(records), order)
    sys.stdout.write(table_csv(rows, domains) if args.csv else format_table(rows, domains))
    return 0


def cmd_ground(args) -> int:
    try:
        domain = parse_domain(Path(args.domain).read_text())
        task = ground(domain, parse_problem(Path(args.problem).read_text(), domain))
    except (OSError, PddlError) as e:
        _say(f"error: {e}")
        return EXIT_INPUT
    if args.dump_ground:
        sys.stdout.write(dump_task(task))
    else:
        print(f"{task.problem_name}: {len(task.facts)} facts, {len(task.operators)} operators, "
              f"{len(task.goal)} goals")
    return 0


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="paraplan", description="Parametrized forward-search planner.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one PDDL problem")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--params", help="e.g. eps=0.5,S=10,R=5,L=10,C=200,c=0.5")
    p.add_argument("--policy", help="policy file written by 'train'")
    p.add_argument("--profile", help="scaling profile overriding the one named in the policy file")
    p.add_argument("--seed", type=int)
    p.add_argument("--plan-out")
    p.add_argument("--record", help="append the run record to this CSV instead of printing it")
    p.add_argument("--trace", help="write the expansion trace here")
    p.add_argument("--wall-limit", type=float, default=None, help="hard wall-clock cap in seconds")
    _add_budget_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("train", help="learn a search policy with the cross-entropy method")
    p.add_argument("--domain", choices=DOMAINS)
    p.add_argument("--schedule")
    p.add_argument("--config", help="JSON file with trainer settings")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--problems", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--elite", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--diagonal", action="store_true", help="diagonal covariance only")
    p.add_argument("--profile", help="use this scaling profile instead of calibrating")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--max-expansions", type=int)
    p.add_argument("--clock", choices=("virtual", "wall"))
    p.add_argument("--heuristic", choices=("ff", "add", "max", "goalcount"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score contenders on a problem set")
    p.add_argument("--problems-dir", action="append", help="directory with domain.pddl and problems")
    p.add_argument("--generated", action="append", help="DOMAIN[:SCHEDULE] to generate problems from")
    p.add_argument("--batches", type=int, default=1, help="generated batches per domain")
    p.add_argument("--contenders", nargs="+", required=True,
                   help="preset names, params:..., or [name=]policy.json")
    p.add_argument("--profile", help="scaling profile for policy contenders")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--reference", help="CSV with problem_id,cost reference costs")
    p.add_argument("--out-dir")
    p.add_argument("--workers", type=int)
    _add_budget_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="measure feature maxima for a domain")
    p.add_argument("--domain", choices=DOMAINS, required=True)
    p.add_argument("--schedule", default="default")
    p.add_argument("--preset", default="mixed", choices=sorted(PRESETS))
    p.add_argument("--params")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    _add_budget_args(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("generate", help="write generated PDDL problems")
    p.add_argument("--domain", choices=DOMAINS, required=True)
    p.add_argument("--schedule", default="default",
                   choices=sorted({n for _, n in SCHEDULES}))
    p.add_argument("--params", help="single problem, e.g. balls=4")
    p.add_argument("--batch", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("score", help="recompute IPC scores from run-record CSVs")
    p.add_argument("records", nargs="+")
    p.add_argument("--reference")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("ground", help="ground a problem and print statistics")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("--dump-ground", action="store_true", help="print the ground task")
    p.set_defaults(func=cmd_ground)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        _say(f"paraplan: error: {e}")
        return EXIT_USAGE
    except (ValueError, OSError, PddlError) as e:
        _say(f"paraplan: error: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
