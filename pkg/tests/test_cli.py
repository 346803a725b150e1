import json
from pathlib import Path

import pytest

from paraplan.cem import CemConfig
from paraplan.cli import main
from paraplan.pddl import ground, parse_domain, parse_problem
from paraplan.runner import read_records
from paraplan.search.params import preset
from paraplan.task import parse_plan, validate_plan

DEAD_DOMAIN = """(define (domain dead)
  (:requirements :strips)
  (:predicates (p) (q) (never))
  (:action flip :parameters () :precondition (p) :effect (and (not (p)) (q)))
  (:action finish :parameters () :precondition (never) :effect (p)))
"""
DEAD_PROBLEM = """(define (problem stuck) (:domain dead) (:init (p)) (:goal (and (p) (q))))"""


@pytest.fixture
def gripper_files(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["generate", "--domain", "gripper", "--params", "balls=3", "--seed", "7",
                 "--out-dir", "g"]) == 0
    capsys.readouterr()
    return tmp_path / "g" / "domain.pddl", tmp_path / "g" / "problem.pddl"


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = tmp_path_factory.mktemp("train") / "run"
    code = main(["train", "--domain", "gripper", "--schedule", "small", "--iterations", "1",
                 "--population", "4", "--elite", "2", "--problems", "2", "--seed", "3",
                 "--out-dir", str(out)])
    assert code == 0
    return out


def test_generate_is_deterministic(capsys):
    main(["generate", "--domain", "blocksworld", "--schedule", "small", "--seed", "5"])
    first = capsys.readouterr().out
    main(["generate", "--domain", "blocksworld", "--schedule", "small", "--seed", "5"])
    assert capsys.readouterr().out == first
    assert first.count("(define (problem") == 4


def test_solve_prints_record_and_plan(gripper_files, capsys, tmp_path):
    dom, prob = gripper_files
    assert main(["solve", str(dom), str(prob), "--seed", "1", "--plan-out", "plan.txt"]) == 0
    records = read_records(capsys.readouterr().out)
    assert len(records) == 1 and records[0].outcome == "solved"
    domain = parse_domain(dom.read_text())
    task = ground(domain, parse_problem(prob.read_text(), domain))
    plan = parse_plan(task, (tmp_path / "plan.txt").read_text())
    report = validate_plan(task, plan)
    assert report.ok and report.cost == records[0].cost


def test_preset_and_equal_params_give_identical_records(gripper_files, capsys):
    dom, prob = gripper_files
    main(["solve", str(dom), str(prob), "--seed", "9", "--preset", "mixed"])
    a = capsys.readouterr().out
    main(["solve", str(dom), str(prob), "--seed", "9", "--params", preset("mixed").canonical()])
    assert capsys.readouterr().out == a


def test_record_file_appends_rows(gripper_files, capsys):
    dom, prob = gripper_files
    for seed in ("1", "2"):
        main(["solve", str(dom), str(prob), "--seed", seed, "--record", "runs.csv"])
    rows = read_records(Path("runs.csv").read_text())
    assert [r.seed for r in rows] == [1, 2]


def test_trace_written(gripper_files):
    dom, prob = gripper_files
    main(["solve", str(dom), str(prob), "--seed", "1", "--trace", "trace.txt"])
    assert Path("trace.txt").read_text().strip()


def test_zero_time_limit_times_out(gripper_files):
    dom, prob = gripper_files
    assert main(["solve", str(dom), str(prob), "--seed", "1", "--time-limit", "0"]) == 2


def test_exhausted_exit_code(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    Path("d.pddl").write_text(DEAD_DOMAIN)
    Path("p.pddl").write_text(DEAD_PROBLEM)
    assert main(["solve", "d.pddl", "p.pddl", "--seed", "1"]) == 1


@pytest.mark.parametrize("extra", [["--preset", "nope"], ["--preset", "gbfs", "--params", "eps=0.1"],
                                   ["--time-limit", "soon"]])
def test_usage_errors_exit_3(gripper_files, extra):
    dom, prob = gripper_files
    with pytest.raises(SystemExit) as exc:
        code = main(["solve", str(dom), str(prob), "--seed", "1"] + extra)
        raise SystemExit(code)
    assert exc.value.code == 3


def test_bad_inputs_exit_4(gripper_files, tmp_path):
    dom, prob = gripper_files
    assert main(["solve", str(dom), str(tmp_path / "missing.pddl")]) == 4
    bad = tmp_path / "bad.pddl"
    bad.write_text("(define (problem x")
    assert main(["solve", str(dom), str(bad), "--seed", "1"]) == 4


def test_trainer_defaults():
    cfg = CemConfig()
    assert (cfg.population, cfg.elite, cfg.alpha) == (50, 10, 0.7)


def test_train_outputs(trained):
    assert {p.name for p in trained.iterdir()} >= {"policy.json", "profile.json", "train_log.csv",
                                                   "checkpoint.json"}
    kinds = [line.split(",", 1)[0] for line in (trained / "train_log.csv").read_text().splitlines()[1:]]
    assert kinds.count("run") == 8
    assert kinds.count("candidate") == 4
    assert kinds.count("summary") == 1


def test_policy_round_trip_and_profile_override(trained, gripper_files, tmp_path, capsys):
    dom, prob = gripper_files
    policy = trained / "policy.json"
    assert main(["solve", str(dom), str(prob), "--seed", "2", "--policy", str(policy)]) == 0
    first = capsys.readouterr().out
    assert main(["calibrate", "--domain", "gripper", "--schedule", "small", "--seed", "0",
                 "--out", "prof.json"]) == 0
    assert main(["solve", str(dom), str(prob), "--seed", "2", "--policy", str(policy),
                 "--profile", "prof.json"]) == 0
    assert read_records(capsys.readouterr().out)[0].outcome == "solved"
    assert read_records(first)[0].outcome == "solved"


def test_policy_missing_profile_or_malformed(trained, gripper_files, tmp_path):
    dom, prob = gripper_files
    moved = tmp_path / "lonely.json"
    moved.write_text((trained / "policy.json").read_text())
    assert main(["solve", str(dom), str(prob), "--seed", "2", "--policy", str(moved)]) == 4
    data = json.loads((trained / "policy.json").read_text())
    data["theta"] = data["theta"][:-1]
    short = trained / "short.json"
    short.write_text(json.dumps(data))
    assert main(["solve", str(dom), str(prob), "--seed", "2", "--policy", str(short)]) == 4
    # a profile that differs from the one the policy was trained with is refused
    swapped = tmp_path / "swapped"
    swapped.mkdir()
    (swapped / "policy.json").write_text((trained / "policy.json").read_text())
    assert main(["calibrate", "--domain", "gripper", "--schedule", "small", "--seed", "99",
                 "--preset", "gbfs", "--out", str(swapped / "profile.json")]) == 0
    assert main(["solve", str(dom), str(prob), "--seed", "2",
                 "--policy", str(swapped / "policy.json")]) == 4


def _evaluate(out, seed="4"):
    return main(["evaluate", "--generated", "gripper:small", "--contenders", "gbfs", "eps-greedy",
                 "--runs", "2", "--seed", seed, "--out-dir", out, "--workers", "1"])


def test_evaluate_then_rescore_matches(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert _evaluate("ev") == 0
    table = capsys.readouterr().out
    assert (tmp_path / "ev" / "table.txt").read_text() == table
    assert main(["score", "ev/records.csv", "--csv"]) == 0
    assert capsys.readouterr().out == (tmp_path / "ev" / "scores.csv").read_text()
    records = read_records((tmp_path / "ev" / "records.csv").read_text())
    assert len(records) == 2 * 4 * 2


def test_evaluate_is_deterministic(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    _evaluate("a")
    _evaluate("b")
    assert Path("a/records.csv").read_text() == Path("b/records.csv").read_text()


def test_unknown_contender_is_usage_error(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["evaluate", "--generated", "gripper:small", "--contenders", "nobody"]) == 3


def test_ground_summary(gripper_files, capsys):
    dom, prob = gripper_files
    assert main(["ground", str(dom), str(prob)]) == 0
    assert "facts" in capsys.readouterr().out


def test_generate_schedule_files(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for d in ("a", "b"):
        assert main(["generate", "--domain", "gripper", "--schedule", "default", "--seed", "7",
                     "--out-dir", d]) == 0
    files = sorted(p.name for p in Path("a").glob("gripper-*.pddl"))
    assert len(files) == 20
    assert all((Path("a") / f).read_text() == (Path("b") / f).read_text() for f in files)


def test_gbfs_solves_gripper_two(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    main(["generate", "--domain", "gripper", "--params", "balls=2", "--seed", "1", "--out-dir", "g"])
    assert main(["solve", "g/domain.pddl", "g/problem.pddl", "--preset", "gbfs", "--seed", "0",
                 "--plan-out", "plan.txt"]) == 0
    domain = parse_domain(Path("g/domain.pddl").read_text())
    task = ground(domain, parse_problem(Path("g/problem.pddl").read_text(), domain))
    assert validate_plan(task, parse_plan(task, Path("plan.txt").read_text())).ok
