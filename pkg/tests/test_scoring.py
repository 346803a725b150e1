import pytest
from hypothesis import given
from hypothesis import strategies as st

from paraplan.runner import RunRecord, read_records, records_to_csv
from paraplan.scoring import (
    format_table, ipc_score, ipc_scores, merge_reference, score_records, score_table, table_csv,
)


def rec(contender, pid, cost, domain="d", outcome=None):
    outcome = outcome or ("solved" if cost is not None else "timeout")
    return RunRecord(pid, domain, contender, contender, outcome, cost, 1, 1, 1, 1, 0)


def test_half_cost_plan_scores_half():
    assert ipc_scores([[10], [20]]) == [1.0, 0.5]


def test_failure_scores_zero():
    assert ipc_scores([[None, 4], [6, 8]]) == [1.0, 1.5]
    assert ipc_score(None, 3) == 0.0
    assert ipc_scores([[None], [None]]) == [0.0, 0.0]


def test_zero_cost_guard():
    assert ipc_score(0, 0) == 1.0
    assert ipc_score(5, 0) == 0.0
    assert ipc_scores([[0], [3]]) == [1.0, 0.0]


def test_ragged_matrix_rejected():
    with pytest.raises(ValueError):
        ipc_scores([[1, 2], [3]])


@given(st.lists(st.one_of(st.none(), st.integers(1, 100)), min_size=1, max_size=30))
def test_single_contender_scores_solved_count(costs):
    assert ipc_scores([costs]) == [pytest.approx(sum(c is not None for c in costs))]


@given(st.lists(st.lists(st.one_of(st.none(), st.integers(0, 50)), min_size=3, max_size=3),
                min_size=1, max_size=5))
def test_scores_bounded_by_problem_count(matrix):
    for s in ipc_scores(matrix):
        assert 0.0 <= s <= 3.0


def test_records_averaged_over_runs():
    records = [rec("a", "p1", 10), rec("a", "p1", 20), rec("b", "p1", 10), rec("b", "p1", None)]
    per = score_records(records)
    assert per["a"]["p1"] == pytest.approx(0.75)
    assert per["b"]["p1"] == pytest.approx(0.5)


def test_external_reference_taken_as_minimum():
    records = [rec("a", "p1", 10)]
    assert score_records(records, {"p1": 5})["a"]["p1"] == pytest.approx(0.5)
    # a worse external reference never inflates scores above 1
    assert score_records(records, {"p1": 40})["a"]["p1"] == pytest.approx(1.0)
    assert merge_reference({"p": 4}, {"p": 2, "q": 1}) == {"p": 2, "q": 1}


def test_table_sums_by_domain():
    records = [rec("a", "p1", 10, "x"), rec("a", "p2", 4, "y"), rec("b", "p1", 20, "x"),
               rec("b", "p2", None, "y")]
    rows, domains = score_table(score_records(records), {"p1": "x", "p2": "y"}, ["a", "b"])
    assert domains == ["x", "y"]
    assert rows[0] == ("a", {"x": 1.0, "y": 1.0}, 2.0)
    assert rows[1][2] == pytest.approx(0.5)
    text = format_table(rows, domains)
    assert text.splitlines()[0].split() == ["contender", "x", "y", "Sum"]
    assert table_csv(rows, domains).splitlines()[1] == "a,1.0,1.0,2.0"


def test_rescoring_csv_round_trip():
    records = [rec("a", "p1", 10), rec("b", "p1", None), rec("b", "p2", 3)]
    again = read_records(records_to_csv(records))
    assert again == records
    assert score_records(again) == score_records(records)
