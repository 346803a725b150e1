"""IPC-style quality scores: c_min / c per solved problem, 0 otherwise."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

FAIL = None


def ipc_score(cost: int | None, c_min: int | None) -> float:
    if cost is None or c_min is None:
        return 0.0
    if c_min == 0:
        # zero-cost guard: only plans matching the free reference earn credit
        return 1.0 if cost == 0 else 0.0
    return c_min / cost


def ipc_scores(costs: Sequence[Sequence[int | None]]) -> list[float]:
    """Summed scores for an n x r cost matrix (None marks a failed run).

    c_min for each problem is the cheapest plan any row found.
    """
    if not costs:
        return []
    r = len(costs[0])
    if any(len(row) != r for row in costs):
        raise ValueError("cost matrix rows differ in length")
    c_min = []
    for k in range(r):
        solved = [row[k] for row in costs if row[k] is not None]
        c_min.append(min(solved) if solved else None)
    return [sum(ipc_score(row[k], c_min[k]) for k in range(r)) for row in costs]


def reference_costs(records: Iterable) -> dict[str, int]:
    """Cheapest solved cost per problem id."""
    best: dict[str, int] = {}
    for rec in records:
        if rec.solved and rec.cost is not None:
            if rec.problem_id not in best or rec.cost < best[rec.problem_id]:
                best[rec.problem_id] = rec.cost
    return best


def merge_reference(*tables: dict[str, int]) -> dict[str, int]:
    out: dict[str, int] = {}
    for t in tables:
        for pid, c in t.items():
            out[pid] = min(c, out.get(pid, c))
    return out


def score_records(records, reference: dict[str, int] | None = None) -> dict[str, dict[str, float]]:
    """Per contender, per problem: score averaged over that contender's runs.

    Without an explicit reference, c_min comes from the records themselves.
    An external reference is combined with the records by taking the minimum.
    """
    records = list(records)
    ref = reference_costs(records)
    if reference:
        ref = merge_reference(ref, reference)
    runs: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for rec in records:
        g = ipc_score(rec.cost if rec.solved else None, ref.get(rec.problem_id))
        runs[rec.contender or rec.config_id][rec.problem_id].append(g)
    return {c: {p: sum(v) / len(v) for p, v in probs.items()} for c, probs in runs.items()}


def score_table(per_problem: dict[str, dict[str, float]], domains: dict[str, str],
                order: list[str] | None = None):
    """(rows, domain names): each row is (contender, {domain: sum}, total).

    ``domains`` maps problem id to domain.
    """
    names = order or sorted(per_problem)
    all_domains = sorted(set(domains.values()))
    rows = []
    for c in names:
        sums = {d: 0.0 for d in all_domains}
        for p, g in sorted(per_problem.get(c, {}).items()):
            sums[domains[p]] += g
        rows.append((c, sums, sum(sums[d] for d in all_domains)))
    return rows, all_domains


def domains_of(records) -> dict[str, str]:
    return {r.problem_id: r.domain for r in records}


def format_table(rows, domains, fmt: str = "{:.2f}") -> str:
    header = ["contender"] + list(domains) + ["Sum"]
    body = [[c] + [fmt.format(s[d]) for d in domains] + [fmt.format(t)] for c, s, t in rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = []
    for r in [header] + body:
        cells = [r[0].ljust(widths[0])] + [v.rjust(w) for v, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"


def table_csv(rows, domains) -> str:
    lines = [",".join(["contender"] + list(domains) + ["Sum"])]
    for c, s, t in rows:
        lines.append(",".join([c] + [repr(s[d]) for d in domains] + [repr(t)]))
    return "\n".join(lines) + "\n"
