"""Typed-STRIPS PDDL frontend: parsing, printing and grounding."""

from pathlib import Path

from .grounding import DEFAULT_OPERATOR_CAP, TaskTooLarge, candidate_count, ground, objects_by_type
from .syntax import (
    ActionSchema,
    Atom,
    CostTerm,
    DomainAst,
    PddlError,
    ProblemAst,
    parse_domain,
    parse_problem,
    print_domain,
    print_problem,
)


def load_task(domain_path, problem_path, **kwargs):
    """Parse and ground a domain/problem file pair."""
    domain = parse_domain(Path(domain_path).read_text())
    problem = parse_problem(Path(problem_path).read_text(), domain)
    return ground(domain, problem, **kwargs)


__all__ = [
    "ActionSchema", "Atom", "CostTerm", "DomainAst", "PddlError", "ProblemAst",
    "DEFAULT_OPERATOR_CAP", "TaskTooLarge", "candidate_count", "ground", "objects_by_type",
    "load_task", "parse_domain", "parse_problem", "print_domain", "print_problem",
]
