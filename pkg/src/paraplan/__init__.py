"""Parametrized forward-search planning with learned search policies."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .task import GroundOperator, GroundTask, Plan, validate_plan

__all__ = ["BACKEND", "GroundOperator", "GroundTask", "Plan", "__version__", "validate_plan"]
