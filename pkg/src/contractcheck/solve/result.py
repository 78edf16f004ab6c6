from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..logic import Assignment


class ResourceLimit(RuntimeError):
    """The bounded search explored more assignments than allowed."""

    def __init__(self, limit: int) -> None:
        self.limit = limit
        super().__init__(f"explored more than {limit} assignments")


class NotUnsat(ValueError):
    """Core minimization was asked to shrink a satisfiable set."""


class SolverUnavailable(RuntimeError):
    pass


class SolverProtocolError(RuntimeError):
    def __init__(self, message: str, raw: str = "") -> None:
        self.raw = raw
        super().__init__(f"{message}\n--- solver output ---\n{raw}" if raw else message)


@dataclass
class Sat:
    model: Assignment
    soft_satisfied: list[str] = field(default_factory=list)

    is_sat = True


@dataclass
class Unsat:
    core: list[str]

    is_sat = False


SolveResult = Union[Sat, Unsat]
