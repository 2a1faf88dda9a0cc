from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

from .errors import MvProlateError


@dataclass(frozen=True)
class Check:
    """A named residual measured against a tolerance."""

    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance

    def as_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


class Passed:
    """A check whose residual stayed within tolerance."""

    __match_args__ = ("check",)

    def __init__(self, check: Check):
        self.check = check

    def is_ok(self) -> bool:
        return True

    def is_err(self) -> bool:
        return False

    def unwrap(self) -> Check:
        return self.check

    def then(self, func: Callable[[Check], Outcome]) -> Outcome:
        """Runs a dependent check; exceptions become a Failed outcome."""
        try:
            return func(self.check)
        except MvProlateError as e:
            return Failed(Check(self.check.name, math.inf, self.check.tolerance), e)

    def catch(self, func: Callable[[Failed], Outcome]) -> Outcome:
        """Skips if Passed."""
        return self

    def __repr__(self):
        return f"Passed({self.check!r})"

    def __eq__(self, other):
        return isinstance(other, Passed) and self.check == other.check


class Failed:
    """A check that exceeded its tolerance or raised a library error."""

    __match_args__ = ("check", "error")

    def __init__(self, check: Check, error: Exception | None = None):
        self.check = check
        self.error = error

    def is_ok(self) -> bool:
        return False

    def is_err(self) -> bool:
        return True

    def unwrap(self) -> Check:
        if self.error is not None:
            raise self.error

        raise ValueError(
            f"Check {self.check.name!r} failed: residual {self.check.residual:.3e} "
            f"> tolerance {self.check.tolerance:.1e}"
        )

    def then(self, func: Callable[[Check], Outcome]) -> Outcome:
        """Skips if Failed."""
        return self

    def catch(self, func: Callable[[Failed], Outcome]) -> Outcome:
        """Recovers from a failure (e.g. to downgrade an expected one)."""
        try:
            return func(self)
        except MvProlateError as e:
            return Failed(self.check, e)

    def as_dict(self) -> dict[str, Any]:
        record = self.check.as_dict()
        if self.error is not None:
            record["error"] = f"{type(self.error).__name__}: {self.error}"
        return record

    def __repr__(self):
        return f"Failed({self.check!r}, {self.error!r})"

    def __eq__(self, other):
        return isinstance(other, Failed) and self.check == other.check


type Outcome = Passed | Failed


def evaluate(name: str, compute: Callable[[], float], tolerance: float) -> Outcome:
    """
    Measures one residual.

    Library errors raised by `compute` are captured as Failed with an
    infinite residual, so one broken check never aborts a suite.
    """
    try:
        residual = float(compute())
    except MvProlateError as e:
        return Failed(Check(name, math.inf, tolerance), e)

    check = Check(name, residual, tolerance)
    return Passed(check) if check.passed else Failed(check)


def as_record(outcome: Outcome) -> dict[str, Any]:
    match outcome:
        case Passed(check):
            return check.as_dict()
        case Failed() as failed:
            return failed.as_dict()
