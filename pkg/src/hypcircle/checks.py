"""
In-run assertions for experiment runs.

Every subcommand turns its measurements into a list of checks; the run
passes if and only if every check in its pipeline passes.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    details: str = ""

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": _jsonable(self.value),
            "threshold": _jsonable(self.threshold),
            "details": self.details,
        }


def _jsonable(x: float) -> Optional[float]:
    x = float(x)
    return x if math.isfinite(x) else None


class BaseCheck(ABC):
    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def run(self, payload: Any) -> CheckResult:
        pass


class ToleranceCheck(BaseCheck):
    """max |payload| <= tol."""

    def __init__(self, name: str, tol: float):
        super().__init__(name)
        self.tol = float(tol)

    def run(self, payload: Any) -> CheckResult:
        arr = np.abs(np.atleast_1d(np.asarray(payload)))
        if arr.size == 0 or not np.all(np.isfinite(arr)):
            return CheckResult(self.name, False, math.nan, self.tol, "no finite values")
        worst = float(arr.max())
        return CheckResult(self.name, worst <= self.tol, worst, self.tol,
                           f"max |x| = {worst:.3e} over {arr.size} values")


class SlopeCheck(BaseCheck):
    """Fitted log-slope of a DecayFit at most `max_slope`."""

    def __init__(self, name: str, max_slope: float):
        super().__init__(name)
        self.max_slope = float(max_slope)

    def run(self, payload: Any) -> CheckResult:
        if payload.degenerate:
            return CheckResult(self.name, False, math.nan, self.max_slope,
                               f"degenerate fit; dropped t={payload.dropped}")
        slope = float(payload.slope)
        return CheckResult(self.name, slope <= self.max_slope, slope, self.max_slope,
                           f"slope {slope:.4f} from {len(payload.ts) - len(payload.dropped)} points")


class RatioWindowCheck(BaseCheck):
    def __init__(self, name: str, lo: float, hi: float):
        super().__init__(name)
        self.lo, self.hi = float(lo), float(hi)

    def run(self, payload: Any) -> CheckResult:
        ratio = float(payload)
        ok = self.lo <= ratio <= self.hi
        return CheckResult(self.name, ok, ratio, self.hi, f"ratio {ratio:.6f} in [{self.lo}, {self.hi}]")


class TrendCheck(BaseCheck):
    """The last value of the sequence is strictly below the first."""

    def run(self, payload: Sequence[float]) -> CheckResult:
        vals = [abs(complex(v)) for v in payload]
        if len(vals) < 2:
            return CheckResult(self.name, False, math.nan, math.nan, "need at least two values")
        return CheckResult(self.name, vals[-1] < vals[0], vals[-1], vals[0],
                           f"{vals[0]:.3e} -> {vals[-1]:.3e}")


class BoundednessCheck(BaseCheck):
    """max/min of the magnitudes stays within `factor`."""

    def __init__(self, name: str, factor: float):
        super().__init__(name)
        self.factor = float(factor)

    def run(self, payload: Sequence[float]) -> CheckResult:
        vals = np.abs(np.asarray(payload, dtype=complex))
        if vals.size == 0 or vals.min() <= 0:
            return CheckResult(self.name, False, math.nan, self.factor, "empty or zero magnitudes")
        spread = float(vals.max() / vals.min())
        return CheckResult(self.name, spread <= self.factor, spread, self.factor,
                           f"max/min = {spread:.3f} over {vals.size} values")


@dataclass
class CheckPipeline:
    results: List[CheckResult] = field(default_factory=list)

    def run(self, check: BaseCheck, payload: Any) -> CheckResult:
        try:
            result = check.run(payload)
        except Exception as e:
            result = CheckResult(check.name, False, math.nan, math.nan, f"{type(e).__name__}: {e}")
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, "check %s: %s (%s)", result.name, "pass" if result.passed else "FAIL", result.details)
        self.results.append(result)
        return result

    def record(self, result: CheckResult) -> None:
        self.results.append(result)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def __len__(self) -> int:
        return len(self.results)

    def __iter__(self):
        return iter(self.results)
