"""Result records for inequality checks."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

CHECK_TOL = 1e-9


@dataclass
class BoundReport:
    """Outcome of one inequality check: lhs <relation> rhs.

    passed is None when the hypotheses are not met (the check is skipped).
    """
    name: str
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    relation: str = "<="
    hypotheses_met: bool = True
    reasons: List[str] = field(default_factory=list)
    passed: Optional[bool] = None
    inputs: Dict[str, Any] = field(default_factory=dict)
    witnesses: Dict[str, Any] = field(default_factory=dict)
    diagnostic: bool = False

    @classmethod
    def compare(cls, name: str, lhs: float, rhs: float, relation: str = "<=",
                tol: float = CHECK_TOL, **kwargs) -> "BoundReport":
        """Build a report whose verdict is lhs <= rhs (or >=) up to tol."""
        if relation == "<=":
            passed = lhs <= rhs + tol
        elif relation == ">=":
            passed = lhs >= rhs - tol
        else:
            raise ValueError(f"Unknown relation '{relation}'")
        return cls(name=name, lhs=float(lhs), rhs=float(rhs), relation=relation,
                   passed=bool(passed), **kwargs)

    @classmethod
    def skipped(cls, name: str, *reasons: str, **kwargs) -> "BoundReport":
        return cls(name=name, hypotheses_met=False, reasons=list(reasons), passed=None, **kwargs)

    @property
    def status(self) -> str:
        if self.passed is None:
            return "skip"
        return "pass" if self.passed else "fail"

    @property
    def slack(self) -> Optional[float]:
        """rhs - lhs for '<=' checks, lhs - rhs for '>='; negative means violated."""
        if self.lhs is None or self.rhs is None:
            return None
        return self.rhs - self.lhs if self.relation == "<=" else self.lhs - self.rhs

    def to_dict(self) -> dict:
        result = {
            'name': self.name,
            'status': self.status,
            'relation': self.relation,
            'lhs': _finite_or_none(self.lhs),
            'rhs': _finite_or_none(self.rhs),
            'hypotheses_met': self.hypotheses_met,
        }
        if self.reasons:
            result['reasons'] = list(self.reasons)
        if self.inputs:
            result['inputs'] = dict(self.inputs)
        if self.witnesses:
            result['witnesses'] = dict(self.witnesses)
        if self.diagnostic:
            result['diagnostic'] = True
        return result


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return value


def count_failures(reports: List[BoundReport]) -> int:
    """Failed, non-diagnostic checks."""
    return sum(1 for r in reports if r.passed is False and not r.diagnostic)
