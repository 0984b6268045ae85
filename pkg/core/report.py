"""Verification reports shared by the metric, finite and CLI layers."""

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from . import __version__


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class CaseResult:
    summary: str
    verdict: Verdict
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"summary": self.summary, "verdict": self.verdict.value, "data": self.data}


@dataclass
class VerificationReport:
    """Outcome of a property suite: one case per trial, in trial order."""

    suite: str
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)
    cases: list[CaseResult] = field(default_factory=list)
    version: str = __version__

    def add(self, summary: str, verdict: Verdict, **data: Any) -> CaseResult:
        case = CaseResult(summary, verdict, data)
        self.cases.append(case)
        return case

    def extend(self, other: "VerificationReport") -> None:
        self.cases.extend(other.cases)

    @property
    def counts(self) -> dict[str, int]:
        tally = {v.value: 0 for v in Verdict}
        for case in self.cases:
            tally[case.verdict.value] += 1
        return tally

    @property
    def failures(self) -> list[CaseResult]:
        return [c for c in self.cases if c.verdict is Verdict.FAIL]

    @property
    def verdict(self) -> Verdict:
        """FAIL beats INCONCLUSIVE beats PASS; an empty report is INCONCLUSIVE."""
        counts = self.counts
        if counts[Verdict.FAIL.value]:
            return Verdict.FAIL
        if counts[Verdict.INCONCLUSIVE.value] or not self.cases:
            return Verdict.INCONCLUSIVE
        return Verdict.PASS

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "version": self.version,
            "params": self.params,
            "verdict": self.verdict.value,
            "summary": self.counts,
            "failures": [c.to_dict() for c in self.failures],
            "cases": [c.to_dict() for c in self.cases],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)

    def write(self, path: str, fmt: str = "json") -> None:
        """Persist the report; CSV keeps one row per case with any interval bounds."""
        target = Path(path)
        if target.parent and not target.parent.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "json":
            target.write_text(self.to_json() + "\n", encoding="utf-8")
            return
        with open(target, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["index", "verdict", "summary", "lower", "upper"])
            for i, case in enumerate(self.cases):
                terms = case.data.get("direct")
                if isinstance(terms, list) and terms:
                    for j, term in enumerate(terms):
                        writer.writerow([i, case.verdict.value, f"{case.summary}[{j}]", term["lower"], term["upper"]])
                else:
                    writer.writerow([i, case.verdict.value, case.summary,
                                     case.data.get("lower", ""), case.data.get("upper", "")])
