"""Verification reports shared by all checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Check:
    """Outcome of one relation, axiom or claim.

    ``status`` is ``"pass"``, ``"fail"`` or ``"vacuous"`` (the clause's
    hypotheses do not apply).  ``witness`` is JSON-friendly data locating a
    failure.
    """

    name: str
    status: str
    witness: Any = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def to_json(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.detail:
            out["detail"] = self.detail
        return out


def passed(name: str, detail: str = "") -> Check:
    return Check(name, "pass", None, detail)


def failed(name: str, witness: Any = None, detail: str = "") -> Check:
    return Check(name, "fail", witness, detail)


def vacuous(name: str, detail: str = "") -> Check:
    return Check(name, "vacuous", None, detail)


@dataclass
class Report:
    subject: str
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks) -> None:
        self.checks.extend(checks)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __bool__(self) -> bool:
        return self.ok

    @property
    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.ok), None)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "status": "pass" if self.ok else "fail",
            "checks": [c.to_json() for c in self.checks],
            "notes": list(self.notes),
        }

    def summary(self) -> str:
        if self.ok:
            return f"{self.subject}: pass ({len(self.checks)} checks)"
        c = self.first_failure
        return f"{self.subject}: FAIL at {c.name} (witness {c.witness!r})"
