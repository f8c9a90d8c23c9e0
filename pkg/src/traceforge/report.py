"""Structured check reports shared by the engine and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Step:
    check: str
    inputs: Any
    result: Any
    rule: str
    ok: bool = True

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "inputs": self.inputs,
            "result": self.result,
            "rule": self.rule,
            "ok": self.ok,
        }


@dataclass
class Report:
    title: str
    steps: list[Step] = field(default_factory=list)
    status: str = "pass"
    conclusion: str = ""
    data: dict = field(default_factory=dict)

    def add(self, check: str, inputs: Any, result: Any, rule: str, ok: bool = True) -> Step:
        step = Step(check, inputs, result, rule, ok)
        self.steps.append(step)
        if not ok and self.status == "pass":
            self.status = "fail"
        return step

    def to_json(self) -> dict:
        return {
            "title": self.title,
            "status": self.status,
            "steps": [s.to_json() for s in self.steps],
            "conclusion": self.conclusion,
            "data": self.data,
        }

    def to_text(self) -> str:
        lines = [f"{self.title}: {self.status.upper()}"]
        for s in self.steps:
            mark = "ok " if s.ok else "FAIL"
            lines.append(f"  [{mark}] {s.check}: {s.result}  ({s.rule})")
        if self.conclusion:
            lines.append(f"  => {self.conclusion}")
        return "\n".join(lines)


REPORT_SCHEMA = {
    "type": "object",
    "required": ["title", "status", "steps", "conclusion", "data"],
    "properties": {
        "title": {"type": "string"},
        "status": {"enum": ["pass", "fail", "unknown"]},
        "conclusion": {"type": "string"},
        "data": {"type": "object"},
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["check", "inputs", "result", "rule", "ok"],
                "properties": {
                    "check": {"type": "string"},
                    "rule": {"type": "string", "minLength": 1},
                    "ok": {"type": "boolean"},
                },
            },
        },
    },
}
