"""Structured diagnostics shared by every compiler stage.

A Diagnostic is the machine-readable error/warning record that static
analyses produce and the refinement loop consumes.  On the wire (CLI
output, service responses, generator feedback) a diagnostic list is a JSON
array of objects with keys code, severity, module, itemIndex, relatedIds,
message.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

ERROR = "error"
WARNING = "warning"

CODES = frozenset({
    "MALFORMED_JSON",
    "SCHEMA_VIOLATION",
    "DUPLICATE_ID",
    "USE_BEFORE_DEF",
    "UNKNOWN_ID",
    "UNKNOWN_MODULE",
    "UNKNOWN_PORT",
    "MISSING_OUTPUT",
    "MULTIPLE_OUTPUT",
    "OUTPUT_NOT_LAST",
    "UNBOUND_OUTPUT_PORT",
    "RECURSIVE_INSTANTIATION",
    "COMB_LOOP",
    "WIDTH_MISMATCH",
    "BAD_ATTR",
    "DEAD_CODE",
})

# DEAD_CODE is advisory: the optimizer removes it and compilation proceeds.
WARNING_CODES = frozenset({"DEAD_CODE"})


@dataclass(frozen=True, slots=True)
class Diagnostic:
    code: str
    message: str
    module: str | None = None
    item_index: int | None = None
    related_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.code not in CODES:
            raise ValueError(f"unknown diagnostic code: {self.code!r}")

    @property
    def severity(self) -> str:
        return WARNING if self.code in WARNING_CODES else ERROR

    def to_wire(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "module": self.module,
            "itemIndex": self.item_index,
            "relatedIds": list(self.related_ids),
            "message": self.message,
        }

    @classmethod
    def from_wire(cls, obj: dict) -> "Diagnostic":
        return cls(
            code=obj["code"],
            message=obj.get("message", ""),
            module=obj.get("module"),
            item_index=obj.get("itemIndex"),
            related_ids=tuple(obj.get("relatedIds") or ()),
        )


def has_errors(diagnostics) -> bool:
    return any(d.severity == ERROR for d in diagnostics)


def sort_key(d: Diagnostic):
    """Deterministic ordering: module, then item index, then code (None first)."""
    return (
        d.module is not None,
        d.module or "",
        d.item_index is not None,
        d.item_index if d.item_index is not None else -1,
        d.code,
        d.message,
    )


def to_wire_list(diagnostics) -> list[dict]:
    return [d.to_wire() for d in diagnostics]


def to_json(diagnostics) -> str:
    return json.dumps(to_wire_list(diagnostics), indent=2)


class CompilerError(Exception):
    """Base for failures that carry structured diagnostics."""

    def __init__(self, diagnostics, message: str | None = None):
        self.diagnostics: list[Diagnostic] = list(diagnostics)
        if message is None:
            message = "; ".join(d.message for d in self.diagnostics) or "compiler error"
        super().__init__(message)


class ParseError(CompilerError):
    """Input document could not be parsed into a Design."""


class InferenceError(CompilerError):
    """Width inference rejected one or more modules."""
