"""Bounded compile-diagnose-regenerate loop with a pluggable body generator.

The driver owns the module skeleton (ports plus pre-inserted instance
items); the generator only ever produces the remaining body items.  Each
attempt splices the generated items after the skeleton instances, runs the
full check+type pipeline, and either accepts the module or feeds the
diagnostics (cumulatively, across all prior attempts) back into the next
generation request.  At most n_max generator calls are made.

A generator is any callable taking a GenerationRequest and returning a
JSON-like list of body items.  command_generator adapts an external
program: the request is written to its stdin as JSON and the body item
array is read from its stdout.  The CLI wires CPPL_GENERATOR_CMD to this.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, ParseError, has_errors
from .ir import (
    Design,
    ModuleDef,
    defined_ids,
    module_to_value,
    parse_body_items,
)
from .pipeline import analyze_design


class RefinementExhausted(Exception):
    def __init__(self, history: list[list[Diagnostic]]):
        self.history = history
        super().__init__(f"no valid module after {len(history)} attempts")


class GeneratorFailure(Exception):
    pass


class SkeletonTampered(Exception):
    pass


@dataclass
class GenerationRequest:
    skeleton: ModuleDef
    intent: str = ""
    history: list[list[Diagnostic]] = field(default_factory=list)
    attempt: int = 0

    def to_wire(self) -> dict:
        return {
            "skeleton": module_to_value(self.skeleton),
            "intent": self.intent,
            "attempt": self.attempt,
            "history": [[d.to_wire() for d in diags] for diags in self.history],
        }


@dataclass
class RefineConfig:
    n_max: int = 3
    generator_cmd: str | None = None

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")


@dataclass
class RefineResult:
    module: ModuleDef
    attempts: int
    history: list[list[Diagnostic]]


def command_generator(cmd: str):
    """Adapt an external command to the generator interface."""

    def generate(request: GenerationRequest):
        proc = subprocess.run(
            shlex.split(cmd),
            input=json.dumps(request.to_wire()),
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            raise GeneratorFailure(
                f"generator command exited {proc.returncode}: {proc.stderr.strip()}")
        try:
            return json.loads(proc.stdout)
        except json.JSONDecodeError as exc:
            raise GeneratorFailure(f"generator wrote invalid JSON: {exc}")

    return generate


def refine_module(request: GenerationRequest, cfg: RefineConfig,
                  generator=None, context: Design | None = None) -> RefineResult:
    """Run the loop until a module passes all checks or n_max is exhausted.

    context supplies the other design modules (callees of the skeleton's
    pre-inserted instances).  Raises RefinementExhausted (with the full
    diagnostic history), GeneratorFailure, or SkeletonTampered.
    """
    if generator is None:
        if cfg.generator_cmd is None:
            raise GeneratorFailure("no generator configured")
        generator = command_generator(cfg.generator_cmd)
    skeleton = request.skeleton
    skeleton_ids = set()
    for item in skeleton.body:
        skeleton_ids.update(defined_ids(item))
    others = tuple(m for m in (context.modules if context else ())
                   if m.name != skeleton.name)
    history = list(request.history)

    for attempt in range(request.attempt, cfg.n_max):
        req = GenerationRequest(skeleton, request.intent, list(history), attempt)
        raw = generator(req)
        if not isinstance(raw, list):
            raise GeneratorFailure("generator must return a JSON array of body items")
        try:
            items = parse_body_items(raw, skeleton.name)
        except ParseError as exc:
            history.append(list(exc.diagnostics))
            continue
        clash = skeleton_ids & {rid for it in items for rid in defined_ids(it)}
        if clash:
            raise SkeletonTampered(
                f"generated items redefine pre-inserted instance ids: {sorted(clash)}")
        candidate = ModuleDef(skeleton.name, skeleton.ports, skeleton.body + items)
        analysis = analyze_design(Design(others + (candidate,)))
        if analysis.ok:
            return RefineResult(candidate, attempt + 1, history)
        history.append(list(analysis.diagnostics))
    raise RefinementExhausted(history)


def render_feedback(diagnostics: list[Diagnostic]) -> str:
    """Stable human/model-readable rendering, one line per diagnostic,
    ordered by module, then item index, then code."""
    ordered = sorted(diagnostics, key=_feedback_key)
    lines = []
    for d in ordered:
        where = d.module if d.module is not None else "<design>"
        index = f" item {d.item_index}" if d.item_index is not None else ""
        ids = f" ({', '.join(d.related_ids)})" if d.related_ids else ""
        lines.append(f"{d.severity}: [{d.code}] {where}{index}{ids}: {d.message}")
    return "\n".join(lines)


def _feedback_key(d: Diagnostic):
    return (
        d.module is not None,
        d.module or "",
        d.item_index is not None,
        d.item_index if d.item_index is not None else -1,
        d.code,
        d.message,
    )
