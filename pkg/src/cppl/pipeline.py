"""Orchestration of the fixed analysis order and the full compile flow.

Analysis order: symbols, terminator, instance graph, width inference,
combinational loops, dead code.  Later stages run for a module only when
the earlier error-severity stages passed for it (and, for anything needing
callee signatures, when the design-level instance graph is clean).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import backend, check, optimize
from .diagnostics import Diagnostic, InferenceError, ParseError, has_errors
from .ir import Design, parse_design
from .typer import WidthEnv, build_signature_env, infer_module


@dataclass
class AnalysisResult:
    design: Design | None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    gammas: dict[str, WidthEnv] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)
    dead: dict[str, set[int]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.design is not None and not has_errors(self.diagnostics)


def analyze_design(design: Design) -> AnalysisResult:
    result = AnalysisResult(design=design)
    clean: set[str] = set()
    for m in design.modules:
        diags = check.check_symbols(m)
        if not diags:
            diags = check.check_terminator(m)
        result.diagnostics.extend(diags)
        if not has_errors(diags):
            clean.add(m.name)

    graph_diags, order = check.check_instance_graph(design)
    result.diagnostics.extend(graph_diags)
    result.order = order
    if has_errors(graph_diags):
        return result

    sigma = build_signature_env(design)
    for name in order:
        if name not in clean:
            continue
        m = design.module(name)
        try:
            gamma = infer_module(sigma, m)
        except InferenceError as exc:
            result.diagnostics.extend(exc.diagnostics)
            continue
        result.gammas[name] = gamma
        loop_diags = check.detect_comb_loops(m)
        result.diagnostics.extend(loop_diags)
        if has_errors(loop_diags):
            continue
        dead, dead_diags = check.mark_dead_code(m)
        result.dead[name] = dead
        result.diagnostics.extend(dead_diags)
    return result


def analyze_text(text: str | bytes) -> AnalysisResult:
    try:
        design = parse_design(text)
    except ParseError as exc:
        return AnalysisResult(design=None, diagnostics=list(exc.diagnostics))
    return analyze_design(design)


@dataclass
class CompileResult:
    analysis: AnalysisResult
    design: Design | None = None
    verilog: str | None = None
    circt: str | None = None
    reports: list[optimize.PassReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.verilog is not None


def compile_design(design: Design, enable_opt: bool = True,
                   want_circt: bool = False) -> CompileResult:
    analysis = analyze_design(design)
    if not analysis.ok:
        return CompileResult(analysis=analysis)
    optimized, reports = optimize.run_pipeline(design, enable_opt)
    final = analyze_design(optimized)
    assert final.ok, "optimizer broke a previously valid design"
    netlist = backend.lower(optimized, final.gammas)
    return CompileResult(
        analysis=analysis,
        design=optimized,
        verilog=backend.emit_verilog(netlist),
        circt=backend.emit_circt_text(netlist) if want_circt else None,
        reports=reports,
    )


def compile_text(text: str | bytes, enable_opt: bool = True,
                 want_circt: bool = False) -> CompileResult:
    analysis = analyze_text(text)
    if not analysis.ok or analysis.design is None:
        return CompileResult(analysis=analysis)
    return compile_design(analysis.design, enable_opt, want_circt)
