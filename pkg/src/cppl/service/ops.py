"""Service handlers: pure request -> response functions.

The FastAPI routes and the CLI both call these, so command-line and HTTP
clients see identical behavior.
"""

from __future__ import annotations

import os

from .. import evalkit, pipeline, refine, sim
from ..diagnostics import Diagnostic, ParseError
from ..ir import Design, design_to_value, module_to_value, parse_design_value, parse_module_value
from .models import (
    CheckRequest,
    CheckResponse,
    CompileRequest,
    CompileResponse,
    DiagnosticModel,
    GeomeanRequest,
    PassReportModel,
    PasskRequest,
    RefineRequest,
    RefineResponse,
    SimRequest,
    SimResponse,
    SimStepResult,
    ValueResponse,
)

GENERATOR_ENV = "CPPL_GENERATOR_CMD"


def _diag_models(diagnostics) -> list[DiagnosticModel]:
    return [DiagnosticModel(**d.to_wire()) for d in diagnostics]


def check(req: CheckRequest) -> CheckResponse:
    analysis = pipeline.analyze_text(req.source)
    return CheckResponse(ok=analysis.ok, diagnostics=_diag_models(analysis.diagnostics))


def compile(req: CompileRequest) -> CompileResponse:
    result = pipeline.compile_text(req.source, enable_opt=req.optimize,
                                   want_circt=req.emitCirct)
    return CompileResponse(
        ok=result.ok,
        verilog=result.verilog,
        circt=result.circt,
        diagnostics=_diag_models(result.analysis.diagnostics),
        reports=[PassReportModel(name=r.name, itemsRemoved=r.items_removed,
                                 itemsRewritten=r.items_rewritten,
                                 iterations=r.iterations)
                 for r in result.reports],
    )


def simulate(req: SimRequest) -> SimResponse:
    analysis = pipeline.analyze_text(req.source)
    if not analysis.ok or analysis.design is None:
        return SimResponse(ok=False, diagnostics=_diag_models(analysis.diagnostics))
    if analysis.design.module(req.top) is None:
        diag = Diagnostic("UNKNOWN_MODULE", f"no module named {req.top!r} in design",
                          module=req.top)
        return SimResponse(ok=False, diagnostics=_diag_models([diag]))
    try:
        results = sim.run_vectors(analysis.design, req.top,
                                  [{"inputs": s.inputs} for s in req.steps])
    except sim.ContractViolation as exc:
        return SimResponse(ok=False, diagnostics=_diag_models(analysis.diagnostics),
                           error=str(exc))
    return SimResponse(ok=True,
                       results=[SimStepResult(outputs=r) for r in results],
                       diagnostics=_diag_models(analysis.diagnostics))


def refine_op(req: RefineRequest) -> RefineResponse:
    try:
        skeleton = parse_module_value(req.skeleton, path="skeleton")
        context = parse_design_value(req.context)
    except ParseError as exc:
        return RefineResponse(ok=False, diagnostics=_diag_models(exc.diagnostics),
                              error="SCHEMA_VIOLATION")
    cmd = req.generatorCmd or os.environ.get(GENERATOR_ENV)
    if not cmd:
        return RefineResponse(ok=False, error="NO_GENERATOR")
    cfg = refine.RefineConfig(n_max=req.nMax, generator_cmd=cmd)
    request = refine.GenerationRequest(skeleton, req.intent)
    try:
        result = refine.refine_module(request, cfg, context=context)
    except refine.RefinementExhausted as exc:
        return RefineResponse(
            ok=False, attempts=len(exc.history), error="REFINEMENT_EXHAUSTED",
            history=[_diag_models(diags) for diags in exc.history])
    except refine.GeneratorFailure as exc:
        return RefineResponse(ok=False, error=f"GENERATOR_FAILURE: {exc}")
    except refine.SkeletonTampered as exc:
        return RefineResponse(ok=False, error=f"SKELETON_TAMPERED: {exc}")

    others = tuple(m for m in context.modules if m.name != skeleton.name)
    full = Design(others + (result.module,))
    compiled = pipeline.compile_design(full)
    return RefineResponse(
        ok=True,
        attempts=result.attempts,
        module=module_to_value(result.module),
        design=design_to_value(full),
        verilog=compiled.verilog,
        history=[_diag_models(diags) for diags in result.history],
        diagnostics=_diag_models(compiled.analysis.diagnostics),
    )


def passk(req: PasskRequest) -> ValueResponse:
    outcomes = [evalkit.ProblemOutcomes(o.id or str(i), o.n, o.c)
                for i, o in enumerate(req.outcomes)]
    return ValueResponse(value=evalkit.pass_at_k(outcomes, req.k))


def geomean(req: GeomeanRequest) -> ValueResponse:
    return ValueResponse(value=evalkit.geo_mean(evalkit.counts_from_json(req.counts)))
