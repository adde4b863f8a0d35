"""FastAPI application exposing the compiler pipeline."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from . import ops
from .models import (
    CheckRequest,
    CheckResponse,
    CompileRequest,
    CompileResponse,
    GeomeanRequest,
    HealthResponse,
    PasskRequest,
    RefineRequest,
    RefineResponse,
    SimRequest,
    SimResponse,
    ValueResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="cppl compiler service", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/check", response_model=CheckResponse)
    def check(req: CheckRequest):
        return ops.check(req)

    @app.post("/compile", response_model=CompileResponse)
    def compile_design(req: CompileRequest):
        return ops.compile(req)

    @app.post("/sim", response_model=SimResponse)
    def simulate(req: SimRequest):
        return ops.simulate(req)

    @app.post("/refine", response_model=RefineResponse)
    def refine(req: RefineRequest):
        return ops.refine_op(req)

    @app.post("/passk", response_model=ValueResponse)
    def passk(req: PasskRequest):
        try:
            return ops.passk(req)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/geomean", response_model=ValueResponse)
    def geomean(req: GeomeanRequest):
        try:
            return ops.geomean(req)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    return app


app = create_app()
