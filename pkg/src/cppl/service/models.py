"""Request/response models for the compiler service (and the thin CLI)."""

from __future__ import annotations

from pydantic import BaseModel, Field


class DiagnosticModel(BaseModel):
    code: str
    severity: str
    module: str | None = None
    itemIndex: int | None = None
    relatedIds: list[str] = Field(default_factory=list)
    message: str


class PassReportModel(BaseModel):
    name: str
    itemsRemoved: int
    itemsRewritten: int
    iterations: int


class CheckRequest(BaseModel):
    source: str


class CheckResponse(BaseModel):
    ok: bool
    diagnostics: list[DiagnosticModel] = Field(default_factory=list)


class CompileRequest(BaseModel):
    source: str
    optimize: bool = True
    emitCirct: bool = False


class CompileResponse(BaseModel):
    ok: bool
    verilog: str | None = None
    circt: str | None = None
    diagnostics: list[DiagnosticModel] = Field(default_factory=list)
    reports: list[PassReportModel] = Field(default_factory=list)


class SimStep(BaseModel):
    inputs: dict[str, int] = Field(default_factory=dict)


class SimRequest(BaseModel):
    source: str
    top: str
    steps: list[SimStep] = Field(default_factory=list)


class SimStepResult(BaseModel):
    outputs: dict[str, int]


class SimResponse(BaseModel):
    ok: bool
    results: list[SimStepResult] = Field(default_factory=list)
    diagnostics: list[DiagnosticModel] = Field(default_factory=list)
    error: str | None = None


class RefineRequest(BaseModel):
    skeleton: dict
    intent: str = ""
    nMax: int = Field(3, ge=1)
    context: list = Field(default_factory=list)
    generatorCmd: str | None = None


class RefineResponse(BaseModel):
    ok: bool
    attempts: int = 0
    module: dict | None = None
    design: list | None = None
    verilog: str | None = None
    history: list[list[DiagnosticModel]] = Field(default_factory=list)
    diagnostics: list[DiagnosticModel] = Field(default_factory=list)
    error: str | None = None


class OutcomeModel(BaseModel):
    id: str | None = None
    n: int
    c: int


class PasskRequest(BaseModel):
    outcomes: list[OutcomeModel]
    k: int


class GeomeanRequest(BaseModel):
    counts: dict[str, float] | list[float]


class ValueResponse(BaseModel):
    value: float


class HealthResponse(BaseModel):
    status: str
    version: str
