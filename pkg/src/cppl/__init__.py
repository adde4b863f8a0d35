"""cppl: a compiler toolchain for a JSON circuit IR.

Parse and validate designs, infer bit widths, run semantics-preserving
optimization passes, simulate, and emit deterministic Verilog (plus a
CIRCT-flavored debug dump).  A bounded diagnostics-feedback refinement
loop drives a pluggable body generator, and a FastAPI service plus thin
CLI expose the whole pipeline.
"""

__version__ = "0.1.0"

from .diagnostics import CompilerError, Diagnostic, InferenceError, ParseError
from .ir import (
    Design,
    InstanceItem,
    ModuleDef,
    OperationItem,
    OutputItem,
    PortDecl,
    lookup_signature,
    parse_design,
    serialize_design,
)
from .pipeline import analyze_design, analyze_text, compile_design, compile_text

__all__ = [
    "__version__",
    "CompilerError",
    "Diagnostic",
    "InferenceError",
    "ParseError",
    "Design",
    "ModuleDef",
    "PortDecl",
    "OperationItem",
    "InstanceItem",
    "OutputItem",
    "parse_design",
    "serialize_design",
    "lookup_signature",
    "analyze_design",
    "analyze_text",
    "compile_design",
    "compile_text",
]
