"""Command-line client for the compiler service.

All logic lives in the core package behind the service handlers; the CLI
only builds request models, invokes the handlers (in process by default,
over HTTP when --server is given) and formats responses.  Artifacts (JSON
or Verilog) go to stdout, logs go to stderr.

Exit codes: 0 success, 1 compile/check failure, 2 usage or configuration
error, 3 refinement exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .service import ops
from .service.models import (
    CheckRequest,
    CompileRequest,
    GeomeanRequest,
    OutcomeModel,
    PasskRequest,
    RefineRequest,
    SimRequest,
    SimStep,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_EXHAUSTED = 3


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _emit_json(value) -> None:
    print(json.dumps(value, indent=2))


class _Remote:
    """HTTP transport: POSTs the same request models to a running server."""

    def __init__(self, base: str):
        import httpx

        self.base = base.rstrip("/")
        self.client = httpx.Client(timeout=300.0)

    def call(self, endpoint: str, request, response_model):
        resp = self.client.post(f"{self.base}/{endpoint}",
                                json=request.model_dump())
        if resp.status_code >= 400:
            print(f"error: server returned {resp.status_code}: {resp.text}",
                  file=sys.stderr)
            raise SystemExit(EXIT_FAIL)
        return response_model.model_validate(resp.json())


def _dispatch(args, endpoint: str, request, local_fn, response_model):
    if args.server:
        return _Remote(args.server).call(endpoint, request, response_model)
    return local_fn(request)


def cmd_check(args) -> int:
    from .service.models import CheckResponse

    req = CheckRequest(source=_read(args.input))
    resp = _dispatch(args, "check", req, ops.check, CheckResponse)
    _emit_json([d.model_dump() for d in resp.diagnostics])
    return EXIT_OK if resp.ok else EXIT_FAIL


def cmd_compile(args) -> int:
    from .service.models import CompileResponse

    req = CompileRequest(source=_read(args.input), optimize=not args.no_opt,
                         emitCirct=args.emit_circt is not None)
    resp = _dispatch(args, "compile", req, ops.compile, CompileResponse)
    if not resp.ok:
        _emit_json([d.model_dump() for d in resp.diagnostics])
        return EXIT_FAIL
    _write(args.output, resp.verilog)
    if args.emit_circt is not None:
        _write(args.emit_circt, resp.circt)
    return EXIT_OK


def cmd_sim(args) -> int:
    from .service.models import SimResponse

    vectors = json.loads(_read(args.vectors))
    top = args.top or vectors.get("top")
    if not top:
        print("error: no top module (use --top or a \"top\" key in the vector file)",
              file=sys.stderr)
        return EXIT_USAGE
    req = SimRequest(source=_read(args.input), top=top,
                     steps=[SimStep(inputs=s.get("inputs", {}))
                            for s in vectors.get("steps", [])])
    resp = _dispatch(args, "sim", req, ops.simulate, SimResponse)
    if not resp.ok:
        if resp.error:
            _emit_json({"error": resp.error})
        else:
            _emit_json([d.model_dump() for d in resp.diagnostics])
        return EXIT_FAIL
    _emit_json([r.model_dump() for r in resp.results])
    return EXIT_OK


def cmd_refine(args) -> int:
    from .service.models import RefineResponse

    generator_cmd = os.environ.get(ops.GENERATOR_ENV)
    if not generator_cmd and not args.server:
        print(f"error: no generator configured (set {ops.GENERATOR_ENV})",
              file=sys.stderr)
        return EXIT_USAGE
    skeleton = json.loads(_read(args.skeleton))
    intent = _read(args.intent) if args.intent else ""
    context = json.loads(_read(args.context)) if args.context else []
    req = RefineRequest(skeleton=skeleton, intent=intent, nMax=args.n_max,
                        context=context, generatorCmd=generator_cmd)
    resp = _dispatch(args, "refine", req, ops.refine_op, RefineResponse)
    if resp.ok:
        _write(args.output, resp.verilog or "")
        if args.ir_out:
            _write(args.ir_out, json.dumps(resp.design, indent=2) + "\n")
        print(f"refined {skeleton.get('name', '?')} in {resp.attempts} attempt(s)",
              file=sys.stderr)
        return EXIT_OK
    if resp.error == "REFINEMENT_EXHAUSTED":
        _emit_json([[d.model_dump() for d in attempt] for attempt in resp.history])
        print(f"error: refinement exhausted after {resp.attempts} attempts",
              file=sys.stderr)
        return EXIT_EXHAUSTED
    if resp.error == "NO_GENERATOR":
        print(f"error: no generator configured (set {ops.GENERATOR_ENV})",
              file=sys.stderr)
        return EXIT_USAGE
    _emit_json([d.model_dump() for d in resp.diagnostics])
    print(f"error: {resp.error}", file=sys.stderr)
    return EXIT_FAIL


def cmd_passk(args) -> int:
    from .service.models import ValueResponse

    raw = json.loads(_read(args.input))
    try:
        req = PasskRequest(outcomes=[OutcomeModel(**o) for o in raw], k=args.k)
        resp = _dispatch(args, "passk", req, ops.passk, ValueResponse)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(resp.value))
    return EXIT_OK


def cmd_geomean(args) -> int:
    from .service.models import ValueResponse

    raw = json.loads(_read(args.input))
    try:
        req = GeomeanRequest(counts=raw)
        resp = _dispatch(args, "geomean", req, ops.geomean, ValueResponse)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(resp.value))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cppl",
        description="Compiler for the CPPL circuit IR: check, compile to "
                    "Verilog, simulate, refine, and score results.")
    parser.add_argument("--server", metavar="URL", default=None,
                        help="send requests to a running service instead of "
                             "executing in process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and statically check a design")
    p.add_argument("input", help="design JSON file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("compile", help="compile a design to Verilog")
    p.add_argument("input", help="design JSON file")
    p.add_argument("-o", "--output", default=None, help="Verilog output path (default stdout)")
    p.add_argument("--no-opt", action="store_true", help="disable the optimization pipeline")
    p.add_argument("--emit-circt", metavar="PATH", default=None,
                   help="also write a CIRCT-style textual dump")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("sim", help="simulate a design over an input vector file")
    p.add_argument("input", help="design JSON file")
    p.add_argument("--top", default=None, help="top module name")
    p.add_argument("--vectors", required=True, help="vector JSON file")
    p.set_defaults(fn=cmd_sim)

    p = sub.add_parser("refine", help="drive the generator refinement loop on a module skeleton")
    p.add_argument("skeleton", help="module skeleton JSON file (ports + instance items)")
    p.add_argument("--intent", default=None, help="intent text file")
    p.add_argument("--context", default=None, help="design JSON with callee modules")
    p.add_argument("--n-max", type=int, default=3, help="maximum refinement attempts")
    p.add_argument("-o", "--output", default=None, help="Verilog output path (default stdout)")
    p.add_argument("--ir-out", default=None, help="write the assembled design JSON here")
    p.set_defaults(fn=cmd_refine)

    p = sub.add_parser("passk", help="pass@k over an outcomes JSON file")
    p.add_argument("input", help='JSON list of {"id", "n", "c"}')
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(fn=cmd_passk)

    p = sub.add_parser("geomean", help="geometric mean of a counts JSON file")
    p.add_argument("input", help='JSON object {"design": count} or array')
    p.set_defaults(fn=cmd_geomean)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
