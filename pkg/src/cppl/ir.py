"""Document model for the CPPL circuit IR, with bit-exact JSON parsing and
deterministic serialization.

A design is a JSON array of modules.  Each module is an object

    {"name": m, "ports": {p: {"dir": "input"|"output", "width": w}, ...},
     "body": [item, ...]}

and a body item is one of three shapes:

    {"id": r, "op": o, "args": [x, ...], ...attrs}          value operation
    {"id": [x, ...], "op": "instance", "module": m,
     "args": {port: x, ...}, ...attrs}                      module instance
    {"op": "output", "args": {port: x, ...}}                terminator

Any key beyond the structural ones is an open attribute (e.g. "lowBit",
"width", "value"); attributes are preserved verbatim through a
parse/serialize round trip and ignored by passes that do not know them.

Parsing is strict: every schema violation is reported as its own
Diagnostic with a path into the document.  Serialization is a pure
function of the Design value with a stable key order (name, ports, body;
within items id, op, module, args, then attributes sorted lexically), so
two serializations of equal designs are byte identical.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .diagnostics import CompilerError, Diagnostic, ParseError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

UNARY_OPS = frozenset({"not", "neg"})
REDUCE_OPS = frozenset({"and_reduce", "or_reduce", "xor_reduce"})
BINARY_OPS = frozenset({"add", "sub", "mul", "and", "or", "xor", "shl", "shr"})
CMP_OPS = frozenset({"eq", "ne", "ult", "ule", "ugt", "uge"})
VALUE_OPS = frozenset(
    {"const", "mux", "cast", "concat", "extract", "reg"}
    | UNARY_OPS | REDUCE_OPS | BINARY_OPS | CMP_OPS
)
OPCODES = VALUE_OPS | {"instance", "output"}

# Ops whose results are plain combinational functions of their args.
COMB_OPS = VALUE_OPS - {"reg"}

INPUT = "input"
OUTPUT = "output"


@dataclass(frozen=True, slots=True)
class PortDecl:
    dir: str
    width: int


@dataclass(frozen=True, slots=True)
class OperationItem:
    id: str
    op: str
    args: tuple[str, ...] = ()
    attrs: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class InstanceItem:
    ids: tuple[str, ...]
    module: str
    args: Mapping[str, str] = field(default_factory=dict)
    attrs: Mapping[str, object] = field(default_factory=dict)

    op = "instance"


@dataclass(frozen=True, slots=True)
class OutputItem:
    args: Mapping[str, str] = field(default_factory=dict)

    op = "output"


OpItem = Union[OperationItem, InstanceItem, OutputItem]


@dataclass(frozen=True, slots=True)
class ModuleDef:
    name: str
    ports: Mapping[str, PortDecl]
    body: tuple[OpItem, ...]

    def input_ports(self) -> list[tuple[str, PortDecl]]:
        return [(p, d) for p, d in self.ports.items() if d.dir == INPUT]

    def output_ports(self) -> list[tuple[str, PortDecl]]:
        return [(p, d) for p, d in self.ports.items() if d.dir == OUTPUT]


@dataclass(frozen=True, slots=True)
class Design:
    modules: tuple[ModuleDef, ...]

    def module(self, name: str) -> ModuleDef | None:
        for m in self.modules:
            if m.name == name:
                return m
        return None


def defined_ids(item: OpItem) -> tuple[str, ...]:
    if isinstance(item, OperationItem):
        return (item.id,)
    if isinstance(item, InstanceItem):
        return item.ids
    return ()


def used_ids(item: OpItem) -> tuple[str, ...]:
    if isinstance(item, OperationItem):
        return item.args
    if isinstance(item, InstanceItem):
        return tuple(item.args.values())
    return tuple(item.args.values())


# ---------------------------------------------------------------------------
# Parsing


class _DuplicateKey(ValueError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"duplicate object key {key!r}")


def _pairs_hook(pairs):
    out: dict = {}
    for k, v in pairs:
        if k in out:
            raise _DuplicateKey(k)
        out[k] = v
    return out


class _Collector:
    def __init__(self) -> None:
        self.diags: list[Diagnostic] = []

    def schema(self, path: str, msg: str, module: str | None = None,
               index: int | None = None, ids: tuple[str, ...] = ()) -> None:
        self.diags.append(Diagnostic(
            code="SCHEMA_VIOLATION",
            message=f"{path}: {msg}",
            module=module,
            item_index=index,
            related_ids=ids,
        ))


def _is_ident(v: object) -> bool:
    return isinstance(v, str) and bool(IDENT_RE.match(v))


def _is_width(v: object) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 1


def parse_design(text: str | bytes) -> Design:
    """Parse a UTF-8 JSON document into a Design.

    Raises ParseError carrying one Diagnostic per violation
    (MALFORMED_JSON for undecodable input, SCHEMA_VIOLATION otherwise).
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError([Diagnostic("MALFORMED_JSON", f"not valid UTF-8: {exc}")])
    try:
        doc = json.loads(text, object_pairs_hook=_pairs_hook)
    except _DuplicateKey as exc:
        raise ParseError([Diagnostic("SCHEMA_VIOLATION", str(exc))])
    except json.JSONDecodeError as exc:
        raise ParseError([Diagnostic("MALFORMED_JSON", f"not valid JSON: {exc}")])
    return parse_design_value(doc)


def parse_design_value(doc: object) -> Design:
    """Parse an already-decoded JSON value into a Design (raises ParseError)."""
    col = _Collector()
    modules: list[ModuleDef] = []
    if not isinstance(doc, list):
        col.schema("$", "design must be a JSON array of modules")
    else:
        for i, entry in enumerate(doc):
            m = _parse_module(entry, f"modules[{i}]", col)
            if m is not None:
                modules.append(m)
        seen: dict[str, int] = {}
        for i, m in enumerate(modules):
            if m.name in seen:
                col.schema(f"modules[{i}].name",
                           f"duplicate module name {m.name!r} (first at modules[{seen[m.name]}])",
                           module=m.name)
            else:
                seen[m.name] = i
    if col.diags:
        raise ParseError(col.diags)
    return Design(tuple(modules))


def parse_module_value(obj: object, path: str = "module") -> ModuleDef:
    """Parse a single module object (used for refinement skeletons)."""
    col = _Collector()
    m = _parse_module(obj, path, col)
    if col.diags:
        raise ParseError(col.diags)
    assert m is not None
    return m


def parse_body_items(value: object, module: str) -> tuple[OpItem, ...]:
    """Parse a JSON array of body items (generator output)."""
    col = _Collector()
    if not isinstance(value, list):
        col.schema("body", "generated body must be a JSON array of items", module=module)
        raise ParseError(col.diags)
    items: list[OpItem] = []
    for i, entry in enumerate(value):
        item = _parse_item(entry, f"body[{i}]", module, i, col)
        if item is not None:
            items.append(item)
    if col.diags:
        raise ParseError(col.diags)
    return tuple(items)


def _parse_module(obj: object, path: str, col: _Collector) -> ModuleDef | None:
    if not isinstance(obj, dict):
        col.schema(path, "module must be a JSON object")
        return None
    name = obj.get("name")
    modname = name if isinstance(name, str) else None
    ok = True
    for key in ("name", "ports", "body"):
        if key not in obj:
            col.schema(f"{path}.{key}", "missing required key", module=modname)
            ok = False
    for key in obj:
        if key not in ("name", "ports", "body"):
            col.schema(f"{path}.{key}", f"unexpected key {key!r} on module", module=modname)
            ok = False
    if "name" in obj and not _is_ident(name):
        col.schema(f"{path}.name", f"module name must be an identifier, got {name!r}")
        ok = False

    ports: dict[str, PortDecl] = {}
    rawports = obj.get("ports")
    if "ports" in obj:
        if not isinstance(rawports, dict):
            col.schema(f"{path}.ports", "ports must be an object", module=modname)
            ok = False
        else:
            for pname, decl in rawports.items():
                ppath = f"{path}.ports.{pname}"
                if not _is_ident(pname):
                    col.schema(ppath, f"port name must be an identifier, got {pname!r}",
                               module=modname)
                    ok = False
                    continue
                if not isinstance(decl, dict):
                    col.schema(ppath, "port declaration must be an object", module=modname)
                    ok = False
                    continue
                extra = set(decl) - {"dir", "width"}
                missing = {"dir", "width"} - set(decl)
                for k in sorted(missing):
                    col.schema(f"{ppath}.{k}", "missing required key", module=modname)
                for k in sorted(extra):
                    col.schema(f"{ppath}.{k}", f"unexpected key {k!r} in port declaration",
                               module=modname)
                if missing or extra:
                    ok = False
                    continue
                pdir, width = decl["dir"], decl["width"]
                if pdir not in (INPUT, OUTPUT):
                    col.schema(f"{ppath}.dir", f'dir must be "input" or "output", got {pdir!r}',
                               module=modname)
                    ok = False
                    continue
                if not _is_width(width):
                    col.schema(f"{ppath}.width", f"width must be a positive integer, got {width!r}",
                               module=modname)
                    ok = False
                    continue
                ports[pname] = PortDecl(pdir, width)

    body: list[OpItem] = []
    rawbody = obj.get("body")
    if "body" in obj:
        if not isinstance(rawbody, list):
            col.schema(f"{path}.body", "body must be a JSON array", module=modname)
            ok = False
        else:
            for i, entry in enumerate(rawbody):
                item = _parse_item(entry, f"{path}.body[{i}]", modname, i, col)
                if item is None:
                    ok = False
                else:
                    body.append(item)

    if not ok or modname is None:
        return None
    return ModuleDef(modname, ports, tuple(body))


def _parse_args_map(raw: object, path: str, module: str | None, index: int | None,
                    col: _Collector) -> dict[str, str] | None:
    if not isinstance(raw, dict):
        col.schema(path, "args must be an object mapping port names to identifiers",
                   module=module, index=index)
        return None
    out: dict[str, str] = {}
    ok = True
    for k, v in raw.items():
        if not _is_ident(k):
            col.schema(f"{path}.{k}", f"port name must be an identifier, got {k!r}",
                       module=module, index=index)
            ok = False
        elif not _is_ident(v):
            col.schema(f"{path}.{k}", f"argument must be an identifier, got {v!r}",
                       module=module, index=index)
            ok = False
        else:
            out[k] = v
    return out if ok else None


def _parse_item(obj: object, path: str, module: str | None, index: int,
                col: _Collector) -> OpItem | None:
    if not isinstance(obj, dict):
        col.schema(path, "body item must be a JSON object", module=module, index=index)
        return None
    op = obj.get("op")
    if "op" not in obj:
        col.schema(f"{path}.op", "missing required key", module=module, index=index)
        return None
    if not isinstance(op, str) or op not in OPCODES:
        col.schema(f"{path}.op", f"unknown opcode {op!r}", module=module, index=index)
        return None

    if op == "output":
        extra = set(obj) - {"op", "args"}
        for k in sorted(extra):
            col.schema(f"{path}.{k}", f"unexpected key {k!r} on output item",
                       module=module, index=index)
        if "args" not in obj:
            col.schema(f"{path}.args", "missing required key", module=module, index=index)
            return None
        args = _parse_args_map(obj["args"], f"{path}.args", module, index, col)
        if args is None or extra:
            return None
        return OutputItem(args)

    if op == "instance":
        ok = True
        for key in ("id", "module", "args"):
            if key not in obj:
                col.schema(f"{path}.{key}", "missing required key", module=module, index=index)
                ok = False
        if not ok:
            return None
        ids = obj["id"]
        if (not isinstance(ids, list) or not ids
                or not all(_is_ident(x) for x in ids)):
            col.schema(f"{path}.id",
                       "instance id must be a non-empty array of identifiers",
                       module=module, index=index)
            ok = False
        callee = obj["module"]
        if not _is_ident(callee):
            col.schema(f"{path}.module", f"module must be an identifier, got {callee!r}",
                       module=module, index=index)
            ok = False
        args = _parse_args_map(obj["args"], f"{path}.args", module, index, col)
        if args is None:
            ok = False
        if not ok:
            return None
        attrs = {k: v for k, v in obj.items() if k not in ("id", "op", "module", "args")}
        return InstanceItem(tuple(ids), callee, args, attrs)

    # Value operation: positional args, single result id.
    ok = True
    if "id" not in obj:
        col.schema(f"{path}.id", "missing required key", module=module, index=index)
        ok = False
    else:
        rid = obj["id"]
        if not _is_ident(rid):
            col.schema(f"{path}.id",
                       f"operation id must be a single identifier, got {rid!r}",
                       module=module, index=index)
            ok = False
    if "args" not in obj:
        if op != "const":
            col.schema(f"{path}.args", "missing required key", module=module, index=index)
            ok = False
        args: tuple[str, ...] = ()
    else:
        raw = obj["args"]
        if not isinstance(raw, list):
            col.schema(f"{path}.args",
                       f"value operation {op!r} takes a positional argument list",
                       module=module, index=index)
            ok = False
            args = ()
        elif not all(_is_ident(x) for x in raw):
            col.schema(f"{path}.args", "arguments must be identifiers",
                       module=module, index=index)
            ok = False
            args = ()
        else:
            args = tuple(raw)
    if not ok:
        return None
    attrs = {k: v for k, v in obj.items() if k not in ("id", "op", "args")}
    return OperationItem(obj["id"], op, args, attrs)


# ---------------------------------------------------------------------------
# Serialization


def _canon_attr(value: object) -> object:
    """Sort nested object keys so equal attr values serialize identically."""
    if isinstance(value, dict):
        return {k: _canon_attr(value[k]) for k in sorted(value)}
    if isinstance(value, list):
        return [_canon_attr(v) for v in value]
    return value


def item_to_value(item: OpItem) -> dict:
    if isinstance(item, OperationItem):
        out: dict = {"id": item.id, "op": item.op, "args": list(item.args)}
    elif isinstance(item, InstanceItem):
        out = {"id": list(item.ids), "op": "instance", "module": item.module,
               "args": dict(item.args)}
    else:
        return {"op": "output", "args": dict(item.args)}
    for k in sorted(item.attrs):
        out[k] = _canon_attr(item.attrs[k])
    return out


def module_to_value(m: ModuleDef) -> dict:
    return {
        "name": m.name,
        "ports": {p: {"dir": d.dir, "width": d.width} for p, d in m.ports.items()},
        "body": [item_to_value(it) for it in m.body],
    }


def design_to_value(d: Design) -> list:
    return [module_to_value(m) for m in d.modules]


def serialize_design(d: Design) -> str:
    return json.dumps(design_to_value(d), indent=2) + "\n"


# ---------------------------------------------------------------------------
# Signature lookup


def lookup_signature(d: Design, name: str) -> tuple[list[tuple[str, PortDecl]],
                                                    list[tuple[str, PortDecl]]]:
    """Input and output port declarations of a module, in declaration order."""
    m = d.module(name)
    if m is None:
        raise CompilerError([Diagnostic(
            "UNKNOWN_MODULE", f"no module named {name!r} in design", module=name)])
    return m.input_ports(), m.output_ports()
