"""Shorthand builders for IR values used across the test suite."""

from __future__ import annotations

from cppl.ir import (
    Design,
    InstanceItem,
    ModuleDef,
    OperationItem,
    OutputItem,
    PortDecl,
)


def ports(**decls) -> dict[str, PortDecl]:
    """ports(a=("input", 8), o=("output", 8))"""
    return {name: PortDecl(d, w) for name, (d, w) in decls.items()}


def op(rid: str, opcode: str, *args: str, **attrs) -> OperationItem:
    return OperationItem(rid, opcode, tuple(args), attrs)


def const(rid: str, value: int, width: int) -> OperationItem:
    return OperationItem(rid, "const", (), {"value": value, "width": width})


def inst(ids, module: str, **bindings) -> InstanceItem:
    if isinstance(ids, str):
        ids = (ids,)
    return InstanceItem(tuple(ids), module, dict(bindings), {})


def out(**bindings) -> OutputItem:
    return OutputItem(dict(bindings))


def module(name: str, port_map, *body) -> ModuleDef:
    return ModuleDef(name, dict(port_map), tuple(body))


def design(*modules: ModuleDef) -> Design:
    return Design(tuple(modules))


def identity_module(name: str = "Ident", width: int = 8) -> ModuleDef:
    return module(name, ports(a=("input", width), o=("output", width)), out(o="a"))
