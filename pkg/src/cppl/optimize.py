"""Semantics-preserving rewrites: constant folding, common subexpression
elimination, dead code elimination, applied per module in rounds until a
round changes nothing.

Folding is deliberately narrow: an item is rewritten only when every
argument is a constant (plus the one mux special case, where a constant
select turns the item into a width-preserving cast of the taken branch).
There are no algebraic identities, which keeps every rewrite checkable
against the interpreter.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import sim
from .check import mark_dead_code
from .ir import (
    COMB_OPS,
    Design,
    InstanceItem,
    ModuleDef,
    OperationItem,
    OutputItem,
)
from .typer import WidthEnv, infer_design

COMMUTATIVE_OPS = frozenset({"add", "mul", "and", "or", "xor", "eq", "ne"})

MAX_ROUNDS = 16


@dataclass(frozen=True, slots=True)
class PassReport:
    name: str
    items_removed: int = 0
    items_rewritten: int = 0
    iterations: int = 1


def _const_of(item) -> sim.Value | None:
    if isinstance(item, OperationItem) and item.op == "const":
        v = item.attrs["value"]
        if isinstance(v, str):
            v = int(v, 16)
        return sim.Value(item.attrs["width"], v)
    return None


def constant_fold(m: ModuleDef, gamma: WidthEnv) -> tuple[ModuleDef, PassReport]:
    consts: dict[str, sim.Value] = {}
    body = []
    rewritten = 0
    for item in m.body:
        if isinstance(item, OperationItem):
            known = _const_of(item)
            if known is not None:
                consts[item.id] = known
                body.append(item)
                continue
            if item.op in COMB_OPS:
                operands = [consts.get(a) for a in item.args]
                if item.args and all(v is not None for v in operands):
                    value = sim.eval_op(item.op, operands, item.attrs)
                    folded = OperationItem(item.id, "const", (),
                                           {"value": value.bits, "width": value.width})
                    consts[item.id] = value
                    body.append(folded)
                    rewritten += 1
                    continue
                if item.op == "mux" and consts.get(item.args[0]) is not None:
                    taken = item.args[1] if consts[item.args[0]].bits else item.args[2]
                    body.append(OperationItem(item.id, "cast", (taken,),
                                              {"width": gamma[item.id]}))
                    rewritten += 1
                    continue
        body.append(item)
    return ModuleDef(m.name, m.ports, tuple(body)), \
        PassReport("constant_fold", items_rewritten=rewritten)


def _attrs_key(attrs) -> tuple:
    import json

    return tuple(sorted((k, json.dumps(v, sort_keys=True)) for k, v in attrs.items()))


def cse(m: ModuleDef) -> tuple[ModuleDef, PassReport]:
    """Merge structurally identical combinational items; commutative opcodes
    canonicalize argument order before keying.  reg and instance items are
    never merged; all uses are redirected to the earliest definition."""
    rename: dict[str, str] = {}
    seen: dict[tuple, str] = {}
    body = []
    removed = 0

    def fix(arg: str) -> str:
        return rename.get(arg, arg)

    for item in m.body:
        if isinstance(item, OperationItem):
            args = tuple(fix(a) for a in item.args)
            if item.op == "reg":
                body.append(OperationItem(item.id, item.op, args, item.attrs))
                continue
            keyed_args = tuple(sorted(args)) if item.op in COMMUTATIVE_OPS else args
            key = (item.op, keyed_args, _attrs_key(item.attrs))
            survivor = seen.get(key)
            if survivor is None:
                seen[key] = item.id
                body.append(OperationItem(item.id, item.op, args, item.attrs))
            else:
                rename[item.id] = survivor
                removed += 1
        elif isinstance(item, InstanceItem):
            body.append(InstanceItem(item.ids, item.module,
                                     {p: fix(a) for p, a in item.args.items()},
                                     item.attrs))
        else:
            body.append(OutputItem({p: fix(a) for p, a in item.args.items()}))
    return ModuleDef(m.name, m.ports, tuple(body)), \
        PassReport("cse", items_removed=removed)


def dce(m: ModuleDef) -> tuple[ModuleDef, PassReport]:
    dead, _ = mark_dead_code(m)
    body = tuple(item for i, item in enumerate(m.body) if i not in dead)
    return ModuleDef(m.name, m.ports, body), \
        PassReport("dce", items_removed=len(dead))


def run_pipeline(d: Design, enable_opt: bool = True) -> tuple[Design, list[PassReport]]:
    """Repeat [constant_fold -> cse -> dce] per module until a full round
    removes and rewrites nothing.  Disabled mode is the identity."""
    if not enable_opt:
        return d, []
    reports: list[PassReport] = []
    for round_no in range(1, MAX_ROUNDS + 1):
        gammas = infer_design(d)
        changed = 0
        modules = []
        for m in d.modules:
            m, rep_cf = constant_fold(m, gammas[m.name])
            m, rep_cse = cse(m)
            m, rep_dce = dce(m)
            for rep in (rep_cf, rep_cse, rep_dce):
                reports.append(PassReport(rep.name, rep.items_removed,
                                          rep.items_rewritten, round_no))
                changed += rep.items_removed + rep.items_rewritten
            modules.append(m)
        d = Design(tuple(modules))
        if changed == 0:
            return d, reports
    raise RuntimeError(f"optimization did not reach a fixpoint in {MAX_ROUNDS} rounds")
