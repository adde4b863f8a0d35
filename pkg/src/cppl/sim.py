"""Reference interpreter for the circuit IR.

This is the executable semantics: every value is an unsigned integer in
[0, 2^width), arithmetic is modular, comparisons are unsigned, shifts are
logical with results saturating to zero once the amount reaches the width.
Two-state simulation only; clk is not modelled as a wire; step() is
exactly one rising edge, on which every register simultaneously takes
resetValue (when rst is present and high), its d input (when en is high),
or holds.

The interpreter is the oracle the optimizer and the Verilog backend are
validated against, so it stays deliberately simple: straight-line
evaluation of the body in order, recursing into instances.
"""

from __future__ import annotations

from typing import Mapping, NamedTuple

from .ir import (
    Design,
    InstanceItem,
    ModuleDef,
    OperationItem,
    OutputItem,
)


class ContractViolation(Exception):
    """An internal precondition of the simulator was violated."""


class Value(NamedTuple):
    width: int
    bits: int


def make_value(width: int, bits: int) -> Value:
    if width < 1:
        raise ContractViolation(f"width must be >= 1, got {width}")
    if not 0 <= bits < (1 << width):
        raise ContractViolation(f"{bits} does not fit in {width} bits")
    return Value(width, bits)


def _require_equal(args, op):
    w = args[0].width
    for a in args[1:]:
        if a.width != w:
            raise ContractViolation(f"{op}: operand widths differ: {args}")
    return w


def _arity(op, args, n):
    if len(args) != n:
        raise ContractViolation(f"{op}: expected {n} operands, got {len(args)}")


def eval_op(op: str, args: list[Value], attrs: Mapping | None = None) -> Value:
    """Evaluate one combinational opcode on already-typed operands."""
    attrs = attrs or {}
    if op == "const":
        v = attrs["value"]
        if isinstance(v, str):
            v = int(v, 16)
        return make_value(attrs["width"], v)
    if op == "not":
        _arity(op, args, 1)
        (a,) = args
        return Value(a.width, a.bits ^ ((1 << a.width) - 1))
    if op == "neg":
        _arity(op, args, 1)
        (a,) = args
        return Value(a.width, (-a.bits) % (1 << a.width))
    if op in ("and_reduce", "or_reduce", "xor_reduce"):
        _arity(op, args, 1)
        (a,) = args
        if op == "and_reduce":
            return Value(1, int(a.bits == (1 << a.width) - 1))
        if op == "or_reduce":
            return Value(1, int(a.bits != 0))
        return Value(1, bin(a.bits).count("1") & 1)
    if op in ("add", "sub", "mul", "and", "or", "xor", "shl", "shr"):
        _arity(op, args, 2)
        w = _require_equal(args, op)
        a, b = args[0].bits, args[1].bits
        mask = (1 << w) - 1
        if op == "add":
            return Value(w, (a + b) & mask)
        if op == "sub":
            return Value(w, (a - b) & mask)
        if op == "mul":
            return Value(w, (a * b) & mask)
        if op == "and":
            return Value(w, a & b)
        if op == "or":
            return Value(w, a | b)
        if op == "xor":
            return Value(w, a ^ b)
        if op == "shl":
            return Value(w, (a << b) & mask if b < w else 0)
        return Value(w, a >> b if b < w else 0)
    if op in ("eq", "ne", "ult", "ule", "ugt", "uge"):
        _arity(op, args, 2)
        _require_equal(args, op)
        a, b = args[0].bits, args[1].bits
        result = {"eq": a == b, "ne": a != b, "ult": a < b,
                  "ule": a <= b, "ugt": a > b, "uge": a >= b}[op]
        return Value(1, int(result))
    if op == "mux":
        _arity(op, args, 3)
        s, t, f = args
        if s.width != 1:
            raise ContractViolation(f"mux: select must be 1 bit, got {s.width}")
        if t.width != f.width:
            raise ContractViolation("mux: branch widths differ")
        return t if s.bits else f
    if op == "cast":
        _arity(op, args, 1)
        (a,) = args
        w = attrs["width"]
        if a.width > w:
            raise ContractViolation(f"cast: cannot narrow i{a.width} to i{w}")
        return Value(w, a.bits)
    if op == "concat":
        if not args:
            raise ContractViolation("concat: needs at least one operand")
        bits = 0
        width = 0
        for a in args:  # most-significant first
            bits = (bits << a.width) | a.bits
            width += a.width
        return Value(width, bits)
    if op == "extract":
        _arity(op, args, 1)
        (a,) = args
        lo, w = attrs["lowBit"], attrs["width"]
        if lo < 0 or lo + w > a.width:
            raise ContractViolation(f"extract: bits [{lo}, {lo + w}) out of range for i{a.width}")
        return Value(w, (a.bits >> lo) & ((1 << w) - 1))
    raise ContractViolation(f"eval_op cannot evaluate opcode {op!r}")


# ---------------------------------------------------------------------------
# Module-level evaluation

SimState = dict  # reg id -> Value, plus "instance#<k>" -> nested SimState


def _instance_key(ordinal: int) -> str:
    return f"instance#{ordinal}"


def initial_state(d: Design, top: str) -> SimState:
    """All registers zero, recursively through instances."""
    m = _module(d, top)
    state: SimState = {}
    ordinal = 0
    for item in m.body:
        if isinstance(item, OperationItem) and item.op == "reg":
            state[item.id] = Value(item.attrs["width"], 0)
        elif isinstance(item, InstanceItem):
            state[_instance_key(ordinal)] = initial_state(d, item.module)
            ordinal += 1
    return state


def _module(d: Design, name: str) -> ModuleDef:
    m = d.module(name)
    if m is None:
        raise ContractViolation(f"no module named {name!r}")
    return m


def _coerce_inputs(m: ModuleDef, inputs: Mapping) -> dict[str, Value]:
    coerced: dict[str, Value] = {}
    for port, decl in m.ports.items():
        if decl.dir != "input":
            continue
        if port not in inputs:
            raise ContractViolation(f"missing input {port!r}")
        v = inputs[port]
        if isinstance(v, Value):
            if v.width != decl.width:
                raise ContractViolation(
                    f"input {port!r} must be i{decl.width}, got i{v.width}")
            coerced[port] = v
        else:
            coerced[port] = make_value(decl.width, v)
    return coerced


def _run_module(d: Design, m: ModuleDef, inputs: dict[str, Value],
                state: SimState, advance: bool):
    values = dict(inputs)
    outputs: dict[str, Value] = {}
    new_state: SimState = {}
    ordinal = 0
    for item in m.body:
        if isinstance(item, OperationItem):
            if item.op == "reg":
                if item.id not in state:
                    raise ContractViolation(f"state is missing register {item.id!r}")
                values[item.id] = state[item.id]
            else:
                values[item.id] = eval_op(item.op, [values[a] for a in item.args],
                                          item.attrs)
        elif isinstance(item, InstanceItem):
            callee = _module(d, item.module)
            sub_inputs = {port: values[arg] for port, arg in item.args.items()}
            key = _instance_key(ordinal)
            ordinal += 1
            sub_out, sub_state = _run_module(d, callee, sub_inputs,
                                             state.get(key, {}), advance)
            for rid, (port, _) in zip(item.ids, callee.output_ports()):
                values[rid] = sub_out[port]
            if advance:
                new_state[key] = sub_state
        else:
            assert isinstance(item, OutputItem)
            for port, arg in item.args.items():
                outputs[port] = values[arg]
    if advance:
        for item in m.body:
            if isinstance(item, OperationItem) and item.op == "reg":
                w = state[item.id].width
                en = values[item.args[2]].bits
                rst = values[item.args[3]].bits if len(item.args) > 3 else 0
                if rst:
                    nxt = Value(w, item.attrs.get("resetValue", 0))
                elif en:
                    d_val = values[item.args[0]]
                    if d_val.width != w:
                        raise ContractViolation(
                            f"reg {item.id!r}: d is i{d_val.width}, state is i{w}")
                    nxt = d_val
                else:
                    nxt = state[item.id]
                new_state[item.id] = nxt
    return outputs, new_state


def eval_comb(d: Design, top: str, inputs: Mapping,
              state: SimState | None = None) -> dict[str, Value]:
    """Combinational outputs for the given inputs and register state."""
    m = _module(d, top)
    state = state if state is not None else initial_state(d, top)
    outputs, _ = _run_module(d, m, _coerce_inputs(m, inputs), state, advance=False)
    return outputs


def step(d: Design, top: str, inputs: Mapping,
         state: SimState) -> tuple[SimState, dict[str, Value]]:
    """One clock edge: returns (next state, this cycle's outputs)."""
    m = _module(d, top)
    outputs, new_state = _run_module(d, m, _coerce_inputs(m, inputs), state,
                                     advance=True)
    return new_state, outputs


def run_vectors(d: Design, top: str, steps: list[Mapping]) -> list[dict[str, int]]:
    """Drive step() over a vector sequence; returns plain-int output maps.

    Matches the CLI vector format: steps is a list of {"inputs": {port: int}}.
    """
    state = initial_state(d, top)
    results = []
    for entry in steps:
        state, outputs = step(d, top, entry.get("inputs", {}), state)
        results.append({port: v.bits for port, v in outputs.items()})
    return results
