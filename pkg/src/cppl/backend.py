"""Deterministic lowering to a netlist and text emission.

Two emitters share the netlist: a CIRCT-flavored textual dump (hw/comb/seq
style, for inspection and golden-file tests only) and synthesizable
Verilog.  Verilog keeps one continuous assign per combinational cell and
one always block per register; instance result nets are renamed to
_<InstanceName>_<port>.  Both emitters are pure functions of the netlist,
so equal designs produce byte-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir import (
    Design,
    InstanceItem,
    ModuleDef,
    OperationItem,
    OutputItem,
)
from .typer import WidthEnv


@dataclass(frozen=True, slots=True)
class Net:
    name: str
    width: int
    kind: str  # "port" | "wire" | "reg"


@dataclass(frozen=True, slots=True)
class Cell:
    op: str
    inputs: tuple[str, ...]
    output: str
    attrs: dict


@dataclass(frozen=True, slots=True)
class InstanceBind:
    callee: str
    name: str
    port_map: dict  # callee input port -> net id
    result_nets: dict  # callee output port -> result net id


@dataclass
class ModuleNetlist:
    name: str
    ports: list[tuple[str, str, int]]  # (name, dir, width)
    nets: list[Net] = field(default_factory=list)
    cells: list[Cell] = field(default_factory=list)
    instances: list[InstanceBind] = field(default_factory=list)
    outputs: dict = field(default_factory=dict)  # output port -> net id
    instance_results: dict = field(default_factory=dict)  # net id -> (inst, port)


@dataclass
class Netlist:
    modules: list[ModuleNetlist]
    signatures: dict  # module -> ordered (output port, width) list


def lower(d: Design, gammas: dict[str, WidthEnv]) -> Netlist:
    """Lower a checked, typed design; instance names are <Callee>_<k> with a
    per-callee counter in body order."""
    signatures = {m.name: [(p, decl.width) for p, decl in m.output_ports()]
                  for m in d.modules}
    modules = []
    for m in d.modules:
        gamma = gammas[m.name]
        nl = ModuleNetlist(
            name=m.name,
            ports=[(p, decl.dir, decl.width) for p, decl in m.ports.items()],
        )
        counters: dict[str, int] = {}
        for item in m.body:
            if isinstance(item, OperationItem):
                kind = "reg" if item.op == "reg" else "wire"
                nl.nets.append(Net(item.id, gamma[item.id], kind))
                nl.cells.append(Cell(item.op, item.args, item.id, dict(item.attrs)))
            elif isinstance(item, InstanceItem):
                k = counters.get(item.module, 0)
                counters[item.module] = k + 1
                inst_name = f"{item.module}_{k}"
                result_nets = {}
                callee_outputs = signatures[item.module]
                for rid, (port, width) in zip(item.ids, callee_outputs):
                    nl.nets.append(Net(rid, width, "wire"))
                    result_nets[port] = rid
                    nl.instance_results[rid] = (inst_name, port)
                nl.instances.append(InstanceBind(item.module, inst_name,
                                                 dict(item.args), result_nets))
            elif isinstance(item, OutputItem):
                nl.outputs = dict(item.args)
        modules.append(nl)
    return Netlist(modules, signatures)


# ---------------------------------------------------------------------------
# CIRCT-flavored textual dump

_ICMP_PRED = {"eq": "eq", "ne": "ne", "ult": "ult", "ule": "ule",
              "ugt": "ugt", "uge": "uge"}


class _CirctModuleEmitter:
    def __init__(self, nl: ModuleNetlist, netlist: Netlist):
        self.nl = nl
        self.netlist = netlist
        self.lines: list[str] = []
        self.consts: dict[tuple[int, int], str] = {}  # (value-as-signed, width) -> symbol
        self.alias: dict[str, str] = {}  # equal-width casts resolve to their source
        self.widths = {n.name: n.width for n in nl.nets}
        self.widths.update({p: w for p, _, w in nl.ports})

    def sym(self, net: str) -> str:
        return "%" + self.alias.get(net, net)

    def material_const(self, signed_value: int, width: int) -> str:
        key = (signed_value, width)
        if key not in self.consts:
            name = f"%c{signed_value}_i{width}"
            self.lines.append(f"    {name} = hw.constant {signed_value} : i{width}")
            self.consts[key] = name
        return self.consts[key]

    def emit(self) -> str:
        nl = self.nl
        parts = []
        for p, d, w in nl.ports:
            if d == "input":
                parts.append(f"in %{p} : i{w}")
            else:
                parts.append(f"out {p} : i{w}")
        self.lines.append(f"  hw.module @{nl.name}({', '.join(parts)}) {{")

        # nets were appended in body order, so walking them reproduces it
        produced: set[str] = set()
        cells_by_out = {c.output: c for c in nl.cells}
        inst_by_result = {}
        for inst in nl.instances:
            for rid in inst.result_nets.values():
                inst_by_result[rid] = inst
        for net in nl.nets:
            if net.name in produced:
                continue
            if net.name in cells_by_out:
                produced.add(net.name)
                self.emit_cell(cells_by_out[net.name])
            elif net.name in inst_by_result:
                inst = inst_by_result[net.name]
                produced.update(inst.result_nets.values())
                self.emit_instance(inst)
        outs = ", ".join(self.sym(nl.outputs[p]) for p, d, _ in nl.ports if d == "output")
        out_types = ", ".join(f"i{w}" for _, d, w in nl.ports if d == "output")
        if outs:
            self.lines.append(f"    hw.output {outs} : {out_types}")
        else:
            self.lines.append("    hw.output")
        self.lines.append("  }")
        return "\n".join(self.lines)

    def emit_cell(self, cell: Cell) -> None:
        op, out = cell.op, cell.output
        w = self.widths[out]
        args = [self.sym(a) for a in cell.inputs]
        aw = self.widths[cell.inputs[0]] if cell.inputs else w
        line = None
        if op == "const":
            v = cell.attrs["value"]
            if isinstance(v, str):
                v = int(v, 16)
            line = f"%{out} = hw.constant {v} : i{w}"
        elif op == "not":
            ones = self.material_const(-1, w)
            line = f"%{out} = comb.xor {args[0]}, {ones} : i{w}"
        elif op == "neg":
            zero = self.material_const(0, w)
            line = f"%{out} = comb.sub {zero}, {args[0]} : i{w}"
        elif op == "and_reduce":
            ones = self.material_const(-1, aw)
            line = f"%{out} = comb.icmp eq {args[0]}, {ones} : i{aw}"
        elif op == "or_reduce":
            zero = self.material_const(0, aw)
            line = f"%{out} = comb.icmp ne {args[0]}, {zero} : i{aw}"
        elif op == "xor_reduce":
            line = f"%{out} = comb.parity {args[0]} : i{aw}"
        elif op in ("add", "sub", "mul", "and", "or", "xor", "shl"):
            line = f"%{out} = comb.{op} {args[0]}, {args[1]} : i{w}"
        elif op == "shr":
            line = f"%{out} = comb.shru {args[0]}, {args[1]} : i{w}"
        elif op in _ICMP_PRED:
            line = f"%{out} = comb.icmp {_ICMP_PRED[op]} {args[0]}, {args[1]} : i{aw}"
        elif op == "mux":
            line = f"%{out} = comb.mux {args[0]}, {args[1]}, {args[2]} : i{w}"
        elif op == "concat":
            types = ", ".join(f"i{self.widths[a]}" for a in cell.inputs)
            line = f"%{out} = comb.concat {', '.join(args)} : {types}"
        elif op == "extract":
            lo = cell.attrs["lowBit"]
            line = f"%{out} = comb.extract {args[0]} from {lo} : (i{aw}) -> i{w}"
        elif op == "cast":
            if aw == w:
                self.alias[out] = self.alias.get(cell.inputs[0], cell.inputs[0])
                return
            zero = self.material_const(0, w - aw)
            line = f"%{out} = comb.concat {zero}, {args[0]} : i{w - aw}, i{aw}"
        elif op == "reg":
            d, clk, en = args[0], args[1], args[2]
            if len(args) > 3:
                rv = self.material_const(cell.attrs.get("resetValue", 0), w)
                line = (f"%{out} = seq.compreg.ce {d}, {clk}, {en} "
                        f"reset {args[3]}, {rv} : i{w}")
            else:
                line = f"%{out} = seq.compreg.ce {d}, {clk}, {en} : i{w}"
        assert line is not None, f"unhandled opcode {op}"
        self.lines.append("    " + line)

    def emit_instance(self, inst: InstanceBind) -> None:
        results = ", ".join(f"%{rid}" for rid in inst.result_nets.values())
        ins = ", ".join(f"{p}: {self.sym(a)}: i{self.widths[a]}"
                        for p, a in inst.port_map.items())
        outs = ", ".join(f"{p}: i{self.widths[rid]}"
                         for p, rid in inst.result_nets.items())
        self.lines.append(
            f'    {results} = hw.instance "{inst.name}" @{inst.callee}({ins}) -> ({outs})')


def emit_circt_text(n: Netlist) -> str:
    if not n.modules:
        return "module {\n}\n"
    chunks = ["module {"]
    for nl in n.modules:
        chunks.append(_CirctModuleEmitter(nl, n).emit())
    chunks.append("}")
    return "\n".join(chunks) + "\n"


# ---------------------------------------------------------------------------
# Verilog emission

_VERILOG_KEYWORDS = frozenset({
    "always", "assign", "begin", "case", "default", "else", "end", "endcase",
    "endfunction", "endmodule", "for", "function", "if", "inout", "initial",
    "input", "integer", "localparam", "module", "negedge", "output",
    "parameter", "posedge", "reg", "signed", "wire",
})


def _range(width: int) -> str:
    return f"[{width - 1}:0] " if width > 1 else ""


def _literal(width: int, value: int) -> str:
    return f"{width}'d{value}"


class _VerilogModuleEmitter:
    def __init__(self, nl: ModuleNetlist):
        self.nl = nl
        self.widths = {p: w for p, _, w in nl.ports}
        self.widths.update({n.name: n.width for n in nl.nets})
        self.names: dict[str, str] = {}
        taken = {p for p, _, _ in nl.ports}
        for net in nl.nets:
            if net.name in nl.instance_results:
                inst, port = nl.instance_results[net.name]
                candidate = f"_{inst}_{port}"
            else:
                candidate = net.name
            while candidate in taken or candidate in _VERILOG_KEYWORDS:
                candidate += "_"
            assert candidate not in taken, "net name collision"
            taken.add(candidate)
            self.names[net.name] = candidate

    def ref(self, net: str) -> str:
        return self.names.get(net, net)

    def expr(self, cell: Cell) -> str:
        op = cell.op
        a = [self.ref(x) for x in cell.inputs]
        if op == "const":
            v = cell.attrs["value"]
            if isinstance(v, str):
                v = int(v, 16)
            return _literal(self.widths[cell.output], v)
        if op == "not":
            return f"~{a[0]}"
        if op == "neg":
            return f"-{a[0]}"
        if op == "and_reduce":
            return f"&{a[0]}"
        if op == "or_reduce":
            return f"|{a[0]}"
        if op == "xor_reduce":
            return f"^{a[0]}"
        binops = {"add": "+", "sub": "-", "mul": "*", "and": "&", "or": "|",
                  "xor": "^", "shl": "<<", "shr": ">>", "eq": "==", "ne": "!=",
                  "ult": "<", "ule": "<=", "ugt": ">", "uge": ">="}
        if op in binops:
            return f"{a[0]} {binops[op]} {a[1]}"
        if op == "mux":
            return f"{a[0]} ? {a[1]} : {a[2]}"
        if op == "concat":
            return "{" + ", ".join(a) + "}"
        if op == "extract":
            lo, w = cell.attrs["lowBit"], cell.attrs["width"]
            return f"{a[0]}[{lo + w - 1}:{lo}]"
        if op == "cast":
            src_w = self.widths[cell.inputs[0]]
            dst_w = self.widths[cell.output]
            if src_w == dst_w:
                return a[0]
            return "{" + f"{{{dst_w - src_w}{{1'b0}}}}, {a[0]}" + "}"
        raise AssertionError(f"unhandled opcode {op}")

    def emit(self) -> str:
        nl = self.nl
        lines: list[str] = [f"module {nl.name}("]
        decls = []
        for p, d, w in nl.ports:
            decls.append(f"  {'input ' if d == 'input' else 'output'} {_range(w)}{p}")
        lines.append(",\n".join(decls))
        lines.append(");")
        lines.append("")
        for net in nl.nets:
            kw = "reg" if net.kind == "reg" else "wire"
            lines.append(f"  {kw} {_range(net.width)}{self.ref(net.name)};")
        if nl.nets:
            lines.append("")
        for inst in nl.instances:
            lines.append(f"  {inst.callee} {inst.name} (")
            conns = [f"    .{p} ({self.ref(a)})" for p, a in inst.port_map.items()]
            conns += [f"    .{p} ({self.ref(rid)})" for p, rid in inst.result_nets.items()]
            lines.append(",\n".join(conns))
            lines.append("  );")
        for cell in nl.cells:
            if cell.op == "reg":
                continue
            lines.append(f"  assign {self.ref(cell.output)} = {self.expr(cell)};")
        for cell in nl.cells:
            if cell.op != "reg":
                continue
            q = self.ref(cell.output)
            d, clk, en = (self.ref(x) for x in cell.inputs[:3])
            lines.append(f"  always @(posedge {clk})")
            if len(cell.inputs) > 3:
                rst = self.ref(cell.inputs[3])
                rv = _literal(self.widths[cell.output], cell.attrs.get("resetValue", 0))
                lines.append(f"    if ({rst}) {q} <= {rv};")
                lines.append(f"    else if ({en}) {q} <= {d};")
            else:
                lines.append(f"    if ({en}) {q} <= {d};")
        for p, dirn, _ in nl.ports:
            if dirn == "output":
                lines.append(f"  assign {p} = {self.ref(nl.outputs[p])};")
        lines.append("endmodule")
        return "\n".join(lines)


def emit_verilog(n: Netlist) -> str:
    return "\n\n".join(_VerilogModuleEmitter(nl).emit() for nl in n.modules) + "\n"
