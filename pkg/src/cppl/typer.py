"""Width inference.

Widths are the IR's only type: every value is an unsigned integer of a
declared or inferred bit width.  Inference starts from a module's input
ports and applies one rule per opcode until a fixpoint; items whose
arguments are not yet typed are deferred to the next pass, which is how
register forward references resolve (the reg width comes from the item's
own width attribute, and the premise on d is checked once everything else
is bound).  Rule names (T-Const, T-Bin, T-Mux, ...) appear in diagnostic
messages so a generator can be told exactly which constraint failed.
"""

from __future__ import annotations

from typing import NamedTuple

from .diagnostics import Diagnostic, InferenceError
from .ir import (
    BINARY_OPS,
    CMP_OPS,
    Design,
    InstanceItem,
    ModuleDef,
    OperationItem,
    OutputItem,
    REDUCE_OPS,
    UNARY_OPS,
)

WidthEnv = dict[str, int]


class ModuleSignature(NamedTuple):
    inputs: tuple[tuple[str, int], ...]
    outputs: tuple[tuple[str, int], ...]


SignatureEnv = dict[str, ModuleSignature]


def build_signature_env(d: Design) -> SignatureEnv:
    env: SignatureEnv = {}
    for m in d.modules:
        env[m.name] = ModuleSignature(
            inputs=tuple((p, decl.width) for p, decl in m.ports.items()
                         if decl.dir == "input"),
            outputs=tuple((p, decl.width) for p, decl in m.ports.items()
                          if decl.dir == "output"),
        )
    return env


def _attr_uint(attrs, key) -> int | None:
    v = attrs.get(key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        return None
    return v


def _const_value(attrs) -> int | None:
    """Const value attr: non-negative integer or "0x"-prefixed string."""
    v = attrs.get("value")
    if isinstance(v, bool):
        return None
    if isinstance(v, int):
        return v if v >= 0 else None
    if isinstance(v, str) and v.startswith("0x"):
        try:
            return int(v, 16)
        except ValueError:
            return None
    return None


class _ModuleTyper:
    def __init__(self, sigma: SignatureEnv, m: ModuleDef):
        self.sigma = sigma
        self.m = m
        self.gamma: WidthEnv = {p: d.width for p, d in m.ports.items()
                                if d.dir == "input"}
        self.diags: list[Diagnostic] = []

    def error(self, code: str, index: int, msg: str, ids: tuple[str, ...] = ()):
        self.diags.append(Diagnostic(code, msg, module=self.m.name,
                                     item_index=index, related_ids=ids))

    def mismatch(self, rule: str, index: int, msg: str, ids: tuple[str, ...] = ()):
        self.error("WIDTH_MISMATCH", index, f"{rule}: {msg}", ids)

    def run(self) -> WidthEnv:
        body = self.m.body
        pending = [i for i, it in enumerate(body) if not isinstance(it, OutputItem)]
        passes = 0
        while pending:
            passes += 1
            assert passes <= len(body) + 1, "width inference failed to make progress"
            deferred = []
            for i in pending:
                if not self._type_item(i, body[i]):
                    deferred.append(i)
            if len(deferred) == len(pending):
                # no progress: every deferred item depends on a value whose
                # definition already failed; root causes are reported above
                assert self.diags, "inference stalled without a diagnostic"
                break
            pending = deferred
        self._check_reg_premises()
        self._check_outputs()
        if self.diags:
            raise InferenceError(self.diags)
        return self.gamma

    # returns True when the item is fully handled (typed or errored out)
    def _type_item(self, i: int, item) -> bool:
        if isinstance(item, InstanceItem):
            return self._type_instance(i, item)
        assert isinstance(item, OperationItem)
        op, args, attrs = item.op, item.args, item.attrs

        if op == "const":
            w = _attr_uint(attrs, "width")
            if w is None or w < 1:
                self.error("BAD_ATTR", i, "const requires a positive integer width attr",
                           (item.id,))
                return True
            v = _const_value(attrs)
            if v is None:
                self.error("BAD_ATTR", i,
                           'const requires a non-negative integer (or "0x" string) value attr',
                           (item.id,))
            elif v >= 2 ** w:
                self.error("BAD_ATTR", i, f"const value {v} does not fit in {w} bits",
                           (item.id,))
            self._bind(i, item.id, w)
            return True

        if op == "reg":
            w = _attr_uint(attrs, "width")
            if w is None or w < 1:
                self.error("BAD_ATTR", i, "reg requires a positive integer width attr",
                           (item.id,))
                return True
            rv = attrs.get("resetValue")
            if rv is not None:
                if isinstance(rv, bool) or not isinstance(rv, int) or rv < 0:
                    self.error("BAD_ATTR", i, "resetValue must be a non-negative integer",
                               (item.id,))
                elif rv >= 2 ** w:
                    self.error("BAD_ATTR", i,
                               f"resetValue {rv} does not fit in {w} bits", (item.id,))
            self._bind(i, item.id, w)
            return True

        # every other operation needs all argument widths first
        widths = []
        for a in args:
            if a not in self.gamma:
                return False
            widths.append(self.gamma[a])

        if op in UNARY_OPS:
            if len(args) != 1:
                self.mismatch("T-Unary", i, f"{op} expects 1 argument, got {len(args)}",
                              (item.id,))
                return True
            self._bind(i, item.id, widths[0])
        elif op in REDUCE_OPS:
            if len(args) != 1:
                self.mismatch("T-Reduce", i, f"{op} expects 1 argument, got {len(args)}",
                              (item.id,))
                return True
            self._bind(i, item.id, 1)
        elif op in BINARY_OPS:
            if len(args) != 2:
                self.mismatch("T-Bin", i, f"{op} expects 2 arguments, got {len(args)}",
                              (item.id,))
                return True
            if widths[0] != widths[1]:
                self.mismatch("T-Bin", i,
                              f"{op} operands must have equal widths, got i{widths[0]} and i{widths[1]}",
                              (item.id,))
            self._bind(i, item.id, widths[0])
        elif op in CMP_OPS:
            if len(args) != 2:
                self.mismatch("T-Cmp", i, f"{op} expects 2 arguments, got {len(args)}",
                              (item.id,))
                return True
            if widths[0] != widths[1]:
                self.mismatch("T-Cmp", i,
                              f"{op} operands must have equal widths, got i{widths[0]} and i{widths[1]}",
                              (item.id,))
            self._bind(i, item.id, 1)
        elif op == "mux":
            if len(args) != 3:
                self.mismatch("T-Mux", i, f"mux expects 3 arguments, got {len(args)}",
                              (item.id,))
                return True
            if widths[0] != 1:
                self.mismatch("T-Mux", i, f"select must have width 1, got i{widths[0]}",
                              (item.id,))
            if widths[1] != widths[2]:
                self.mismatch("T-Mux", i,
                              f"branches must have equal widths, got i{widths[1]} and i{widths[2]}",
                              (item.id,))
            self._bind(i, item.id, widths[1])
        elif op == "cast":
            if len(args) != 1:
                self.mismatch("T-Cast", i, f"cast expects 1 argument, got {len(args)}",
                              (item.id,))
                return True
            w = _attr_uint(attrs, "width")
            if w is None or w < 1:
                self.error("BAD_ATTR", i, "cast requires a positive integer width attr",
                           (item.id,))
                self._bind(i, item.id, widths[0])
                return True
            if widths[0] > w:
                self.mismatch("T-Cast", i,
                              f"cast is zero-extension only: source i{widths[0]} exceeds target i{w}",
                              (item.id,))
            self._bind(i, item.id, w)
        elif op == "concat":
            if len(args) < 1:
                self.mismatch("T-Concat", i, "concat expects at least 1 argument",
                              (item.id,))
                return True
            self._bind(i, item.id, sum(widths))
        elif op == "extract":
            if len(args) != 1:
                self.mismatch("T-Extract", i, f"extract expects 1 argument, got {len(args)}",
                              (item.id,))
                return True
            lo = attrs.get("lowBit")
            w = _attr_uint(attrs, "width")
            if isinstance(lo, bool) or not isinstance(lo, int) or lo < 0:
                self.error("BAD_ATTR", i,
                           "extract requires a non-negative integer lowBit attr", (item.id,))
                lo = None
            if w is None or w < 1:
                self.error("BAD_ATTR", i, "extract requires a positive integer width attr",
                           (item.id,))
                self._bind(i, item.id, widths[0])
                return True
            if lo is not None and lo + w > widths[0]:
                self.mismatch("T-Extract", i,
                              f"bits [{lo}, {lo + w}) exceed source width i{widths[0]}",
                              (item.id,))
            self._bind(i, item.id, w)
        else:  # pragma: no cover; parse guarantees opcode membership
            raise AssertionError(f"unhandled opcode {op}")
        return True

    def _type_instance(self, i: int, item: InstanceItem) -> bool:
        sig = self.sigma.get(item.module)
        if sig is None:
            self.error("UNKNOWN_MODULE", i,
                       f"instance of unknown module {item.module!r}", (item.module,))
            return True
        input_widths = dict(sig.inputs)
        for port in item.args:
            if port not in input_widths:
                self.error("UNKNOWN_PORT", i,
                           f"T-Inst: {port!r} is not an input port of {item.module}",
                           (port,))
        # all bound arg values must be typed before the premise check
        for port, arg in item.args.items():
            if port in input_widths and arg not in self.gamma:
                return False
        for port, w in sig.inputs:
            if port not in item.args:
                self.mismatch("T-Inst", i,
                              f"input port {port!r} of {item.module} is not bound", (port,))
                continue
            got = self.gamma[item.args[port]]
            if got != w:
                self.mismatch("T-Inst", i,
                              f"binding for {port!r} must have width i{w}, got i{got}",
                              (item.args[port],))
        if len(item.ids) != len(sig.outputs):
            self.mismatch("T-Inst", i,
                          f"{item.module} has {len(sig.outputs)} outputs but {len(item.ids)} result ids are bound",
                          item.ids)
        for rid, (_, w) in zip(item.ids, sig.outputs):
            self._bind(i, rid, w)
        return True

    def _bind(self, index: int, rid: str, width: int) -> None:
        prev = self.gamma.get(rid)
        assert prev is None or prev == width, f"rebinding {rid}: {prev} -> {width}"
        self.gamma[rid] = width

    def _check_reg_premises(self) -> None:
        for i, item in enumerate(self.m.body):
            if not (isinstance(item, OperationItem) and item.op == "reg"):
                continue
            if item.id not in self.gamma:
                continue  # width attr was bad; already reported
            w = self.gamma[item.id]
            if len(item.args) not in (3, 4):
                self.mismatch("T-Reg", i,
                              f"reg expects args [d, clk, en] or [d, clk, en, rst], got {len(item.args)}",
                              (item.id,))
                continue
            names = ["d", "clk", "en", "rst"]
            expected = [w, 1, 1, 1]
            for pos, arg in enumerate(item.args):
                got = self.gamma.get(arg)
                if got is None:
                    continue  # the defining item failed; root cause reported there
                if got != expected[pos]:
                    self.mismatch("T-Reg", i,
                                  f"{names[pos]} must have width i{expected[pos]}, got i{got}",
                                  (arg,))

    def _check_outputs(self) -> None:
        declared = {p: d.width for p, d in self.m.ports.items() if d.dir == "output"}
        for i, item in enumerate(self.m.body):
            if not isinstance(item, OutputItem):
                continue
            for port, arg in item.args.items():
                if port not in declared:
                    continue  # terminator check reports UNKNOWN_PORT
                got = self.gamma.get(arg)
                if got is None:
                    continue
                if got != declared[port]:
                    self.mismatch("T-Out", i,
                                  f"output {port!r} is declared i{declared[port]} but {arg!r} has width i{got}",
                                  (port, arg))


def infer_module(sigma: SignatureEnv, m: ModuleDef) -> WidthEnv:
    """Infer widths for one module body; raises InferenceError on failure."""
    return _ModuleTyper(sigma, m).run()


def infer_design(d: Design) -> dict[str, WidthEnv]:
    """Infer all modules in topological order; all succeed or the aggregated
    diagnostic set is raised."""
    from .check import check_instance_graph

    diags, order = check_instance_graph(d)
    if diags:
        raise InferenceError(diags)
    sigma = build_signature_env(d)
    envs: dict[str, WidthEnv] = {}
    failures: list[Diagnostic] = []
    for name in order:
        try:
            envs[name] = infer_module(sigma, d.module(name))
        except InferenceError as exc:
            failures.extend(exc.diagnostics)
    if failures:
        raise InferenceError(failures)
    return envs
