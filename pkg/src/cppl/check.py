"""Static analyses over parsed designs.

Checks run in a fixed order (symbols, terminator, instance graph, width
inference, combinational loops, dead code); the pipeline module gates each
stage on the previous ones passing for the module.  Identifier uses must
follow their definitions, with one exception: the d and rst arguments of a
reg item may forward-reference, since register feedback is the one legal
way for a value to depend on something defined later.
"""

from __future__ import annotations

from .diagnostics import Diagnostic
from .ir import (
    Design,
    InstanceItem,
    ModuleDef,
    OperationItem,
    OutputItem,
    defined_ids,
)

# Positions within a reg item's args that may forward-reference: d and rst.
_REG_FORWARD_POSITIONS = frozenset({0, 3})


def _definitions(m: ModuleDef) -> dict[str, int]:
    """First definition index per id; ports map to -1."""
    defs: dict[str, int] = {p: -1 for p in m.ports}
    for i, item in enumerate(m.body):
        for rid in defined_ids(item):
            defs.setdefault(rid, i)
    return defs


def check_symbols(m: ModuleDef) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    defs: dict[str, int] = {p: -1 for p in m.ports}
    for i, item in enumerate(m.body):
        for rid in defined_ids(item):
            if rid in defs:
                where = "a port" if defs[rid] < 0 else f"item {defs[rid]}"
                diags.append(Diagnostic(
                    "DUPLICATE_ID",
                    f"id {rid!r} at item {i} is already defined by {where}",
                    module=m.name, item_index=i, related_ids=(rid,)))
            else:
                defs[rid] = i

    for i, item in enumerate(m.body):
        if isinstance(item, OperationItem):
            uses = [(pos, a) for pos, a in enumerate(item.args)]
            is_reg = item.op == "reg"
        elif isinstance(item, InstanceItem):
            uses = [(pos, a) for pos, a in enumerate(item.args.values())]
            is_reg = False
        else:
            uses = [(pos, a) for pos, a in enumerate(item.args.values())]
            is_reg = False
        for pos, arg in uses:
            if arg not in defs:
                diags.append(Diagnostic(
                    "UNKNOWN_ID", f"item {i} uses undefined id {arg!r}",
                    module=m.name, item_index=i, related_ids=(arg,)))
                continue
            if is_reg and pos in _REG_FORWARD_POSITIONS:
                continue
            if defs[arg] >= i:
                diags.append(Diagnostic(
                    "USE_BEFORE_DEF",
                    f"item {i} uses {arg!r} before its definition at item {defs[arg]}",
                    module=m.name, item_index=i, related_ids=(arg,)))
    return diags


def check_terminator(m: ModuleDef) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    outputs = [(i, it) for i, it in enumerate(m.body) if isinstance(it, OutputItem)]
    if not outputs:
        diags.append(Diagnostic(
            "MISSING_OUTPUT", "module body has no output item", module=m.name))
        return diags
    if len(outputs) > 1:
        positions = ", ".join(str(i) for i, _ in outputs)
        diags.append(Diagnostic(
            "MULTIPLE_OUTPUT", f"module body has {len(outputs)} output items (at {positions})",
            module=m.name, item_index=outputs[1][0]))
        return diags
    index, terminator = outputs[0]
    if index != len(m.body) - 1:
        diags.append(Diagnostic(
            "OUTPUT_NOT_LAST", f"output item at {index} is not the last body item",
            module=m.name, item_index=index))
    declared = {p for p, d in m.ports.items() if d.dir == "output"}
    for port in terminator.args:
        if port not in declared:
            diags.append(Diagnostic(
                "UNKNOWN_PORT", f"output item binds {port!r}, which is not a declared output port",
                module=m.name, item_index=index, related_ids=(port,)))
    for port in m.ports:
        if port in declared and port not in terminator.args:
            diags.append(Diagnostic(
                "UNBOUND_OUTPUT_PORT", f"declared output port {port!r} is not bound",
                module=m.name, item_index=index, related_ids=(port,)))
    return diags


def check_instance_graph(d: Design) -> tuple[list[Diagnostic], list[str]]:
    """Validates instance references and acyclicity; returns (diags, topo order).

    The order lists callees before callers so width inference can resolve
    instance result widths from already-typed signatures.
    """
    diags: list[Diagnostic] = []
    names = [m.name for m in d.modules]
    known = set(names)
    deps: dict[str, set[str]] = {n: set() for n in names}
    for m in d.modules:
        for i, item in enumerate(m.body):
            if isinstance(item, InstanceItem):
                if item.module not in known:
                    diags.append(Diagnostic(
                        "UNKNOWN_MODULE",
                        f"instance of undeclared module {item.module!r}",
                        module=m.name, item_index=i, related_ids=(item.module,)))
                else:
                    deps[m.name].add(item.module)

    order: list[str] = []
    placed: set[str] = set()
    remaining = list(names)
    while remaining:
        ready = [n for n in remaining if deps[n] <= placed]
        if not ready:
            break
        order.extend(ready)
        placed.update(ready)
        remaining = [n for n in remaining if n not in placed]

    if remaining:
        graph = {n: tuple(sorted(deps[n] & set(remaining))) for n in remaining}
        for scc in _tarjan_sccs(graph):
            if len(scc) > 1 or scc[0] in graph.get(scc[0], ()):
                diags.append(Diagnostic(
                    "RECURSIVE_INSTANTIATION",
                    "recursive instantiation cycle: " + " -> ".join(scc + [scc[0]]),
                    module=scc[0], related_ids=tuple(scc)))
    return diags, order


def build_dep_graph(m: ModuleDef) -> dict[str, tuple[str, ...]]:
    """Combinational value-dependency graph of one module body.

    Nodes are body-defined ids; an edge result -> arg means the result
    combinationally depends on the arg.  reg results contribute no edges
    (registers break cycles); instance results conservatively depend on
    every instance argument.
    """
    local = set()
    for item in m.body:
        local.update(defined_ids(item))
    graph: dict[str, tuple[str, ...]] = {}
    for item in m.body:
        if isinstance(item, OperationItem):
            if item.op == "reg":
                graph[item.id] = ()
            else:
                graph[item.id] = tuple(a for a in item.args if a in local)
        elif isinstance(item, InstanceItem):
            args = tuple(a for a in item.args.values() if a in local)
            for rid in item.ids:
                graph[rid] = args
    return graph


def _tarjan_sccs(graph: dict[str, tuple[str, ...]]) -> list[list[str]]:
    """Strongly connected components (iterative Tarjan), deterministic order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = [0]

    for root in graph:
        if root in index:
            continue
        work: list[tuple[str, int]] = [(root, 0)]
        while work:
            node, pi = work.pop()
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on_stack.add(node)
            recursed = False
            succs = graph.get(node, ())
            for j in range(pi, len(succs)):
                nxt = succs[j]
                if nxt not in graph:
                    continue
                if nxt not in index:
                    work.append((node, j + 1))
                    work.append((nxt, 0))
                    recursed = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if recursed:
                continue
            if low[node] == index[node]:
                scc = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    scc.append(member)
                    if member == node:
                        break
                sccs.append(sorted(scc, key=lambda n: index[n]))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return sccs


def find_comb_sccs(graph: dict[str, tuple[str, ...]]) -> list[list[str]]:
    """SCCs that constitute combinational loops (size >= 2, or a self-loop)."""
    loops = []
    for scc in _tarjan_sccs(graph):
        if len(scc) > 1 or scc[0] in graph.get(scc[0], ()):
            loops.append(scc)
    return loops


def detect_comb_loops(m: ModuleDef) -> list[Diagnostic]:
    graph = build_dep_graph(m)
    defs = _definitions(m)
    diags = []
    for scc in find_comb_sccs(graph):
        members = sorted(scc, key=lambda rid: defs.get(rid, 0))
        diags.append(Diagnostic(
            "COMB_LOOP",
            "combinational loop through " + ", ".join(members),
            module=m.name,
            item_index=min(defs.get(rid, 0) for rid in members),
            related_ids=tuple(members)))
    diags.sort(key=lambda d: d.item_index or 0)
    return diags


def mark_dead_code(m: ModuleDef) -> tuple[set[int], list[Diagnostic]]:
    """Reverse reachability from the output bindings.

    An instance is live iff any of its result ids is reachable; a live reg
    keeps all its args (including clk/en/rst) alive.  Returns the dead item
    indices (what the optimizer removes) and one DEAD_CODE warning each.
    """
    defs = _definitions(m)
    output_index = None
    needed: list[str] = []
    for i, item in enumerate(m.body):
        if isinstance(item, OutputItem):
            output_index = i
            needed.extend(item.args.values())

    live_items: set[int] = set()
    seen_ids: set[str] = set()
    while needed:
        rid = needed.pop()
        if rid in seen_ids:
            continue
        seen_ids.add(rid)
        idx = defs.get(rid, -1)
        if idx < 0 or idx in live_items:
            continue
        live_items.add(idx)
        item = m.body[idx]
        if isinstance(item, OperationItem):
            needed.extend(item.args)
        elif isinstance(item, InstanceItem):
            needed.extend(item.args.values())

    dead: set[int] = set()
    diags: list[Diagnostic] = []
    for i, item in enumerate(m.body):
        if i == output_index or i in live_items:
            continue
        dead.add(i)
        ids = defined_ids(item)
        label = ", ".join(ids) if ids else "item"
        diags.append(Diagnostic(
            "DEAD_CODE", f"{label} at item {i} is unused and will be removed",
            module=m.name, item_index=i, related_ids=ids))
    return dead, diags
