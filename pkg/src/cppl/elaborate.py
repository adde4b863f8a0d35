"""Structural elaboration: from architectural phrases (or a parsed design)
to a hierarchy graph.

A hierarchy graph H = (V, E_h, E_w) holds module/instance vertices, parent
-> child hierarchy edges and port-to-port wiring edges.  Elaborating a
phrase only ever hangs vertices under the given parent; wiring never
touches the hierarchy, so the hierarchy-only projection of the result is
isomorphic to the parse tree of the phrase.  check_preservation verifies
that property executably by rebuilding the tree from syntax alone and
searching for the isomorphism.

Connect endpoints use dotted `vertex.port` paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .ir import Design, InstanceItem


class ElaborationError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


# --- phrases ---------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ModuleDecl:
    name: str


@dataclass(frozen=True, slots=True)
class Inst:
    name: str
    module: str
    rest: "Phrase"


@dataclass(frozen=True, slots=True)
class Connect:
    src: str
    dst: str
    rest: "Phrase"


@dataclass(frozen=True, slots=True)
class Seq:
    first: "Phrase"
    second: "Phrase"


@dataclass(frozen=True, slots=True)
class Empty:
    pass


Phrase = Union[ModuleDecl, Inst, Connect, Seq, Empty]


@dataclass(frozen=True, slots=True)
class HierGraph:
    vertices: frozenset[str]
    hier_edges: frozenset[tuple[str, str]]
    wire_edges: frozenset[tuple[str, str]]


EMPTY_GRAPH = HierGraph(frozenset(), frozenset(), frozenset())


def elaborate(env: Mapping[str, object], root: str, s: Phrase) -> HierGraph:
    """Big-step elaboration of a phrase under parent `root`.

    env maps known module names to their port-name collections.  Raises
    ElaborationError with codes UNKNOWN_MODULE, UNKNOWN_PORT or
    DUPLICATE_INSTANCE for ill-formed phrases.
    """
    vertices, hier, wires, _ = _elab(env, root, s)
    return HierGraph(frozenset(vertices), frozenset(hier), frozenset(wires))


def _elab(env, root, s):
    if isinstance(s, Empty):
        return set(), set(), set(), {}
    if isinstance(s, ModuleDecl):
        return {s.name}, {(root, s.name)}, set(), {s.name: s.name}
    if isinstance(s, Inst):
        v, eh, ew, binding = _elab(env, root, s.rest)
        if s.module not in env:
            raise ElaborationError("UNKNOWN_MODULE",
                                   f"instance {s.name!r} of unknown module {s.module!r}")
        if s.name in v:
            raise ElaborationError("DUPLICATE_INSTANCE",
                                   f"vertex {s.name!r} declared twice under {root!r}")
        v.add(s.name)
        eh.add((root, s.name))
        binding[s.name] = s.module
        return v, eh, ew, binding
    if isinstance(s, Connect):
        v, eh, ew, binding = _elab(env, root, s.rest)
        for endpoint in (s.src, s.dst):
            vertex, _, port = endpoint.partition(".")
            if vertex not in v or not port:
                raise ElaborationError("UNKNOWN_PORT",
                                       f"connect endpoint {endpoint!r} does not name a port of an in-scope vertex")
            ports = env.get(binding.get(vertex, vertex), ())
            if port not in ports:
                raise ElaborationError("UNKNOWN_PORT",
                                       f"{port!r} is not a port of {vertex!r}")
        ew.add((s.src, s.dst))
        return v, eh, ew, binding
    if isinstance(s, Seq):
        v1, eh1, ew1, b1 = _elab(env, root, s.first)
        v2, eh2, ew2, b2 = _elab(env, root, s.second)
        clash = v1 & v2
        if clash:
            raise ElaborationError("DUPLICATE_INSTANCE",
                                   f"vertex {sorted(clash)[0]!r} declared twice under {root!r}")
        b1.update(b2)
        return v1 | v2, eh1 | eh2, ew1 | ew2, b1
    raise ElaborationError("ILL_FORMED", f"not a phrase: {s!r}")


def struct_projection(h: HierGraph) -> tuple[frozenset[str], frozenset[tuple[str, str]]]:
    """Drop wiring edges, keep the hierarchy."""
    return h.vertices, h.hier_edges


# --- preservation ----------------------------------------------------------


def syntactic_tree(s: Phrase, root: str) -> dict[str, list[str]]:
    """Parse tree of a phrase as parent -> ordered children, built purely
    from the syntax (the independent side of the preservation check)."""
    children: dict[str, list[str]] = {root: []}

    def walk(phrase: Phrase) -> None:
        if isinstance(phrase, ModuleDecl):
            children[root].append(phrase.name)
            children.setdefault(phrase.name, [])
        elif isinstance(phrase, Inst):
            walk(phrase.rest)
            children[root].append(phrase.name)
            children.setdefault(phrase.name, [])
        elif isinstance(phrase, Connect):
            walk(phrase.rest)
        elif isinstance(phrase, Seq):
            walk(phrase.first)
            walk(phrase.second)

    walk(s)
    return children


@dataclass(frozen=True, slots=True)
class PreservationResult:
    ok: bool
    mapping: dict | None
    detail: str = ""


def _tree_isomorphism(tree_a: dict[str, list[str]], root_a: str,
                      tree_b: dict[str, list[str]], root_b: str) -> dict | None:
    """Label-preserving rooted-tree isomorphism (labels are vertex names)."""
    mapping: dict[str, str] = {}

    def match(a: str, b: str) -> bool:
        if a != b:
            return False
        ca = sorted(tree_a.get(a, []))
        cb = sorted(tree_b.get(b, []))
        if ca != cb:
            return False
        mapping[a] = b
        return all(match(x, y) for x, y in zip(ca, cb))

    return mapping if match(root_a, root_b) else None


def check_preservation(s: Phrase, root: str,
                       env: Mapping[str, object] | None = None) -> PreservationResult:
    """Elaborate s, project out the wiring, and exhibit the isomorphism with
    the syntactic parse tree (or a counterexample)."""
    env = env if env is not None else {}
    try:
        h = elaborate(env, root, s)
    except ElaborationError as exc:
        raise ElaborationError("ILL_FORMED", str(exc)) from exc
    vertices, hier = struct_projection(h)

    graph_children: dict[str, list[str]] = {root: []}
    for v in vertices:
        graph_children.setdefault(v, [])
    for parent, child in sorted(hier):
        graph_children.setdefault(parent, []).append(child)

    tree = syntactic_tree(s, root)
    mapping = _tree_isomorphism(graph_children, root, tree, root)
    if mapping is None:
        return PreservationResult(False, None,
                                  f"graph {sorted(hier)} != tree {sorted(tree.items())}")
    return PreservationResult(True, mapping)


# --- design hierarchy ------------------------------------------------------


def instance_vertex(module_name: str, ordinal: int) -> str:
    return f"{module_name}/instance#{ordinal}"


def design_hierarchy(d: Design) -> HierGraph:
    """Hierarchy graph of a parsed design: one vertex per module, one vertex
    per instance item (named <Module>/instance#<k> by instance order), wiring
    edges for instance arg bindings and output bindings."""
    known = {m.name for m in d.modules}
    vertices: set[str] = set(known)
    hier: set[tuple[str, str]] = set()
    wires: set[tuple[str, str]] = set()
    for m in d.modules:
        ordinal = 0
        for item in m.body:
            if isinstance(item, InstanceItem):
                if item.module not in known:
                    raise ElaborationError(
                        "UNKNOWN_MODULE",
                        f"{m.name}: instance of undeclared module {item.module!r}")
                v = instance_vertex(m.name, ordinal)
                ordinal += 1
                vertices.add(v)
                hier.add((m.name, v))
                for port, arg in item.args.items():
                    wires.add((f"{m.name}.{arg}", f"{v}.{port}"))
            elif hasattr(item, "op") and item.op == "output":
                for port, arg in item.args.items():
                    wires.add((f"{m.name}.{arg}", f"{m.name}.{port}"))
    return HierGraph(frozenset(vertices), frozenset(hier), frozenset(wires))


def to_dot(h: HierGraph) -> str:
    """Debug rendering of a hierarchy graph as DOT text."""
    lines = ["digraph hierarchy {"]
    for v in sorted(h.vertices):
        lines.append(f'  "{v}";')
    for a, b in sorted(h.hier_edges):
        lines.append(f'  "{a}" -> "{b}";')
    for a, b in sorted(h.wire_edges):
        lines.append(f'  "{a}" -> "{b}" [style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
