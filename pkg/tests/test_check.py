import random

from cppl.check import (
    build_dep_graph,
    check_instance_graph,
    check_symbols,
    check_terminator,
    detect_comb_loops,
    find_comb_sccs,
    mark_dead_code,
)
from util import design, inst, module, op, out, ports


def codes(diags):
    return [d.code for d in diags]


class TestSymbols:
    def test_alu_clean(self, alu_design):
        for m in alu_design.modules:
            assert check_symbols(m) == []

    def test_self_reference(self):
        m = module("m", ports(o=("output", 1)), op("x", "not", "x"), out(o="x"))
        diags = check_symbols(m)
        assert codes(diags) == ["USE_BEFORE_DEF"]
        assert diags[0].item_index == 0

    def test_unknown_id(self):
        m = module("m", ports(o=("output", 1)), op("x", "not", "ghost"), out(o="x"))
        assert codes(check_symbols(m)) == ["UNKNOWN_ID"]

    def test_duplicate_id(self):
        m = module("m", ports(a=("input", 1), o=("output", 1)),
                   op("t", "not", "a"), op("t", "not", "a"), out(o="t"))
        diags = check_symbols(m)
        assert codes(diags) == ["DUPLICATE_ID"]
        assert diags[0].item_index == 1
        assert "item 0" in diags[0].message

    def test_duplicate_with_port(self):
        m = module("m", ports(a=("input", 1), o=("output", 1)),
                   op("a", "not", "a"), out(o="a"))
        diags = check_symbols(m)
        assert codes(diags) == ["DUPLICATE_ID"]
        assert "port" in diags[0].message

    def test_reg_d_may_forward_reference(self):
        m = module("m", ports(clk=("input", 1), en=("input", 1), o=("output", 4)),
                   op("q", "reg", "d", "clk", "en", width=4),
                   op("d", "not", "q"),
                   out(o="q"))
        assert check_symbols(m) == []

    def test_reg_clk_must_be_defined_before(self):
        m = module("m", ports(en=("input", 1), o=("output", 4)),
                   op("q", "reg", "d", "clk_late", "en", width=4),
                   op("d", "not", "q"),
                   op("clk_late", "const", value=0, width=1),
                   out(o="q"))
        assert codes(check_symbols(m)) == ["USE_BEFORE_DEF"]


class TestTerminator:
    def test_adder8_clean(self, alu_design):
        assert check_terminator(alu_design.module("Adder8")) == []

    def test_unbound_output_port(self):
        m = module("m", ports(a=("input", 8), res=("output", 8), zero=("output", 1)),
                   out(res="a"))
        diags = check_terminator(m)
        assert codes(diags) == ["UNBOUND_OUTPUT_PORT"]
        assert diags[0].related_ids == ("zero",)

    def test_output_not_last(self):
        m = module("m", ports(a=("input", 1), o=("output", 1)),
                   out(o="a"), op("x", "not", "a"), op("y", "not", "x"))
        assert codes(check_terminator(m)) == ["OUTPUT_NOT_LAST"]

    def test_missing_output(self):
        m = module("m", ports(a=("input", 1)), op("x", "not", "a"))
        assert codes(check_terminator(m)) == ["MISSING_OUTPUT"]

    def test_multiple_output(self):
        m = module("m", ports(a=("input", 1), o=("output", 1)),
                   out(o="a"), out(o="a"))
        assert codes(check_terminator(m)) == ["MULTIPLE_OUTPUT"]

    def test_binding_unknown_port(self):
        m = module("m", ports(a=("input", 1), o=("output", 1)),
                   out(o="a", ghost="a"))
        assert codes(check_terminator(m)) == ["UNKNOWN_PORT"]

    def test_binding_to_input_port_rejected(self):
        m = module("m", ports(a=("input", 1), o=("output", 1)),
                   out(o="a", a="a"))
        assert codes(check_terminator(m)) == ["UNKNOWN_PORT"]


class TestInstanceGraph:
    def test_alu_order(self, alu_design):
        diags, order = check_instance_graph(alu_design)
        assert diags == []
        assert order == ["Adder8", "ALU"]

    def test_two_cycle(self):
        a = module("A", ports(o=("output", 1)), inst("x", "B"), out(o="x"))
        b = module("B", ports(o=("output", 1)), inst("y", "A"), out(o="y"))
        diags, _ = check_instance_graph(design(a, b))
        assert codes(diags) == ["RECURSIVE_INSTANTIATION"]
        assert set(diags[0].related_ids) == {"A", "B"}

    def test_self_instantiation(self):
        a = module("A", ports(o=("output", 1)), inst("x", "A"), out(o="x"))
        diags, _ = check_instance_graph(design(a))
        assert codes(diags) == ["RECURSIVE_INSTANTIATION"]

    def test_no_instances_declaration_order(self):
        d = design(module("B", ports(o=("output", 1)), out(o="o2")),
                   module("A", ports(o=("output", 1)), out(o="o2")))
        diags, order = check_instance_graph(d)
        assert diags == []
        assert order == ["B", "A"]

    def test_unknown_module(self):
        a = module("A", ports(o=("output", 1)), inst("x", "Foo"), out(o="x"))
        diags, _ = check_instance_graph(design(a))
        assert codes(diags) == ["UNKNOWN_MODULE"]


class TestCombLoops:
    def test_alu_feed_forward(self, alu_design):
        for m in alu_design.modules:
            assert detect_comb_loops(m) == []

    def test_register_breaks_cycle(self):
        m = module("m", ports(clk=("input", 1), en=("input", 1), o=("output", 4)),
                   op("q", "reg", "d", "clk", "en", width=4),
                   op("d", "not", "q"),
                   out(o="q"))
        assert detect_comb_loops(m) == []

    def test_two_node_cycle(self):
        # constructed directly; symbol discipline would reject this body
        m = module("m", ports(o=("output", 1)),
                   op("a", "not", "b"), op("b", "not", "a"), out(o="a"))
        diags = detect_comb_loops(m)
        assert codes(diags) == ["COMB_LOOP"]
        assert diags[0].related_ids == ("a", "b")

    def test_self_loop(self):
        m = module("m", ports(a=("input", 1), o=("output", 1)),
                   op("x", "and", "x", "a"), out(o="x"))
        diags = detect_comb_loops(m)
        assert codes(diags) == ["COMB_LOOP"]
        assert diags[0].related_ids == ("x",)

    def test_instance_conservative_dependency(self):
        callee = module("C", ports(i=("input", 1), o=("output", 1)), out(o="i"))
        m = module("m", ports(o=("output", 1)),
                   inst("r", "C", i="r"),
                   out(o="r"))
        assert codes(detect_comb_loops(m)) == ["COMB_LOOP"]

    def test_random_graphs_match_dfs_oracle(self):
        rng = random.Random(7)
        for _ in range(60):
            n = rng.randint(2, 30)
            nodes = [f"n{i}" for i in range(n)]
            graph = {}
            for i, node in enumerate(nodes):
                succs = [nodes[j] for j in range(n)
                         if j != i and rng.random() < 0.08]
                if rng.random() < 0.02:
                    succs.append(node)
                graph[node] = tuple(succs)
            assert bool(find_comb_sccs(graph)) == _has_cycle_dfs(graph)


def _has_cycle_dfs(graph):
    """Independent brute-force cycle oracle (recursive 3-color DFS)."""
    color = {n: 0 for n in graph}

    def visit(n):
        color[n] = 1
        for s in graph.get(n, ()):
            if s not in color:
                continue
            if color[s] == 1:
                return True
            if color[s] == 0 and visit(s):
                return True
        color[n] = 2
        return False

    return any(color[n] == 0 and visit(n) for n in graph)


class TestDeadCode:
    def test_alu_all_live(self, alu_design):
        dead, diags = mark_dead_code(alu_design.module("ALU"))
        assert dead == set()
        assert diags == []

    def test_unused_operation(self, alu_design):
        alu = alu_design.module("ALU")
        body = list(alu.body)
        body.insert(1, op("unused", "not", "op_a"))
        m = module("ALU", alu.ports, *body)
        dead, diags = mark_dead_code(m)
        assert dead == {1}
        assert codes(diags) == ["DEAD_CODE"]
        assert diags[0].severity == "warning"

    def test_unused_instance(self):
        callee = module("C", ports(i=("input", 1), o=("output", 1)), out(o="i"))
        m = module("m", ports(a=("input", 1), o=("output", 1)),
                   inst("r", "C", i="a"),
                   op("x", "not", "a"),
                   out(o="x"))
        dead, _ = mark_dead_code(m)
        assert dead == {0}

    def test_live_reg_keeps_everything(self):
        m = module("m", ports(clk=("input", 1), en=("input", 1), o=("output", 4)),
                   op("q", "reg", "d", "clk", "en", width=4),
                   op("d", "not", "q"),
                   out(o="q"))
        dead, _ = mark_dead_code(m)
        assert dead == set()

    def test_dependency_of_output_never_dead(self, alu_design):
        alu = alu_design.module("ALU")
        dead, _ = mark_dead_code(alu)
        # every transitive dependency of res/zero is live
        assert dead == set()


def test_dep_graph_shape(alu_design):
    g = build_dep_graph(alu_design.module("ALU"))
    assert g["adder8_sum"] == ()  # args are ports, not body-defined
    assert g["mux_lo"] == ("sel0", "sub_res", "adder8_sum")
    assert g["is_zero"] == ("any_set",)
