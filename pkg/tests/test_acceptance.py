"""Acceptance suite.

Each test implements one acceptance criterion at its stated tolerance and
prints one PASS line on success (run with -s or check captured output).
"""

import itertools
import json
import random
import shutil
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from cppl import cli
from cppl.check import detect_comb_loops, find_comb_sccs
from cppl.elaborate import check_preservation
from cppl.ir import ModuleDef, OperationItem, parse_design, serialize_design
from cppl.optimize import run_pipeline
from cppl.pipeline import analyze_design, compile_design
from cppl.refine import (
    GenerationRequest,
    RefineConfig,
    RefinementExhausted,
    refine_module,
)
from cppl.sim import eval_comb, initial_state, step
from cppl.typer import build_signature_env, infer_module
from cppl.evalkit import ProblemOutcomes, pass_at_k

from corpus import build_corpus, random_inputs
from genmod import MUTATIONS, random_module
from test_elaborate import ENV as PHRASE_ENV
from test_elaborate import random_phrase
from test_evalkit import brute_force_pass_at_k
from test_sim import alu_oracle
from test_typer import ALU_GAMMA
from util import module, op, out, ports

DATA = Path(__file__).parent / "data"
MOCK = DATA / "mock_generator.py"


def report(name: str) -> None:
    print(f"[ACCEPTANCE] {name}: PASS")


# ---------------------------------------------------------------------------


def test_golden_alu_chain(alu_text):
    started = time.perf_counter()

    design = parse_design(alu_text)
    analysis = analyze_design(design)
    assert analysis.ok
    assert not [d for d in analysis.diagnostics if d.severity == "error"]

    sigma = build_signature_env(design)
    assert infer_module(sigma, design.module("ALU")) == ALU_GAMMA

    result = compile_design(design, want_circt=True)
    assert result.ok
    assert "module Adder8(" in result.verilog
    assert "module ALU(" in result.verilog
    assert "Adder8 Adder8_0 (" in result.verilog

    rng = random.Random(0xA10)
    state = initial_state(design, "ALU")
    for opcode in range(4):
        for _ in range(64):
            a, b = rng.randrange(256), rng.randrange(256)
            outs = eval_comb(design, "ALU",
                             {"op_code": opcode, "op_a": a, "op_b": b}, state)
            res, zero = alu_oracle(opcode, a, b)
            assert (outs["res"].bits, outs["zero"].bits) == (res, zero)

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"golden chain took {elapsed:.2f}s (limit 1s)"
    report(f"golden ALU chain ({elapsed * 1000:.0f} ms)")


def test_exhaustive_alu_equivalence(alu_design):
    started = time.perf_counter()
    state = initial_state(alu_design, "ALU")
    for opcode in range(4):
        for a in range(256):
            for b in range(256):
                outs = eval_comb(alu_design, "ALU",
                                 {"op_code": opcode, "op_a": a, "op_b": b}, state)
                res, zero = alu_oracle(opcode, a, b)
                assert outs["res"].bits == res and outs["zero"].bits == zero, \
                    (opcode, a, b)
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"exhaustive sweep took {elapsed:.1f}s (limit 60s)"
    report(f"exhaustive ALU equivalence, 2^18 vectors ({elapsed:.1f} s)")


def test_structural_preservation_property():
    rng = random.Random(0x517)
    checked = 0
    while checked < 200:
        phrase = random_phrase(rng)
        result = check_preservation(phrase, "root", PHRASE_ENV)
        assert result.ok, result.detail
        checked += 1
    report("structural preservation, 200 random phrases")


def test_typing_soundness_and_mutations():
    rng = random.Random(0x7E57)
    sound = 0
    for _ in range(500):
        m, widths = random_module(rng, seq=rng.random() < 0.4)
        env = infer_module({}, m)
        assert env == widths
        sound += 1

    from cppl.diagnostics import InferenceError

    caught = 0
    for k in range(500):
        m, widths = random_module(rng, seq=False)
        mutated, rule = MUTATIONS[k % len(MUTATIONS)](m, widths)
        try:
            infer_module({}, mutated)
        except InferenceError as exc:
            assert any(rule in d.message for d in exc.diagnostics), \
                (rule, [d.message for d in exc.diagnostics])
            caught += 1
        else:
            raise AssertionError(f"mutation {rule} was not rejected")
    assert sound == 500 and caught == 500
    report("typing soundness (500) and single-rule mutations (500)")


def test_optimizer_preservation():
    corpus = build_corpus()
    assert len(corpus) == 25
    for name, design in corpus:
        optimized, _ = run_pipeline(design)
        again, reports = run_pipeline(optimized)
        assert again == optimized, f"{name}: pipeline is not idempotent"

        top = design.modules[-1].name
        rng = random.Random(hash(name) & 0xFFFF)
        state_a = initial_state(design, top)
        state_b = initial_state(optimized, top)
        for _ in range(1000):
            inputs = random_inputs(rng, design, top)
            state_a, outs_a = step(design, top, inputs, state_a)
            state_b, outs_b = step(optimized, top, inputs, state_b)
            assert outs_a == outs_b, f"{name}: outputs diverge on {inputs}"

    crafted = dict(corpus)["fold_then_cse"]
    optimized, reports = run_pipeline(crafted)
    rounds = max(r.iterations for r in reports)
    assert rounds <= 3
    assert len(optimized.modules[0].body) < len(crafted.modules[0].body)
    report("optimizer preservation over 25 designs x 1000 vectors")


def test_comb_loop_detection_oracle():
    from test_check import _has_cycle_dfs

    rng = random.Random(0xC1C)
    agreements = 0
    for _ in range(100):
        n = rng.randint(2, 30)
        nodes = [f"n{i}" for i in range(n)]
        graph = {}
        for i, node in enumerate(nodes):
            succs = [nodes[j] for j in range(n) if j != i and rng.random() < 0.07]
            if rng.random() < 0.03:
                succs.append(node)
            graph[node] = tuple(succs)
        assert bool(find_comb_sccs(graph)) == _has_cycle_dfs(graph)
        agreements += 1
    assert agreements == 100

    # a register inserted on any cycle edge clears the diagnostic
    for trial in range(20):
        rng2 = random.Random(trial)
        n = rng2.randint(3, 10)
        cycle = [f"n{i}" for i in range(n)]
        body = []
        for i, node in enumerate(cycle):
            nxt = cycle[(i + 1) % n]
            body.append(op(node, "not", nxt))
        body.append(out(o=cycle[0]))
        looped = module("m", ports(o=("output", 1)), *body)
        assert detect_comb_loops(looped), "constructed cycle must be detected"

        # break edge (k -> k+1) with a register
        k = rng2.randrange(n)
        broken_body = []
        for i, node in enumerate(cycle):
            nxt = cycle[(i + 1) % n]
            if i == k:
                broken_body.append(op(node, "reg", nxt, "clk", "en", width=1))
            else:
                broken_body.append(op(node, "not", nxt))
        broken_body.append(out(o=cycle[0]))
        broken = module("m", ports(clk=("input", 1), en=("input", 1),
                                   o=("output", 1)), *broken_body)
        assert detect_comb_loops(broken) == []
    report("combinational loop detection vs DFS oracle (100 graphs)")


def _alu_skeleton_and_remainder(alu_design):
    alu = alu_design.module("ALU")
    skeleton = ModuleDef("ALU", alu.ports, alu.body[:1])
    from cppl.ir import item_to_value

    remainder = [item_to_value(it) for it in alu.body[1:]]
    return skeleton, remainder


def test_refinement_bound(alu_design):
    skeleton, remainder = _alu_skeleton_and_remainder(alu_design)
    bad = [{"id": "x", "op": "add", "args": ["op_a", "op_code"]},
           {"op": "output", "args": {"res": "x", "zero": "x"}}]

    result = refine_module(GenerationRequest(skeleton), RefineConfig(n_max=3),
                           lambda req: remainder, alu_design)
    assert result.attempts == 1

    result = refine_module(GenerationRequest(skeleton), RefineConfig(n_max=3),
                           lambda req: remainder if req.attempt == 2 else bad,
                           alu_design)
    assert result.attempts == 3

    calls = []

    def never(req):
        calls.append(req.attempt)
        return bad

    with pytest.raises(RefinementExhausted) as ei:
        refine_module(GenerationRequest(skeleton), RefineConfig(n_max=3),
                      never, alu_design)
    assert calls == [0, 1, 2]
    assert len(ei.value.history) == 3
    report("refinement bound: attempts 1 / 3 / exhausted at n_max=3")


def test_pass_at_k_exactness():
    assert pass_at_k([ProblemOutcomes("p", 10, 7)], 1) == 0.7

    rng = random.Random(0x9A55)
    for _ in range(50):
        n = rng.randint(1, 12)
        c = rng.randint(0, n)
        k = rng.randint(1, n)
        assert pass_at_k([ProblemOutcomes("p", n, c)], k) == \
            float(brute_force_pass_at_k(n, c, k))

    outcomes = [ProblemOutcomes(str(i), 8, rng.randint(0, 8)) for i in range(40)]
    expected = Fraction(sum(1 for p in outcomes if p.c >= 1), len(outcomes))
    assert pass_at_k(outcomes, 8) == float(expected)
    report("pass@k exactness (50 brute-force triples)")


def test_compile_determinism(tmp_path):
    corpus = build_corpus()
    for name, design in corpus:
        src = tmp_path / f"{name}.json"
        src.write_text(serialize_design(design))
        outputs = []
        for run in range(2):
            v = tmp_path / f"{name}.{run}.v"
            c = tmp_path / f"{name}.{run}.mlir"
            code = cli.main(["compile", str(src), "-o", str(v),
                             "--emit-circt", str(c)])
            assert code == 0, name
            outputs.append((v.read_bytes(), c.read_bytes()))
        assert outputs[0] == outputs[1], f"{name}: non-deterministic output"
    report("determinism: byte-identical Verilog + CIRCT dumps, 25 designs x 2 runs")


IVERILOG = shutil.which("iverilog")


@pytest.mark.skipif(IVERILOG is None, reason="no Verilog simulator installed")
def test_external_conformance(tmp_path, alu_design):
    """Optional, non-gating: emitted Verilog parses and matches the
    interpreter on the golden vectors when iverilog is available."""
    result = compile_design(alu_design)
    src = tmp_path / "alu.v"
    src.write_text(result.verilog)

    rng = random.Random(1)
    vectors = [(rng.randrange(4), rng.randrange(256), rng.randrange(256))
               for _ in range(64)]
    expected = [alu_oracle(*v) for v in vectors]

    bench_lines = [
        "module tb;",
        "  reg [1:0] op_code; reg [7:0] op_a, op_b;",
        "  wire [7:0] res; wire zero;",
        "  ALU dut(.op_code(op_code), .op_a(op_a), .op_b(op_b), .res(res), .zero(zero));",
        "  initial begin",
    ]
    for opc, a, b in vectors:
        bench_lines += [
            f"    op_code = {opc}; op_a = {a}; op_b = {b}; #1;",
            '    $display("%0d %0d", res, zero);',
        ]
    bench_lines += ["    $finish;", "  end", "endmodule"]
    (tmp_path / "tb.v").write_text("\n".join(bench_lines))

    exe = tmp_path / "tb.out"
    compile_proc = subprocess.run(
        [IVERILOG, "-o", str(exe), str(src), str(tmp_path / "tb.v")],
        capture_output=True, text=True)
    assert compile_proc.returncode == 0, compile_proc.stderr
    run_proc = subprocess.run(["vvp", str(exe)], capture_output=True, text=True)
    got = [tuple(map(int, line.split()))
           for line in run_proc.stdout.splitlines() if line.strip()]
    assert got == expected
    report("external conformance (iverilog)")
