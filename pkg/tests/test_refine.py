import json
import sys
from pathlib import Path

import pytest

from cppl.diagnostics import Diagnostic
from cppl.ir import Design, ModuleDef, parse_design, serialize_design
from cppl.refine import (
    GenerationRequest,
    GeneratorFailure,
    RefineConfig,
    RefinementExhausted,
    RefineResult,
    SkeletonTampered,
    command_generator,
    refine_module,
    render_feedback,
)

MOCK = Path(__file__).parent / "data" / "mock_generator.py"


def alu_skeleton(alu_design) -> ModuleDef:
    alu = alu_design.module("ALU")
    return ModuleDef("ALU", alu.ports, alu.body[:1])  # ports + instance item


def alu_remainder(alu_design):
    alu = alu_design.module("ALU")
    return [json.loads(serialize_design(Design((alu,))))[0]["body"][i]
            for i in range(1, len(alu.body))]


def bad_body():
    return [{"id": "x", "op": "add", "args": ["op_a", "op_code"]},
            {"op": "output", "args": {"res": "x", "zero": "x"}}]


class TestRefineModule:
    def test_valid_first_attempt(self, alu_design):
        remainder = alu_remainder(alu_design)
        result = refine_module(
            GenerationRequest(alu_skeleton(alu_design)),
            RefineConfig(n_max=3),
            generator=lambda req: remainder,
            context=alu_design)
        assert result.attempts == 1
        assert result.history == []
        assert result.module == alu_design.module("ALU")

    def test_valid_on_third_attempt(self, alu_design):
        remainder = alu_remainder(alu_design)

        def scripted(req):
            return remainder if req.attempt == 2 else bad_body()

        result = refine_module(GenerationRequest(alu_skeleton(alu_design)),
                               RefineConfig(n_max=3), scripted, alu_design)
        assert result.attempts == 3
        assert len(result.history) == 2
        assert all(diags for diags in result.history)

    def test_never_valid_exhausts(self, alu_design):
        calls = []

        def never(req):
            calls.append(req.attempt)
            return bad_body()

        with pytest.raises(RefinementExhausted) as ei:
            refine_module(GenerationRequest(alu_skeleton(alu_design)),
                          RefineConfig(n_max=3), never, alu_design)
        assert calls == [0, 1, 2]
        assert len(ei.value.history) == 3

    def test_history_passed_to_generator(self, alu_design):
        remainder = alu_remainder(alu_design)
        seen = []

        def scripted(req):
            seen.append(len(req.history))
            return remainder if req.attempt >= 1 else bad_body()

        refine_module(GenerationRequest(alu_skeleton(alu_design)),
                      RefineConfig(n_max=3), scripted, alu_design)
        assert seen == [0, 1]

    def test_skeleton_items_verbatim(self, alu_design):
        skeleton = alu_skeleton(alu_design)
        result = refine_module(GenerationRequest(skeleton), RefineConfig(),
                               lambda req: alu_remainder(alu_design), alu_design)
        assert result.module.body[:len(skeleton.body)] == skeleton.body

    def test_tamper_detected(self, alu_design):
        body = [{"id": "adder8_sum", "op": "const", "value": 0, "width": 8}] \
            + alu_remainder(alu_design)
        with pytest.raises(SkeletonTampered):
            refine_module(GenerationRequest(alu_skeleton(alu_design)),
                          RefineConfig(), lambda req: body, alu_design)

    def test_non_list_output_is_generator_failure(self, alu_design):
        with pytest.raises(GeneratorFailure):
            refine_module(GenerationRequest(alu_skeleton(alu_design)),
                          RefineConfig(), lambda req: {"body": []}, alu_design)

    def test_schema_violations_are_refinable(self, alu_design):
        remainder = alu_remainder(alu_design)

        def scripted(req):
            if req.attempt == 0:
                return [{"op": "frobnicate"}]
            return remainder

        result = refine_module(GenerationRequest(alu_skeleton(alu_design)),
                               RefineConfig(n_max=3), scripted, alu_design)
        assert result.attempts == 2
        assert result.history[0][0].code == "SCHEMA_VIOLATION"

    def test_no_generator_configured(self, alu_design):
        with pytest.raises(GeneratorFailure):
            refine_module(GenerationRequest(alu_skeleton(alu_design)),
                          RefineConfig(), None, alu_design)

    def test_n_max_validation(self):
        with pytest.raises(ValueError):
            RefineConfig(n_max=0)

    def test_deterministic_with_deterministic_generator(self, alu_design):
        def scripted(req):
            return alu_remainder(alu_design) if req.attempt == 1 else bad_body()

        r1 = refine_module(GenerationRequest(alu_skeleton(alu_design)),
                           RefineConfig(), scripted, alu_design)
        r2 = refine_module(GenerationRequest(alu_skeleton(alu_design)),
                           RefineConfig(), scripted, alu_design)
        assert r1.module == r2.module and r1.attempts == r2.attempts
        assert r1.history == r2.history


class TestCommandGenerator:
    def test_external_good(self, alu_design):
        gen = command_generator(f"{sys.executable} {MOCK} good")
        result = refine_module(GenerationRequest(alu_skeleton(alu_design)),
                               RefineConfig(), gen, alu_design)
        assert result.attempts == 1

    def test_external_third(self, alu_design):
        gen = command_generator(f"{sys.executable} {MOCK} third")
        result = refine_module(GenerationRequest(alu_skeleton(alu_design)),
                               RefineConfig(n_max=3), gen, alu_design)
        assert result.attempts == 3

    def test_external_garbage(self, alu_design):
        gen = command_generator(f"{sys.executable} {MOCK} garbage")
        with pytest.raises(GeneratorFailure):
            refine_module(GenerationRequest(alu_skeleton(alu_design)),
                          RefineConfig(), gen, alu_design)

    def test_external_tamper(self, alu_design):
        gen = command_generator(f"{sys.executable} {MOCK} tamper")
        with pytest.raises(SkeletonTampered):
            refine_module(GenerationRequest(alu_skeleton(alu_design)),
                          RefineConfig(), gen, alu_design)


class TestRenderFeedback:
    def test_names_rule_and_item(self):
        diags = [Diagnostic("WIDTH_MISMATCH", "T-Mux: select must have width 1, got i2",
                            module="ALU", item_index=6, related_ids=("res_mux",))]
        text = render_feedback(diags)
        assert "T-Mux" in text and "item 6" in text
        assert text.startswith("error: [WIDTH_MISMATCH]")

    def test_warning_line(self):
        text = render_feedback([Diagnostic("DEAD_CODE", "x is unused",
                                           module="m", item_index=3)])
        assert text.startswith("warning: [DEAD_CODE]")
        assert text.count("\n") == 0

    def test_sorted_and_deterministic(self):
        diags = [
            Diagnostic("UNKNOWN_ID", "later", module="zz", item_index=4),
            Diagnostic("DUPLICATE_ID", "earlier", module="aa", item_index=1),
            Diagnostic("SCHEMA_VIOLATION", "design level"),
        ]
        text = render_feedback(diags)
        shuffled = render_feedback(list(reversed(diags)))
        assert text == shuffled
        lines = text.splitlines()
        assert "design level" in lines[0]
        assert "earlier" in lines[1]
        assert "later" in lines[2]
