from dataclasses import replace

import pytest

from predicator.ir import (
    CfgError, Inputs, Instruction, InputsError, IRSyntaxError, InterpreterTrap, NonTermination,
    RandomInit, analyze_cfg, branch_sites, interpret, parse_inputs, parse_module,
    print_module, validate_module, wrap64,
)

from conftest import ABS, MAX, STRAIGHT


def rules(text):
    return [d.rule for d in validate_module(parse_module(text))]


class TestParse:
    def test_abs_structure(self, abs_module):
        assert len(abs_module.functions) == 1
        f = abs_module.functions[0]
        assert f.name == "abs" and f.params == ("x",)
        assert [b.label for b in f.blocks] == ["entry", "then", "join"]
        assert abs_module.memories[0].length == 256

    def test_empty_input(self):
        with pytest.raises(IRSyntaxError, match="expected 'func' or 'mem'"):
            parse_module("")

    def test_duplicate_label_names_it(self):
        bad = ABS.replace("join:\n", "then:\n", 1)
        with pytest.raises(IRSyntaxError, match="then"):
            parse_module(bad)

    def test_unknown_opcode(self):
        with pytest.raises(IRSyntaxError, match="unknown opcode"):
            parse_module(ABS.replace("sub 0", "frob 0"))

    def test_error_carries_position(self):
        with pytest.raises(IRSyntaxError) as e:
            parse_module("func @f() {\nentry:\n  %x = frob 1, 2\n  ret %x\n}\n")
        assert e.value.line == 3

    def test_round_trip(self, abs_module, max_module):
        for m in (abs_module, max_module):
            assert parse_module(print_module(m)) == m

    def test_comments_ignored(self):
        assert parse_module(ABS) == parse_module(ABS.replace("# branch site b0", ""))


class TestValidate:
    def test_clean(self, abs_module):
        assert validate_module(abs_module) == []

    def test_phi_pred_mismatch(self):
        assert rules(ABS.replace("[entry: %x]", "[nowhere: %x]")) == ["phi-pred-mismatch"]

    def test_def_before_use(self):
        text = ABS.replace("  %t = sub 0, %x\n", "  %u = add %t, 1\n  %t = sub 0, %x\n")
        assert "def-before-use" in rules(text)

    def test_not_dominated(self):
        text = ABS.replace("ret %r", "%z = add %t, 1\n  ret %z")
        assert "not-dominated" in rules(text)

    def test_unreachable(self):
        assert "unreachable" in rules(STRAIGHT.replace("}", "dead:\n  ret 0\n}"))

    def test_arity(self):
        with pytest.raises(IRSyntaxError, match="takes 2 operands"):
            parse_module(STRAIGHT.replace("add %a, 1", "add %a"))
        m = parse_module(STRAIGHT)
        f = m.functions[0]
        entry = replace(f.entry, body=(Instruction("b", "add", ("a",)),))
        assert [d.rule for d in validate_module(m.replace_function(f.with_blocks([entry])))] == ["arity"]

    def test_unknown_memory(self):
        assert "unknown-memory" in rules(STRAIGHT.replace("%b = add %a, 1", "%b = load @q, 0"))

    def test_multiple_def(self):
        assert "multiple-def" in rules(STRAIGHT.replace("ret %b", "%b = add %a, 2\n  ret %b"))

    def test_diagnostic_location(self):
        (d,) = validate_module(parse_module(ABS.replace("[entry: %x]", "[nowhere: %x]")))
        assert (d.function, d.block) == ("abs", "join")
        assert str(d).startswith("@abs:join")


class TestCfg:
    def test_abs(self, abs_module):
        cfg = analyze_cfg(abs_module.functions[0])
        assert cfg.idom == {"entry": None, "then": "entry", "join": "entry"}
        assert cfg.postorder == ("then", "join", "entry")
        assert set(cfg.loop_depth.values()) == {0}

    def test_straight_line(self):
        cfg = analyze_cfg(parse_module(STRAIGHT).functions[0])
        assert cfg.postorder == ("entry",) and cfg.loop_depth == {"entry": 0}

    def test_self_loop(self):
        m = parse_module("""
func @spin(%n) {
entry:
  jmp L
L:
  %i = phi [entry: 0], [L: %j]
  %j = add %i, 1
  %c = icmp.slt %j, %n
  br %c, L, out
out:
  ret %j
}""")
        cfg = analyze_cfg(m.functions[0])
        assert cfg.loop_depth == {"entry": 0, "L": 1, "out": 0}
        assert cfg.dominates("L", "L")

    def test_nested_loops(self):
        m = parse_module("""
func @nest(%n) {
entry:
  jmp outer
outer:
  %i = phi [entry: 0], [olatch: %i1]
  jmp inner
inner:
  %j = phi [outer: 0], [inner: %j1]
  %j1 = add %j, 1
  %c = icmp.slt %j1, %n
  br %c, inner, olatch
olatch:
  %i1 = add %i, 1
  %d = icmp.slt %i1, %n
  br %d, outer, out
out:
  ret %i1
}""")
        depth = analyze_cfg(m.functions[0]).loop_depth
        assert depth["inner"] == 2 and depth["outer"] == 1 and depth["out"] == 0
        assert depth["inner"] >= depth["outer"]

    def test_unreachable_rejected(self):
        m = parse_module(STRAIGHT.replace("}", "dead:\n  ret 0\n}"))
        with pytest.raises(CfgError):
            analyze_cfg(m.functions[0])

    def test_branch_site_numbering(self, abs_module):
        assert branch_sites(abs_module) == {("abs", "entry"): "b0"}


class TestInterpret:
    def test_negative(self, abs_module):
        r = interpret(abs_module, "abs", Inputs({"x": -5}))
        assert r.value == 5 and r.branches == (("b0", True),)

    def test_positive(self, abs_module):
        r = interpret(abs_module, "abs", Inputs({"x": 7}))
        assert r.value == 7 and r.branches == (("b0", False),)

    def test_zero_step_count(self, abs_module):
        r = interpret(abs_module, "abs", Inputs({"x": 0}))
        assert r.steps == 4
        assert [e.opcode for e in r.trace] == ["icmp.slt", "br", "phi", "ret"]

    def test_determinism(self, abs_module):
        i = Inputs({"x": -3})
        assert interpret(abs_module, "abs", i) == interpret(abs_module, "abs", i)

    def test_wrapping(self, abs_module):
        r = interpret(abs_module, "abs", Inputs({"x": -(2**63)}))
        assert r.value == -(2**63)
        assert wrap64(2**63) == -(2**63)

    @pytest.mark.parametrize("op,a,b,want", [
        ("div", -7, 2, -3), ("rem", -7, 2, -1), ("shr", -8, 1, -4),
        ("shl", 1, 65, 2), ("mul", 2**62, 4, 0), ("xor", 6, 3, 5),
    ])
    def test_arithmetic(self, op, a, b, want):
        m = parse_module(f"func @f(%a, %b) {{\nentry:\n  %r = {op} %a, %b\n  ret %r\n}}")
        assert interpret(m, "f", Inputs({"a": a, "b": b})).value == want

    def test_div_by_zero_traps_with_trace(self):
        m = parse_module("func @f(%a) {\nentry:\n  %r = div 1, %a\n  ret %r\n}")
        with pytest.raises(InterpreterTrap) as e:
            interpret(m, "f", Inputs({"a": 0}))
        assert e.value.kind == "div-by-zero" and e.value.trace

    def test_out_of_bounds(self):
        m = parse_module("mem @a[4]\nfunc @f(%i) {\nentry:\n  %v = load @a, %i\n  ret %v\n}")
        assert interpret(m, "f", Inputs({"i": 3}, {"a": (1, 2, 3, 4)})).value == 4
        with pytest.raises(InterpreterTrap) as e:
            interpret(m, "f", Inputs({"i": 4}))
        assert e.value.kind == "out-of-bounds"

    def test_store_and_memory(self):
        m = parse_module("mem @a[2]\nfunc @f(%v) {\nentry:\n  store @a, 1, %v\n  ret 0\n}")
        r = interpret(m, "f", Inputs({"v": 9}))
        assert r.memory["a"] == (0, 9) and r.stores() == [(1, 9)]

    def test_budget(self):
        m = parse_module("func @f() {\nentry:\n  jmp L\nL:\n  jmp L\n}")
        with pytest.raises(NonTermination, match="nontermination suspected"):
            interpret(m, "f", Inputs(), budget=1000)

    def test_phis_are_parallel(self):
        m = parse_module("""
func @swap(%n) {
entry:
  jmp L
L:
  %a = phi [entry: 1], [L: %b]
  %b = phi [entry: 2], [L: %a]
  %i = phi [entry: 0], [L: %i1]
  %i1 = add %i, 1
  %c = icmp.slt %i1, %n
  br %c, L, out
out:
  %r = mul %a, 10
  %s = add %r, %b
  ret %s
}""")
        assert interpret(m, "swap", Inputs({"n": 2})).value == 21


class TestInputs:
    def test_formats(self):
        i = parse_inputs("param x = -5\nmem a = [3,1,2]\nmem b = seed:42 uniform:[0,1000] len:4\n")
        assert i.params == {"x": -5} and i.memories["a"] == (3, 1, 2)
        assert i.memories["b"] == RandomInit(42, 0, 1000, 4)
        assert parse_inputs(i.to_text()) == i

    def test_seeded_cells_reproducible(self):
        r = RandomInit(42, 0, 1000, 8)
        assert r.cells() == r.cells() and all(0 <= c <= 1000 for c in r.cells())

    def test_errors(self):
        with pytest.raises(InputsError):
            parse_inputs("bogus line")
        with pytest.raises(InputsError):
            parse_inputs("mem a = seed:1 uniform:[5,1] len:3")

    def test_initializer_too_long(self, abs_module):
        with pytest.raises(InputsError):
            Inputs({}, {"a": tuple(range(300))}).memory_image(abs_module)
