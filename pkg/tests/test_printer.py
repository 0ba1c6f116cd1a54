"""Round-trip and locality properties of the canonical printer."""

import difflib

from mutafuzz.minilang import parse, pretty_print
from mutafuzz.minilang.ast_nodes import Binary
from mutafuzz.mutation import apply_mutations, enumerate_mutations
from mutafuzz.targets import TARGET_NAMES

from conftest import parsed_target


def _isomorphic(a, b) -> bool:
    nodes_a = list(a.walk())
    nodes_b = list(b.walk())
    if len(nodes_a) != len(nodes_b):
        return False
    for x, y in zip(nodes_a, nodes_b):
        if type(x) is not type(y) or x.node_id != y.node_id:
            return False
        if isinstance(x, Binary) and x.op != y.op:
            return False
    return True


def test_round_trip_is_isomorphic(any_target):
    text = pretty_print(any_target)
    again = parse(text, any_target.source_name)
    assert _isomorphic(any_target, again)


def test_pretty_print_idempotent(any_target):
    once = pretty_print(parse(pretty_print(any_target)))
    assert once == pretty_print(any_target)


def test_operator_mutants_round_trip():
    # operator replacement creates trees the parser alone would never
    # produce; printing must add the parens that preserve their shape
    program = parse("fn main(){ a = read_int(); b = read_int(); print(a + b * a - b); }")
    for m in enumerate_mutations(program, {"AOR", "ROR"}):
        mutant = apply_mutations(program, [m])
        text = pretty_print(mutant.program)
        assert _isomorphic(mutant.program, parse(text))


def test_cmp_under_cmp_round_trips():
    program = parse("fn main(){ a = read_byte(); if (a < 2 == 1) { print(1); } }")
    assert _isomorphic(program, parse(pretty_print(program)))


def test_unary_stacking_round_trips():
    program = parse("fn main(){ a = read_byte(); print(- -a); print(!(a + 1)); }")
    assert _isomorphic(program, parse(pretty_print(program)))


def test_mutant_diff_is_local():
    for name in TARGET_NAMES:
        program = parsed_target(name)
        original = pretty_print(program).splitlines()
        for m in enumerate_mutations(program)[::7]:  # sample for speed
            mutated = pretty_print(apply_mutations(program, [m]).program).splitlines()
            changed = [
                op
                for op in difflib.SequenceMatcher(None, original, mutated).get_opcodes()
                if op[0] != "equal"
            ]
            if m.operator == "SDL":
                # a deletion may remove several lines but must add none
                assert all(op[0] == "delete" for op in changed)
            else:
                assert len(changed) == 1
                tag, i1, i2, j1, j2 = changed[0]
                assert tag == "replace" and (i2 - i1) == 1 and (j2 - j1) == 1


def test_uneg_prints_wrapped_condition():
    program = parse("fn main(){ x = read_byte(); while (x < 3) { x = x + 1; } }")
    uneg = [m for m in enumerate_mutations(program, {"UNEG"})][0]
    text = pretty_print(apply_mutations(program, [uneg]).program)
    assert "while (!(x < 3))" in text
