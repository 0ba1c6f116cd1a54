"""Parser, node numbering, and static-check tests."""

import pytest

from mutafuzz.minilang import DuplicateFunction, MissingMain, ParseError, parse
from mutafuzz.minilang.ast_nodes import Block, FunctionDef, IntLit, Print


def test_smallest_valid_program_nodes():
    program = parse("fn main(){ print(1); }")
    assert len(program.functions) == 1
    nodes = list(program.walk())
    assert [type(n) for n in nodes] == [FunctionDef, Block, Print, IntLit]
    assert [n.node_id for n in nodes] == [0, 1, 2, 3]


def test_node_ids_are_dense_preorder(any_target):
    ids = [n.node_id for n in any_target.walk()]
    assert ids == list(range(any_target.node_count))


def test_syntax_error_position():
    with pytest.raises(ParseError) as err:
        parse("fn main(){ x = ; }")
    assert err.value.line == 1
    assert err.value.col == 16  # the semicolon where an expression was expected


def test_missing_main():
    with pytest.raises(MissingMain):
        parse("fn f(){}")


def test_main_with_params_rejected():
    with pytest.raises(MissingMain):
        parse("fn main(a){ print(a); }")


def test_duplicate_function():
    with pytest.raises(DuplicateFunction):
        parse("fn main(){} fn main(){}")


def test_empty_source_rejected():
    with pytest.raises(MissingMain):
        parse("")


def test_literal_out_of_range():
    parse("fn main(){ print(9223372036854775807); }")
    with pytest.raises(ParseError):
        parse("fn main(){ print(9223372036854775808); }")


def test_unknown_function_and_bad_arity():
    with pytest.raises(ParseError):
        parse("fn main(){ x = nope(); }")
    with pytest.raises(ParseError):
        parse("fn f(a){ return a; } fn main(){ x = f(); }")


def test_undeclared_array_and_scalar_collisions():
    with pytest.raises(ParseError):
        parse("fn main(){ a[0] = 1; }")
    with pytest.raises(ParseError):
        parse("fn main(){ arr a[4]; a = 1; }")
    with pytest.raises(ParseError):
        parse("fn main(){ arr a[4]; arr a[4]; }")
    with pytest.raises(ParseError):
        parse("fn f(a){ arr a[4]; return 0; } fn main(){ x = f(1); }")


def test_never_assigned_scalar_read_rejected():
    with pytest.raises(ParseError):
        parse("fn main(){ print(x); }")


def test_array_size_limits():
    with pytest.raises(ParseError):
        parse("fn main(){ arr a[0]; a[0] = 1; }")
    with pytest.raises(ParseError):
        parse("fn main(){ arr a[65537]; a[0] = 1; }")


def test_builtins_take_no_arguments():
    with pytest.raises(ParseError):
        parse("fn main(){ x = read_byte(1); }")


def test_comments_and_whitespace():
    program = parse("fn main(){ // say hi\n  print(1); }")
    assert len(list(program.walk())) == 4


def test_else_if_chain_and_nested_else_differ():
    chained = parse("fn main(){ x = read_byte(); if (x) {} else if (x) {} }")
    nested = parse("fn main(){ x = read_byte(); if (x) {} else { if (x) {} } }")
    # the nested form has one extra Block node
    assert nested.node_count == chained.node_count + 1
