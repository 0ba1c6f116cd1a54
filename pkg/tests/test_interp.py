"""Execution semantics: determinism, fuel, coverage, crashes, input."""

import struct

import pytest

from mutafuzz.minilang import (
    Branch,
    CRASH,
    EXIT,
    FUEL_EXHAUSTED,
    Stmt,
    execute,
    execute_profiled,
    parse,
)
from mutafuzz.minilang.ast_nodes import Binary
from mutafuzz.prng import SplitMix64

DIV_PROGRAM = "fn main(){ x = read_int(); print(100 / (x - 5)); }"


def _le32(v: int) -> bytes:
    return struct.pack("<i", v)


def test_div_by_zero_at_division_node():
    program = parse(DIV_PROGRAM)
    result = execute(program, _le32(5), 1000)
    assert result.outcome == CRASH
    assert result.crash_kind == "DivByZero"
    div_node = next(
        n for n in program.walk() if isinstance(n, Binary) and n.op == "/"
    )
    assert result.crash_node == div_node.node_id


def test_normal_arithmetic_and_full_statement_coverage():
    program = parse(DIV_PROGRAM)
    result = execute(program, _le32(7), 1000)
    assert result.outcome == EXIT
    assert result.output == b"50\n"
    stmt_ids = {e.node_id for e in result.coverage if isinstance(e, Stmt)}
    expected = {n.node_id for n in program.walk() if type(n).__name__ in ("Assign", "Print")}
    assert stmt_ids == expected


def test_fuel_exhaustion_on_infinite_loop():
    program = parse("fn main(){ while (1) {} }")
    result = execute(program, b"", 1000)
    assert result.outcome == FUEL_EXHAUSTED
    assert result.fuel_used == 1000


def test_fuel_exhausted_iff_budget_consumed():
    program = parse("fn main(){ x = 1; print(x); }")
    full = execute(program, b"", 100)
    assert full.outcome == EXIT and full.fuel_used < 100
    # find the exact cost, then run with precisely that budget
    cost = full.fuel_used
    boundary = execute(program, b"", cost)
    assert boundary.outcome == FUEL_EXHAUSTED and boundary.fuel_used == cost
    assert execute(program, b"", cost + 1).outcome == EXIT


def test_determinism(any_target):
    rng = SplitMix64(4)
    for _ in range(30):
        data = rng.bytes(rng.below(12))
        assert execute(any_target, data, 2048) == execute(any_target, data, 2048)


def test_coverage_monotone_in_fuel(any_target):
    rng = SplitMix64(5)
    for _ in range(10):
        data = rng.bytes(rng.below(12))
        prev: set[int] = set()
        for fuel in (5, 20, 80, 320, 2048):
            cov = execute(any_target, data, fuel).coverage_raw
            assert prev <= cov
            prev = cov


def test_read_byte_eof_and_sequence():
    program = parse(
        "fn main(){ a = read_byte(); b = read_byte(); print(a); print(b); }"
    )
    assert execute(program, b"\x07", 100).output == b"7\n-1\n"
    assert execute(program, b"", 100).output == b"-1\n-1\n"
    assert execute(program, b"\xff\x00", 100).output == b"255\n0\n"


def test_read_int_padding_and_signedness():
    program = parse("fn main(){ print(read_int()); print(read_int()); }")
    assert execute(program, _le32(-12345) + _le32(99), 100).output == b"-12345\n99\n"
    # missing bytes read as zero
    assert execute(program, b"\x01", 100).output == b"1\n0\n"
    assert execute(program, b"", 100).output == b"0\n0\n"
    assert execute(program, b"\xff\xff\xff\xff", 100).output == b"-1\n0\n"


def test_overflow_traps():
    program = parse("fn main(){ big = 9223372036854775807; print(big + 1); }")
    result = execute(program, b"", 100)
    assert result.outcome == CRASH and result.crash_kind == "Overflow"
    program = parse("fn main(){ small = 0 - 9223372036854775807; print(small - 2); }")
    result = execute(program, b"", 100)
    assert result.outcome == CRASH and result.crash_kind == "Overflow"
    program = parse("fn main(){ x = 0 - 9223372036854775807 - 1; print(x / (0 - 1)); }")
    result = execute(program, b"", 100)
    assert result.outcome == CRASH and result.crash_kind == "Overflow"


def test_division_is_floor_division():
    program = parse("fn main(){ x = read_int(); print(x / 4); print(x % 4); }")
    assert execute(program, _le32(-7), 100).output == b"-2\n1\n"
    assert execute(program, _le32(7), 100).output == b"1\n3\n"


def test_mod_by_zero():
    program = parse("fn main(){ x = read_int(); print(7 % x); }")
    result = execute(program, _le32(0), 100)
    assert result.outcome == CRASH and result.crash_kind == "ModByZero"


def test_assert_failure():
    program = parse("fn main(){ x = read_byte(); assert x != 9; print(x); }")
    result = execute(program, b"\x09", 100)
    assert result.outcome == CRASH and result.crash_kind == "AssertFail"
    assert execute(program, b"\x08", 100).outcome == EXIT


def test_array_semantics_and_bounds():
    program = parse(
        "fn main(){ arr a[3]; i = read_byte(); a[0] = 5; print(a[0] + a[1]); a[i] = 1; }"
    )
    ok = execute(program, b"\x02", 100)
    assert ok.outcome == EXIT and ok.output == b"5\n"  # elements start at 0
    bad = execute(program, b"\x03", 100)
    assert bad.outcome == CRASH and bad.crash_kind == "IndexOutOfBounds"


def test_unassigned_scalar_reads_zero_after_deleted_assignment():
    # the parser rejects reads of never-assigned names, but a mutant whose
    # assignment was deleted must read 0 rather than fail
    from mutafuzz.mutation import apply_mutations, enumerate_mutations

    program = parse("fn main(){ x = 41; print(x + 1); }")
    sdl = [m for m in enumerate_mutations(program, {"SDL"}) if m.original_token == "x = 41;"]
    mutant = apply_mutations(program, sdl)
    assert execute(mutant.program, b"", 100).output == b"1\n"


def test_branch_coverage_records_both_outcomes():
    program = parse("fn main(){ x = read_byte(); if (x < 10) { print(1); } }")
    cond = next(n for n in program.walk() if isinstance(n, Binary))
    taken = execute(program, b"\x01", 100)
    assert Branch(cond.node_id, True) in taken.coverage
    not_taken = execute(program, b"\xfe", 100)
    assert Branch(cond.node_id, False) in not_taken.coverage


def test_short_circuit_evaluation():
    program = parse(
        "fn main(){ x = read_byte(); print(x != 0 && 10 / x > 1); print(x == 0 || 10 / x > 1); }"
    )
    # x = 0 would crash on 10/x if && and || did not short-circuit
    result = execute(program, b"\x00", 100)
    assert result.outcome == EXIT
    assert result.output == b"0\n1\n"
    result = execute(program, b"\x05", 100)
    assert result.output == b"1\n1\n"


def test_boolean_results_are_zero_or_one():
    program = parse("fn main(){ x = read_byte(); print(x && 7); print(x || 7); print(!x); }")
    assert execute(program, b"\x03", 100).output == b"1\n1\n0\n"
    assert execute(program, b"\x00", 100).output == b"0\n1\n1\n"


def test_function_calls_and_recursion():
    program = parse(
        """
        fn fact(n) {
            if (n < 2) {
                return 1;
            }
            return n * fact(n - 1);
        }
        fn main() {
            print(fact(read_byte()));
        }
        """
    )
    assert execute(program, b"\x05", 10_000).output == b"120\n"
    assert execute(program, b"\x00", 10_000).output == b"1\n"
    # deep recursion burns fuel, never the host stack
    deep = parse(
        """
        fn spin(n) {
            if (n == 0) {
                return 0;
            }
            return spin(n - 1);
        }
        fn main() {
            print(spin(9999999));
        }
        """
    )
    result = execute(deep, b"", 5000)
    assert result.outcome == FUEL_EXHAUSTED and result.fuel_used == 5000


def test_fall_off_end_returns_zero():
    program = parse("fn f(){ x = 3; } fn main(){ print(f()); }")
    assert execute(program, b"", 100).output == b"0\n"


def test_mutations_covered_empty_for_unmutated(any_target):
    rng = SplitMix64(6)
    for _ in range(20):
        data = rng.bytes(rng.below(10))
        assert execute(any_target, data, 2048).mutations_covered == frozenset()


def test_coverage_nonempty_for_nonempty_main(any_target):
    assert execute(any_target, b"", 2048).coverage_raw


def test_profiled_execution_reports_evaluated_nodes():
    program = parse("fn main(){ x = read_byte(); if (x < 5) { print(1); } else { print(2); } }")
    result, nodes = execute_profiled(program, b"\x01", 100)
    plain = execute(program, b"\x01", 100)
    assert result == plain
    kinds = {type(program.node_by_id(n)).__name__ for n in nodes}
    assert "Print" in kinds and "Binary" in kinds
    # the else-branch print was not evaluated
    else_print = [
        n for n in program.walk() if type(n).__name__ == "Print"
    ][1]
    assert else_print.node_id not in nodes


def test_fuel_rejects_nonpositive():
    program = parse("fn main(){ print(1); }")
    with pytest.raises(ValueError):
        execute(program, b"", 0)
