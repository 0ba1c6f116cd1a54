"""Public execution interface: results, coverage elements, and oracles.

execute() is a pure function of (program, input, fuel): identical arguments
always produce an identical ExecutionResult, on either engine backend.
Crashes are values, not exceptions. A run that consumes its entire fuel
budget reports FuelExhausted even if it was about to exit or crash, so
`outcome == FuelExhausted` holds exactly when `fuel_used == fuel`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .ast_nodes import Program
from .engine import run_vm

EXIT = "exit"
CRASH = "crash"
FUEL_EXHAUSTED = "fuel_exhausted"

CRASH_KIND_NAMES = {
    1: "DivByZero",
    2: "ModByZero",
    3: "IndexOutOfBounds",
    4: "AssertFail",
    5: "Overflow",
}


class Stmt(NamedTuple):
    node_id: int


class Branch(NamedTuple):
    node_id: int
    taken: bool


def decode_coverage(raw: set[int] | frozenset[int]) -> frozenset[Stmt | Branch]:
    out: set[Stmt | Branch] = set()
    for code in raw:
        if code & 2:
            out.add(Branch(code >> 2, bool(code & 1)))
        else:
            out.add(Stmt(code >> 2))
    return frozenset(out)


class ExecutionResult(NamedTuple):
    outcome: str  # EXIT | CRASH | FUEL_EXHAUSTED
    crash_kind: str | None
    crash_node: int | None
    output: bytes
    # engine-owned set; treated as immutable everywhere
    coverage_raw: set[int]
    mutations_covered: frozenset[int]
    fuel_used: int

    @property
    def coverage(self) -> frozenset[Stmt | Branch]:
        return decode_coverage(self.coverage_raw)

    def observable(self) -> tuple:
        """What an external differential observer can see.

        Crash identity is the crash kind, not the crash site: a real-world
        oracle sees "assertion failed", not which AST node failed. The node
        id is still recorded on the result for auditing.
        """
        return (self.outcome, self.crash_kind, self.output)


def execute(program: Program, data: bytes, fuel: int) -> ExecutionResult:
    """Run the program on one input with the given fuel budget."""
    result, _ = _run(program, data, fuel, profile=False)
    return result


def execute_profiled(program: Program, data: bytes, fuel: int) -> tuple[ExecutionResult, frozenset[int]]:
    """Like execute(), also returning the set of evaluated node ids."""
    return _run(program, data, fuel, profile=True)


def _run(program: Program, data: bytes, fuel: int, profile: bool):
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    ir = program.ir()
    prof: set[int] | None = set() if profile else None
    status, crash_kind, crash_node, fuel_used, out, cov, mcov = run_vm(
        ir.ops,
        ir.consts,
        ir.func_entry,
        ir.func_argc,
        ir.func_nslots,
        ir.func_arrays,
        ir.main_idx,
        data,
        fuel,
        prof,
    )
    if status == 1:
        outcome = CRASH
        kind: str | None = CRASH_KIND_NAMES[crash_kind]
        node: int | None = crash_node
    elif status == 2:
        outcome = FUEL_EXHAUSTED
        kind = None
        node = None
    else:
        outcome = EXIT
        kind = None
        node = None
    result = ExecutionResult(
        outcome=outcome,
        crash_kind=kind,
        crash_node=node,
        output=out.encode("ascii"),
        coverage_raw=cov,
        mutations_covered=frozenset(mcov),
        fuel_used=fuel_used,
    )
    return result, frozenset(prof) if prof is not None else frozenset()


# --- oracles ---

MODE_CRASH = "crash"
MODE_DIFF = "diff"


@dataclass(frozen=True)
class OracleMode:
    """Kill oracle configuration, fixed for a whole pipeline run.

    mode "crash": a kill is a crash in the mutant where the original did
    not crash. Sound but incomplete: output-only differences are missed.
    mode "diff": any observable difference (outcome kind or output bytes)
    is a kill.

    hangs_are_kills widens the crash oracle to count FuelExhausted as a
    crash; it has no effect on the differential oracle, where a hang
    already differs observably from an exit.
    """

    mode: str = MODE_CRASH
    hangs_are_kills: bool = field(default=False)

    def __post_init__(self):
        if self.mode not in (MODE_CRASH, MODE_DIFF):
            raise ValueError(f"unknown oracle mode {self.mode!r}")


def _crashed(result: ExecutionResult, mode: OracleMode) -> bool:
    if result.outcome == CRASH:
        return True
    return mode.hangs_are_kills and result.outcome == FUEL_EXHAUSTED


def kills(original: ExecutionResult, mutant: ExecutionResult, mode: OracleMode) -> bool:
    """Does this input kill the mutant under the given oracle?

    Both results must come from the same input and fuel budget.
    """
    if mode.mode == MODE_CRASH:
        return _crashed(mutant, mode) and not _crashed(original, mode)
    return original.observable() != mutant.observable()
