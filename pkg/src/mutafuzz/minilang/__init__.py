"""MiniLang front end, instrumented execution engine, and kill oracles.

The language: checked signed 64-bit integers, fixed-size arrays, value-
parameter functions, if/else, while, assert, print, and the input builtins
read_byte()/read_int(). Booleans are ints (0/1); && and || short-circuit.
The grammar ships in docs/grammar.ebnf; sources are UTF-8 *.mini files.
"""

from .ast_nodes import Program
from .engine import BACKEND
from .interp import (
    CRASH,
    EXIT,
    FUEL_EXHAUSTED,
    MODE_CRASH,
    MODE_DIFF,
    Branch,
    ExecutionResult,
    OracleMode,
    Stmt,
    decode_coverage,
    execute,
    execute_profiled,
    kills,
)
from .parser import DuplicateFunction, MissingMain, ParseError, parse
from .printer import format_expr, pretty_print

__all__ = [
    "BACKEND",
    "Branch",
    "CRASH",
    "DuplicateFunction",
    "EXIT",
    "ExecutionResult",
    "FUEL_EXHAUSTED",
    "MODE_CRASH",
    "MODE_DIFF",
    "MissingMain",
    "OracleMode",
    "ParseError",
    "Program",
    "Stmt",
    "decode_coverage",
    "execute",
    "execute_profiled",
    "format_expr",
    "kills",
    "parse",
    "pretty_print",
]
