"""Canonical source form for MiniLang programs.

Parenthesization is driven by operator precedence so that re-parsing the
printed text reconstructs the same tree. This matters for mutants: operator
replacement can produce trees (e.g. a multiplication whose right child is
an addition) that never come out of the parser without explicit parens.

Statement-deletion tombstones print as nothing, so the diff between a
mutant and its original is confined to the mutated spans.
"""

from __future__ import annotations

from .ast_nodes import (
    ArrDecl,
    Assert,
    Assign,
    Binary,
    Block,
    Call,
    ExprStmt,
    If,
    Index,
    IndexAssign,
    IntLit,
    Node,
    Print,
    Program,
    ReadByte,
    ReadInt,
    Return,
    Skip,
    Unary,
    Var,
    While,
)

_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 3,
    "<=": 3,
    ">": 3,
    ">=": 3,
    "+": 4,
    "-": 4,
    "*": 5,
    "/": 5,
    "%": 5,
}
_UNARY_PREC = 6


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _UNARY_PREC
    return 7


def format_expr(node: Node) -> str:
    if isinstance(node, IntLit):
        return str(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Index):
        return f"{node.name}[{format_expr(node.index)}]"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(format_expr(a) for a in node.args)})"
    if isinstance(node, ReadByte):
        return "read_byte()"
    if isinstance(node, ReadInt):
        return "read_int()"
    if isinstance(node, Unary):
        inner = format_expr(node.operand)
        if _prec(node.operand) < _UNARY_PREC:
            inner = f"({inner})"
        return f"{node.op}{inner}"
    if isinstance(node, Binary):
        prec = _PREC[node.op]
        left = format_expr(node.left)
        if _prec(node.left) < prec:
            left = f"({left})"
        right = format_expr(node.right)
        # binary operators are left-associative: a right child at the same
        # precedence level needs parens to keep its shape
        if _prec(node.right) <= prec:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {type(node).__name__}")


def _format_cond(stmt: If | While) -> str:
    text = format_expr(stmt.cond)
    if stmt.cond_negated:
        return f"!({text})"
    return text


def _emit_block(block: Block, indent: int, lines: list[str]) -> None:
    for stmt in block.stmts:
        _emit_stmt(stmt, indent, lines)


def _emit_stmt(stmt: Node, indent: int, lines: list[str]) -> None:
    pad = "    " * indent
    if isinstance(stmt, Skip):
        return
    if isinstance(stmt, ArrDecl):
        lines.append(f"{pad}arr {stmt.name}[{stmt.size}];")
    elif isinstance(stmt, Assign):
        lines.append(f"{pad}{stmt.name} = {format_expr(stmt.value)};")
    elif isinstance(stmt, IndexAssign):
        lines.append(f"{pad}{stmt.name}[{format_expr(stmt.index)}] = {format_expr(stmt.value)};")
    elif isinstance(stmt, If):
        _emit_if(stmt, indent, lines)
    elif isinstance(stmt, While):
        lines.append(f"{pad}while ({_format_cond(stmt)}) {{")
        _emit_block(stmt.body, indent + 1, lines)
        lines.append(f"{pad}}}")
    elif isinstance(stmt, Return):
        if stmt.value is None:
            lines.append(f"{pad}return;")
        else:
            lines.append(f"{pad}return {format_expr(stmt.value)};")
    elif isinstance(stmt, Assert):
        lines.append(f"{pad}assert {format_expr(stmt.cond)};")
    elif isinstance(stmt, Print):
        lines.append(f"{pad}print({format_expr(stmt.value)});")
    elif isinstance(stmt, ExprStmt):
        lines.append(f"{pad}{format_expr(stmt.value)};")
    else:
        raise TypeError(f"not a statement node: {type(stmt).__name__}")


def _emit_if(stmt: If, indent: int, lines: list[str]) -> None:
    pad = "    " * indent
    lines.append(f"{pad}if ({_format_cond(stmt)}) {{")
    _emit_block(stmt.then_block, indent + 1, lines)
    else_part = stmt.else_part
    if else_part is None:
        lines.append(f"{pad}}}")
    elif isinstance(else_part, If):
        lines.append(f"{pad}}} else " + _strip_pad(else_part, indent))
        return
    else:
        lines.append(f"{pad}}} else {{")
        _emit_block(else_part, indent + 1, lines)
        lines.append(f"{pad}}}")


def _strip_pad(chained_if: If, indent: int) -> str:
    # format the chained `else if` in place, reusing the if emitter
    sub: list[str] = []
    _emit_if(chained_if, indent, sub)
    first = sub[0].lstrip()
    rest = "\n".join(sub[1:])
    return first + ("\n" + rest if rest else "")


def pretty_print(program: Program) -> str:
    """Canonical text of a program; parses back to an isomorphic tree."""
    lines: list[str] = []
    for fn in program.functions:
        params = ", ".join(fn.params)
        lines.append(f"fn {fn.name}({params}) {{")
        _emit_block(fn.body, 1, lines)
        lines.append("}")
    return "\n".join(lines) + "\n"
