"""Lexer, recursive-descent parser, and static checks for MiniLang.

Everything that can make a program unexecutable is rejected here, so that
programs (and therefore all mutants derived from them) are total at
runtime: unknown names, bad arities, undeclared arrays, and out-of-range
literals are all parse-time errors. Scalars read before assignment
evaluate to 0; that is a language rule, not an error, because statement
deletion must never produce an invalid program.
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
    FunctionDef,
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
    Unary,
    Var,
    While,
    number_nodes,
    walk,
)

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)
MAX_ARRAY_SIZE = 65536

KEYWORDS = {
    "fn",
    "arr",
    "if",
    "else",
    "while",
    "return",
    "assert",
    "print",
    "read_byte",
    "read_int",
}

_SYMBOLS = (
    "&&",
    "||",
    "==",
    "!=",
    "<=",
    ">=",
    "(",
    ")",
    "{",
    "}",
    "[",
    "]",
    ";",
    ",",
    "=",
    "<",
    ">",
    "+",
    "-",
    "*",
    "/",
    "%",
    "!",
)


class ParseError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class DuplicateFunction(ParseError):
    pass


class MissingMain(ParseError):
    pass


class Token:
    __slots__ = ("kind", "text", "value", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int, value: int = 0):
        self.kind = kind  # "int" | "ident" | "kw" | "sym" | "eof"
        self.text = text
        self.value = value
        self.line = line
        self.col = col


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            start = i
            start_col = col
            while i < n and source[i].isdigit():
                i += 1
                col += 1
            text = source[start:i]
            value = int(text)
            if value > INT64_MAX:
                raise ParseError(line, start_col, f"integer literal out of range: {text}")
            tokens.append(Token("int", text, line, start_col, value))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            start_col = col
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
                col += 1
            text = source[start:i]
            kind = "kw" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, line, start_col))
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(line, col, f"unexpected character {ch!r}")
    tokens.append(Token("eof", "", line, col))
    return tokens


_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, tok: Token, message: str) -> ParseError:
        return ParseError(tok.line, tok.col, message)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text if tok.text else tok.kind
            raise self.error(tok, f"expected {want!r}, found {got!r}")
        return self.advance()

    def at_sym(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "sym" and tok.text == text

    def at_kw(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "kw" and tok.text == text

    # --- grammar ---

    def program(self) -> list[FunctionDef]:
        functions = []
        while not self.peek().kind == "eof":
            functions.append(self.fundef())
        return functions

    def fundef(self) -> FunctionDef:
        kw = self.expect("kw", "fn")
        name = self.expect("ident").text
        self.expect("sym", "(")
        params: list[str] = []
        if not self.at_sym(")"):
            params.append(self.expect("ident").text)
            while self.at_sym(","):
                self.advance()
                params.append(self.expect("ident").text)
        self.expect("sym", ")")
        body = self.block()
        if len(set(params)) != len(params):
            raise ParseError(kw.line, kw.col, f"duplicate parameter in fn {name}")
        return FunctionDef(name, params, body, line=kw.line, col=kw.col)

    def block(self) -> Block:
        brace = self.expect("sym", "{")
        stmts: list[Node] = []
        while not self.at_sym("}"):
            stmts.append(self.stmt())
        self.expect("sym", "}")
        return Block(stmts, line=brace.line, col=brace.col)

    def stmt(self) -> Node:
        tok = self.peek()
        if tok.kind == "kw":
            if tok.text == "arr":
                self.advance()
                name = self.expect("ident").text
                self.expect("sym", "[")
                size_tok = self.expect("int")
                self.expect("sym", "]")
                self.expect("sym", ";")
                if not 1 <= size_tok.value <= MAX_ARRAY_SIZE:
                    raise self.error(size_tok, f"array size must be in [1, {MAX_ARRAY_SIZE}]")
                return ArrDecl(name, size_tok.value, line=tok.line, col=tok.col)
            if tok.text == "if":
                return self.if_stmt()
            if tok.text == "while":
                self.advance()
                self.expect("sym", "(")
                cond = self.expr()
                self.expect("sym", ")")
                body = self.block()
                return While(cond, body, line=tok.line, col=tok.col)
            if tok.text == "return":
                self.advance()
                value = None if self.at_sym(";") else self.expr()
                self.expect("sym", ";")
                return Return(value, line=tok.line, col=tok.col)
            if tok.text == "assert":
                self.advance()
                cond = self.expr()
                self.expect("sym", ";")
                return Assert(cond, line=tok.line, col=tok.col)
            if tok.text == "print":
                self.advance()
                self.expect("sym", "(")
                value = self.expr()
                self.expect("sym", ")")
                self.expect("sym", ";")
                return Print(value, line=tok.line, col=tok.col)
            if tok.text in ("read_byte", "read_int"):
                value = self.expr()
                self.expect("sym", ";")
                return ExprStmt(value, line=tok.line, col=tok.col)
            raise self.error(tok, f"unexpected keyword {tok.text!r}")
        if tok.kind == "ident":
            nxt = self.tokens[self.pos + 1]
            if nxt.kind == "sym" and nxt.text == "=":
                self.advance()
                self.advance()
                value = self.expr()
                self.expect("sym", ";")
                return Assign(tok.text, value, line=tok.line, col=tok.col)
            if nxt.kind == "sym" and nxt.text == "[":
                # lookahead past the bracketed index to tell `a[i] = e;`
                # from the expression statement `a[i];`
                save = self.pos
                self.advance()
                self.advance()
                index = self.expr()
                self.expect("sym", "]")
                if self.at_sym("="):
                    self.advance()
                    value = self.expr()
                    self.expect("sym", ";")
                    return IndexAssign(tok.text, index, value, line=tok.line, col=tok.col)
                self.pos = save
        value = self.expr()
        self.expect("sym", ";")
        return ExprStmt(value, line=tok.line, col=tok.col)

    def if_stmt(self) -> If:
        tok = self.expect("kw", "if")
        self.expect("sym", "(")
        cond = self.expr()
        self.expect("sym", ")")
        then_block = self.block()
        else_part: Block | If | None = None
        if self.at_kw("else"):
            self.advance()
            if self.at_kw("if"):
                else_part = self.if_stmt()
            else:
                else_part = self.block()
        return If(cond, then_block, else_part, line=tok.line, col=tok.col)

    # --- expressions, C-like precedence, all comparisons on one level ---

    def expr(self) -> Node:
        return self.or_expr()

    def or_expr(self) -> Node:
        node = self.and_expr()
        while self.at_sym("||"):
            op = self.advance()
            rhs = self.and_expr()
            node = Binary("||", node, rhs, line=op.line, col=op.col)
        return node

    def and_expr(self) -> Node:
        node = self.cmp_expr()
        while self.at_sym("&&"):
            op = self.advance()
            rhs = self.cmp_expr()
            node = Binary("&&", node, rhs, line=op.line, col=op.col)
        return node

    def cmp_expr(self) -> Node:
        node = self.add_expr()
        while self.peek().kind == "sym" and self.peek().text in _CMP_OPS:
            op = self.advance()
            rhs = self.add_expr()
            node = Binary(op.text, node, rhs, line=op.line, col=op.col)
        return node

    def add_expr(self) -> Node:
        node = self.mul_expr()
        while self.peek().kind == "sym" and self.peek().text in ("+", "-"):
            op = self.advance()
            rhs = self.mul_expr()
            node = Binary(op.text, node, rhs, line=op.line, col=op.col)
        return node

    def mul_expr(self) -> Node:
        node = self.unary_expr()
        while self.peek().kind == "sym" and self.peek().text in ("*", "/", "%"):
            op = self.advance()
            rhs = self.unary_expr()
            node = Binary(op.text, node, rhs, line=op.line, col=op.col)
        return node

    def unary_expr(self) -> Node:
        tok = self.peek()
        if tok.kind == "sym" and tok.text in ("-", "!"):
            self.advance()
            operand = self.unary_expr()
            return Unary(tok.text, operand, line=tok.line, col=tok.col)
        return self.primary()

    def primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return IntLit(tok.value, line=tok.line, col=tok.col)
        if tok.kind == "kw" and tok.text in ("read_byte", "read_int"):
            self.advance()
            self.expect("sym", "(")
            self.expect("sym", ")")
            cls = ReadByte if tok.text == "read_byte" else ReadInt
            return cls(line=tok.line, col=tok.col)
        if tok.kind == "ident":
            self.advance()
            if self.at_sym("("):
                self.advance()
                args: list[Node] = []
                if not self.at_sym(")"):
                    args.append(self.expr())
                    while self.at_sym(","):
                        self.advance()
                        args.append(self.expr())
                self.expect("sym", ")")
                return Call(tok.text, args, line=tok.line, col=tok.col)
            if self.at_sym("["):
                self.advance()
                index = self.expr()
                self.expect("sym", "]")
                return Index(tok.text, index, line=tok.line, col=tok.col)
            return Var(tok.text, line=tok.line, col=tok.col)
        if tok.kind == "sym" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect("sym", ")")
            return node
        got = tok.text if tok.text else tok.kind
        raise self.error(tok, f"expected expression, found {got!r}")


def _resolve(functions: list[FunctionDef]) -> None:
    """Name, arity, and array checks; raises ParseError on any violation."""
    by_name: dict[str, FunctionDef] = {}
    for fn in functions:
        if fn.name in by_name:
            raise DuplicateFunction(fn.line, fn.col, f"duplicate function {fn.name!r}")
        by_name[fn.name] = fn
    main = by_name.get("main")
    if main is None:
        raise MissingMain(1, 1, "no function named 'main'")
    if main.params:
        raise MissingMain(main.line, main.col, "'main' must take no parameters")

    for fn in functions:
        arrays: dict[str, int] = {}
        scalars = set(fn.params)
        for node in walk(fn):
            if isinstance(node, ArrDecl):
                if node.name in arrays:
                    raise ParseError(node.line, node.col, f"array {node.name!r} declared twice")
                if node.name in scalars:
                    raise ParseError(node.line, node.col, f"{node.name!r} is already a scalar")
                arrays[node.name] = node.size
            elif isinstance(node, Assign):
                scalars.add(node.name)
        for node in walk(fn):
            if isinstance(node, (Index, IndexAssign)) and node.name not in arrays:
                raise ParseError(node.line, node.col, f"undeclared array {node.name!r}")
            if isinstance(node, (Assign, Var)) and node.name in arrays:
                raise ParseError(node.line, node.col, f"array {node.name!r} used as a scalar")
            if isinstance(node, Var) and node.name not in scalars:
                raise ParseError(node.line, node.col, f"name {node.name!r} is never assigned")
            if isinstance(node, Call):
                callee = by_name.get(node.name)
                if callee is None:
                    raise ParseError(node.line, node.col, f"unknown function {node.name!r}")
                if len(callee.params) != len(node.args):
                    raise ParseError(
                        node.line,
                        node.col,
                        f"{node.name!r} takes {len(callee.params)} argument(s), "
                        f"got {len(node.args)}",
                    )


def parse(source: str, source_name: str = "<input>") -> Program:
    """Parse MiniLang source into a Program with preorder node ids."""
    functions = _Parser(tokenize(source)).program()
    if not functions:
        raise MissingMain(1, 1, "empty program")
    _resolve(functions)
    node_table = number_nodes(functions)
    return Program(functions, node_table, source_name)
