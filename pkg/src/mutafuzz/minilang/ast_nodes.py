"""AST node types for MiniLang and the Program container.

Node ids are preorder traversal indices assigned once by the parser and are
dense in [0, node_count) for parsed programs. Patched programs (mutants)
keep the original ids on unchanged nodes; a deleted statement is replaced
by a Skip tombstone that reuses the deleted statement's id.

Nodes are never modified after parsing. Mutant construction copies only the
path from the root to each patched node and shares every other subtree.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass
class Node:
    node_id: int = field(default=-1, kw_only=True)
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)


# --- expressions ---


@dataclass
class IntLit(Node):
    value: int
    # set on CONST-mutated copies; recorded when the literal is evaluated
    mut_id: int | None = field(default=None, kw_only=True)


@dataclass
class Var(Node):
    name: str


@dataclass
class Index(Node):
    name: str
    index: Node


@dataclass
class Call(Node):
    name: str
    args: list[Node]


@dataclass
class ReadByte(Node):
    pass


@dataclass
class ReadInt(Node):
    pass


@dataclass
class Unary(Node):
    op: str  # "-" or "!"
    operand: Node


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node
    mut_id: int | None = field(default=None, kw_only=True)  # AOR/ROR/LCR


# --- statements ---


@dataclass
class ArrDecl(Node):
    name: str
    size: int


@dataclass
class Assign(Node):
    name: str
    value: Node


@dataclass
class IndexAssign(Node):
    name: str
    index: Node
    value: Node


@dataclass
class If(Node):
    cond: Node
    then_block: Block
    else_part: Block | If | None = None
    # UNEG patch: condition result is inverted, coverage recorded at the
    # condition node when it is evaluated
    cond_negated: bool = field(default=False, kw_only=True)
    cond_mut_id: int | None = field(default=None, kw_only=True)


@dataclass
class While(Node):
    cond: Node
    body: Block
    cond_negated: bool = field(default=False, kw_only=True)
    cond_mut_id: int | None = field(default=None, kw_only=True)


@dataclass
class Return(Node):
    value: Node | None = None


@dataclass
class Assert(Node):
    cond: Node


@dataclass
class Print(Node):
    value: Node


@dataclass
class ExprStmt(Node):
    value: Node


@dataclass
class Skip(Node):
    """Tombstone left by statement deletion; evaluates to a no-op."""

    mut_id: int | None = field(default=None, kw_only=True)


@dataclass
class Block(Node):
    stmts: list[Node]


@dataclass
class FunctionDef(Node):
    name: str
    params: list[str]
    body: Block


_CHILD_FIELDS = {
    IntLit: (),
    Var: (),
    Index: ("index",),
    Call: ("args",),
    ReadByte: (),
    ReadInt: (),
    Unary: ("operand",),
    Binary: ("left", "right"),
    ArrDecl: (),
    Assign: ("value",),
    IndexAssign: ("index", "value"),
    If: ("cond", "then_block", "else_part"),
    While: ("cond", "body"),
    Return: ("value",),
    Assert: ("cond",),
    Print: ("value",),
    ExprStmt: ("value",),
    Skip: (),
    Block: ("stmts",),
    FunctionDef: ("body",),
}


def children(node: Node) -> list[Node]:
    """Child nodes in preorder-numbering order."""
    out: list[Node] = []
    for name in _CHILD_FIELDS[type(node)]:
        value = getattr(node, name)
        if value is None:
            continue
        if isinstance(value, list):
            out.extend(value)
        else:
            out.append(value)
    return out


def walk(node: Node):
    """Yield node and all descendants in preorder."""
    yield node
    for child in children(node):
        yield from walk(child)


def copy_node(node: Node, **changes) -> Node:
    """Shallow copy preserving node_id and span."""
    return replace(node, **changes)


@dataclass
class Program:
    """A parsed (or patched) MiniLang program.

    node_table maps node_id to (kind, line, col) of the original source and
    is shared between a program and its mutants.
    """

    functions: list[FunctionDef]
    node_table: dict[int, tuple[str, int, int]]
    source_name: str
    patched: bool = False

    def __post_init__(self):
        self._ir = None
        self._by_id: dict[int, Node] | None = None

    @property
    def node_count(self) -> int:
        return len(self.node_table)

    def walk(self):
        for fn in self.functions:
            yield from walk(fn)

    def node_by_id(self, node_id: int) -> Node:
        if self._by_id is None:
            self._by_id = {n.node_id: n for n in self.walk()}
        return self._by_id[node_id]

    def ir(self):
        """Compiled form used by the execution engine, built lazily."""
        if self._ir is None:
            from . import compiler

            self._ir = compiler.compile_program(self)
        return self._ir


def number_nodes(functions: list[FunctionDef]) -> dict[int, tuple[str, int, int]]:
    """Assign preorder node ids across all functions; returns the node table."""
    table: dict[int, tuple[str, int, int]] = {}
    counter = 0
    for fn in functions:
        for node in walk(fn):
            node.node_id = counter
            table[counter] = (type(node).__name__, node.line, node.col)
            counter += 1
    return table
