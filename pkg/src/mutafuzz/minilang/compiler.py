"""Flattens a MiniLang AST into the instruction stream run by the engine.

Instructions are five ints wide: [opcode, a, b, node_id, mut_tag].
mut_tag is mutation_id + 1 on instructions belonging to a mutated node and
0 everywhere else. Opcodes <= OP_CHARGE_MAX consume one unit of fuel when
they execute; this is exactly one charge per statement or expression node
evaluation, which is the language's definition of a step.

Fuel, coverage, and mutation-coverage behaviour are therefore fixed at
compile time and are identical for the pure and compiled engines, which
run the same instruction stream.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast_nodes as A
from ._vm import (
    OP_ADD,
    OP_ANDJMP,
    OP_ASSERT,
    OP_BOOL,
    OP_BRF,
    OP_CALL,
    OP_CONST,
    OP_DIV,
    OP_EQ,
    OP_GE,
    OP_GT,
    OP_JMP,
    OP_LE,
    OP_LOAD,
    OP_LOADIDX,
    OP_LT,
    OP_MOD,
    OP_MUL,
    OP_NE,
    OP_NEG,
    OP_NOT,
    OP_ORJMP,
    OP_POP,
    OP_PRINT,
    OP_READBYTE,
    OP_READINT,
    OP_RET,
    OP_RET0,
    OP_SKIPSTMT,
    OP_STMT,
    OP_STORE,
    OP_STOREIDX,
    OP_SUB,
)

_BINOPS = {
    "+": OP_ADD,
    "-": OP_SUB,
    "*": OP_MUL,
    "/": OP_DIV,
    "%": OP_MOD,
    "<": OP_LT,
    "<=": OP_LE,
    ">": OP_GT,
    ">=": OP_GE,
    "==": OP_EQ,
    "!=": OP_NE,
}


@dataclass
class CompiledProgram:
    ops: list[int]
    consts: list[int]
    func_entry: list[int]
    func_argc: list[int]
    func_nslots: list[int]
    func_arrays: list[tuple[int, ...]]
    main_idx: int


class _FnCompiler:
    def __init__(self, emitter: "_Emitter", fn: A.FunctionDef, func_ids: dict[str, int]):
        self.em = emitter
        self.func_ids = func_ids
        self.slots: dict[str, int] = {p: i for i, p in enumerate(fn.params)}
        self.arrays: dict[str, int] = {}
        self.array_sizes: list[int] = []
        for node in A.walk(fn):
            # Var is included so that mutants whose assignment was deleted
            # still get a slot; unassigned scalars read as 0
            if isinstance(node, (A.Assign, A.Var)):
                if node.name not in self.slots:
                    self.slots[node.name] = len(self.slots)
            elif isinstance(node, A.ArrDecl):
                if node.name not in self.arrays:
                    self.arrays[node.name] = len(self.arrays)
                    self.array_sizes.append(node.size)

    def compile_body(self, fn: A.FunctionDef) -> None:
        self.block(fn.body)
        self.em.emit(OP_RET0, 0, 0, fn.node_id, 0)

    def block(self, block: A.Block) -> None:
        for stmt in block.stmts:
            self.stmt(stmt)

    def stmt(self, stmt: A.Node) -> None:
        em = self.em
        nid = stmt.node_id
        if isinstance(stmt, A.Skip):
            em.emit(OP_SKIPSTMT, 0, 0, nid, _mut(stmt.mut_id))
        elif isinstance(stmt, A.ArrDecl):
            em.emit(OP_STMT, 0, 0, nid, 0)
        elif isinstance(stmt, A.Assign):
            em.emit(OP_STMT, 0, 0, nid, 0)
            self.expr(stmt.value)
            em.emit(OP_STORE, self.slots[stmt.name], 0, nid, 0)
        elif isinstance(stmt, A.IndexAssign):
            em.emit(OP_STMT, 0, 0, nid, 0)
            self.expr(stmt.index)
            self.expr(stmt.value)
            em.emit(OP_STOREIDX, self.arrays[stmt.name], 0, nid, 0)
        elif isinstance(stmt, A.Print):
            em.emit(OP_STMT, 0, 0, nid, 0)
            self.expr(stmt.value)
            em.emit(OP_PRINT, 0, 0, nid, 0)
        elif isinstance(stmt, A.Assert):
            em.emit(OP_STMT, 0, 0, nid, 0)
            self.expr(stmt.cond)
            em.emit(OP_ASSERT, 0, 0, nid, 0)
        elif isinstance(stmt, A.Return):
            em.emit(OP_STMT, 0, 0, nid, 0)
            if stmt.value is None:
                em.emit(OP_RET0, 0, 0, nid, 0)
            else:
                self.expr(stmt.value)
                em.emit(OP_RET, 0, 0, nid, 0)
        elif isinstance(stmt, A.ExprStmt):
            em.emit(OP_STMT, 0, 0, nid, 0)
            self.expr(stmt.value)
            em.emit(OP_POP, 0, 0, nid, 0)
        elif isinstance(stmt, A.If):
            em.emit(OP_STMT, 0, 0, nid, 0)
            self.expr(stmt.cond)
            brf = em.emit(OP_BRF, 0, 0, stmt.cond.node_id, _mut(stmt.cond_mut_id))
            self.block(stmt.then_block)
            if stmt.else_part is None:
                em.patch(brf, em.here())
            else:
                jmp = em.emit(OP_JMP, 0, 0, nid, 0)
                em.patch(brf, em.here())
                if isinstance(stmt.else_part, A.If):
                    self.stmt(stmt.else_part)
                else:
                    self.block(stmt.else_part)
                em.patch(jmp, em.here())
        elif isinstance(stmt, A.While):
            em.emit(OP_STMT, 0, 0, nid, 0)
            top = em.here()
            self.expr(stmt.cond)
            brf = em.emit(OP_BRF, 0, 0, stmt.cond.node_id, _mut(stmt.cond_mut_id))
            self.block(stmt.body)
            em.emit(OP_JMP, top, 0, nid, 0)
            em.patch(brf, em.here())
        else:
            raise TypeError(f"not a statement node: {type(stmt).__name__}")

    def expr(self, node: A.Node) -> None:
        em = self.em
        nid = node.node_id
        if isinstance(node, A.IntLit):
            em.emit(OP_CONST, em.const(node.value), 0, nid, _mut(node.mut_id))
        elif isinstance(node, A.Var):
            em.emit(OP_LOAD, self.slots[node.name], 0, nid, 0)
        elif isinstance(node, A.Index):
            self.expr(node.index)
            em.emit(OP_LOADIDX, self.arrays[node.name], 0, nid, 0)
        elif isinstance(node, A.ReadByte):
            em.emit(OP_READBYTE, 0, 0, nid, 0)
        elif isinstance(node, A.ReadInt):
            em.emit(OP_READINT, 0, 0, nid, 0)
        elif isinstance(node, A.Unary):
            self.expr(node.operand)
            em.emit(OP_NEG if node.op == "-" else OP_NOT, 0, 0, nid, 0)
        elif isinstance(node, A.Call):
            for arg in node.args:
                self.expr(arg)
            em.emit(OP_CALL, self.func_ids[node.name], len(node.args), nid, 0)
        elif isinstance(node, A.Binary):
            mut = _mut(node.mut_id)
            if node.op == "&&" or node.op == "||":
                self.expr(node.left)
                jmp_op = OP_ANDJMP if node.op == "&&" else OP_ORJMP
                short = em.emit(jmp_op, 0, 0, nid, mut)
                self.expr(node.right)
                em.emit(OP_BOOL, 0, 0, nid, 0)
                em.patch(short, em.here())
            else:
                self.expr(node.left)
                self.expr(node.right)
                em.emit(_BINOPS[node.op], 0, 0, nid, mut)
        else:
            raise TypeError(f"not an expression node: {type(node).__name__}")


def _mut(mut_id: int | None) -> int:
    return 0 if mut_id is None else mut_id + 1


class _Emitter:
    def __init__(self):
        self.ops: list[int] = []
        self.consts: list[int] = []
        self._const_idx: dict[int, int] = {}

    def emit(self, op: int, a: int, b: int, node: int, mut: int) -> int:
        at = len(self.ops)
        self.ops.extend((op, a, b, node, mut))
        return at

    def patch(self, at: int, target: int) -> None:
        self.ops[at + 1] = target

    def here(self) -> int:
        return len(self.ops)

    def const(self, value: int) -> int:
        idx = self._const_idx.get(value)
        if idx is None:
            idx = len(self.consts)
            self.consts.append(value)
            self._const_idx[value] = idx
        return idx


def compile_program(program: A.Program) -> CompiledProgram:
    em = _Emitter()
    func_ids = {fn.name: i for i, fn in enumerate(program.functions)}
    entries: list[int] = []
    argcs: list[int] = []
    nslots: list[int] = []
    arrays: list[tuple[int, ...]] = []
    for fn in program.functions:
        fc = _FnCompiler(em, fn, func_ids)
        entries.append(em.here())
        fc.compile_body(fn)
        argcs.append(len(fn.params))
        nslots.append(len(fc.slots))
        arrays.append(tuple(fc.array_sizes))
    return CompiledProgram(
        ops=em.ops,
        consts=em.consts,
        func_entry=entries,
        func_argc=argcs,
        func_nslots=nslots,
        func_arrays=arrays,
        main_idx=func_ids["main"],
    )
