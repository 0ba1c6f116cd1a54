"""Execution engine for compiled MiniLang programs.

This is the hot kernel: fuzzing campaigns run it tens of thousands of
times per mutant. The module is plain Python that Cython can also compile
(setup.py copies it to _vm_compiled.pyx and builds an extension); engine.py
picks the compiled version when present. Only loop-structural locals carry
C type annotations. Arithmetic values stay Python ints on purpose: the
language requires checked signed 64-bit semantics, and doing the range
check on exact integers keeps both builds bit-identical by construction.

Instruction layout (see compiler.py): [opcode, a, b, node_id, mut_tag],
five ints per instruction. Opcodes <= OP_CHARGE_MAX consume one unit of
fuel, i.e. one statement/expression evaluation.

Status codes: 0 exit, 1 crash, 2 fuel exhausted.
Crash kinds: 1 DivByZero, 2 ModByZero, 3 IndexOutOfBounds, 4 AssertFail,
5 Overflow.
"""

import cython

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)

# cython.declare makes these C globals in the compiled build so the
# dispatch loop compares plain C ints; interpreted, they are ordinary ints

# charging opcodes (one fuel unit each)
OP_LOAD = cython.declare(cython.int, 1)
OP_CONST = cython.declare(cython.int, 2)
OP_ADD = cython.declare(cython.int, 3)
OP_SUB = cython.declare(cython.int, 4)
OP_MUL = cython.declare(cython.int, 5)
OP_DIV = cython.declare(cython.int, 6)
OP_MOD = cython.declare(cython.int, 7)
OP_LT = cython.declare(cython.int, 8)
OP_LE = cython.declare(cython.int, 9)
OP_GT = cython.declare(cython.int, 10)
OP_GE = cython.declare(cython.int, 11)
OP_EQ = cython.declare(cython.int, 12)
OP_NE = cython.declare(cython.int, 13)
OP_STMT = cython.declare(cython.int, 14)
OP_SKIPSTMT = cython.declare(cython.int, 15)
OP_LOADIDX = cython.declare(cython.int, 16)
OP_READBYTE = cython.declare(cython.int, 17)
OP_READINT = cython.declare(cython.int, 18)
OP_NEG = cython.declare(cython.int, 19)
OP_NOT = cython.declare(cython.int, 20)
OP_ANDJMP = cython.declare(cython.int, 21)
OP_ORJMP = cython.declare(cython.int, 22)
OP_CALL = cython.declare(cython.int, 23)
OP_CHARGE_MAX = cython.declare(cython.int, 23)

# non-charging opcodes
OP_BRF = cython.declare(cython.int, 24)
OP_JMP = cython.declare(cython.int, 25)
OP_BOOL = cython.declare(cython.int, 26)
OP_STORE = cython.declare(cython.int, 27)
OP_STOREIDX = cython.declare(cython.int, 28)
OP_POP = cython.declare(cython.int, 29)
OP_PRINT = cython.declare(cython.int, 30)
OP_ASSERT = cython.declare(cython.int, 31)
OP_RET = cython.declare(cython.int, 32)
OP_RET0 = cython.declare(cython.int, 33)

STATUS_EXIT = cython.declare(cython.int, 0)
STATUS_CRASH = cython.declare(cython.int, 1)
STATUS_FUEL = cython.declare(cython.int, 2)

CRASH_DIV = cython.declare(cython.int, 1)
CRASH_MOD = cython.declare(cython.int, 2)
CRASH_INDEX = cython.declare(cython.int, 3)
CRASH_ASSERT = cython.declare(cython.int, 4)
CRASH_OVERFLOW = cython.declare(cython.int, 5)


def run_vm(
    ops: list,
    consts: list,
    func_entry: list,
    func_argc: list,
    func_nslots: list,
    func_arrays: list,
    main_idx: cython.Py_ssize_t,
    inp: bytes,
    fuel_budget: cython.Py_ssize_t,
    prof,
):
    """Run a compiled program on one input.

    prof is either None or a set that collects the node_id of every charged
    (i.e. evaluated) statement/expression node.

    Returns (status, crash_kind, crash_node, fuel_used, output_text,
    coverage, mutations_covered). coverage is a set of ints encoding
    statement coverage as node_id << 2 and branch coverage as
    node_id << 2 | 2 | taken.
    """
    pc: cython.Py_ssize_t = func_entry[main_idx]
    fuel_used: cython.Py_ssize_t = 0
    inpos: cython.Py_ssize_t = 0
    inlen: cython.Py_ssize_t = len(inp)
    status: cython.int = STATUS_EXIT
    crash_kind: cython.int = 0
    crash_node: cython.Py_ssize_t = -1
    op: cython.int
    mut: cython.Py_ssize_t
    node: cython.Py_ssize_t

    stack: list = []
    locals_: list = [0] * func_nslots[main_idx]
    arrays_: list = [[0] * size for size in func_arrays[main_idx]]
    frames: list = []
    out: list = []
    cov: set = set()
    mcov: set = set()
    profiling: cython.bint = prof is not None

    while True:
        op = ops[pc]
        if op <= OP_CHARGE_MAX:
            if fuel_used == fuel_budget:
                status = STATUS_FUEL
                break
            fuel_used += 1
            if profiling:
                prof.add(ops[pc + 3])

        if op == OP_LOAD:
            stack.append(locals_[ops[pc + 1]])
            pc += 5
        elif op == OP_CONST:
            stack.append(consts[ops[pc + 1]])
            mut = ops[pc + 4]
            if mut:
                mcov.add(mut - 1)
            pc += 5
        elif op <= OP_NE:  # OP_ADD .. OP_NE
            b = stack.pop()
            a = stack[-1]
            if op == OP_ADD:
                v = a + b
                if v > INT64_MAX or v < INT64_MIN:
                    status = STATUS_CRASH
                    crash_kind = CRASH_OVERFLOW
                    crash_node = ops[pc + 3]
                    break
            elif op == OP_SUB:
                v = a - b
                if v > INT64_MAX or v < INT64_MIN:
                    status = STATUS_CRASH
                    crash_kind = CRASH_OVERFLOW
                    crash_node = ops[pc + 3]
                    break
            elif op == OP_MUL:
                v = a * b
                if v > INT64_MAX or v < INT64_MIN:
                    status = STATUS_CRASH
                    crash_kind = CRASH_OVERFLOW
                    crash_node = ops[pc + 3]
                    break
            elif op == OP_DIV:
                if b == 0:
                    status = STATUS_CRASH
                    crash_kind = CRASH_DIV
                    crash_node = ops[pc + 3]
                    break
                v = a // b
                if v > INT64_MAX:
                    status = STATUS_CRASH
                    crash_kind = CRASH_OVERFLOW
                    crash_node = ops[pc + 3]
                    break
            elif op == OP_MOD:
                if b == 0:
                    status = STATUS_CRASH
                    crash_kind = CRASH_MOD
                    crash_node = ops[pc + 3]
                    break
                v = a % b
            elif op == OP_LT:
                v = 1 if a < b else 0
            elif op == OP_LE:
                v = 1 if a <= b else 0
            elif op == OP_GT:
                v = 1 if a > b else 0
            elif op == OP_GE:
                v = 1 if a >= b else 0
            elif op == OP_EQ:
                v = 1 if a == b else 0
            else:
                v = 1 if a != b else 0
            stack[-1] = v
            mut = ops[pc + 4]
            if mut:
                mcov.add(mut - 1)
            pc += 5
        elif op == OP_STMT:
            cov.add(ops[pc + 3] << 2)
            pc += 5
        elif op == OP_BRF:
            v = stack.pop()
            node = ops[pc + 3]
            mut = ops[pc + 4]
            if mut:
                mcov.add(mut - 1)
                taken = v == 0
            else:
                taken = v != 0
            if taken:
                cov.add(node << 2 | 3)
                pc += 5
            else:
                cov.add(node << 2 | 2)
                pc = ops[pc + 1]
        elif op == OP_JMP:
            pc = ops[pc + 1]
        elif op == OP_STORE:
            locals_[ops[pc + 1]] = stack.pop()
            pc += 5
        elif op == OP_LOADIDX:
            arr = arrays_[ops[pc + 1]]
            a = stack[-1]
            if a < 0 or a >= len(arr):
                status = STATUS_CRASH
                crash_kind = CRASH_INDEX
                crash_node = ops[pc + 3]
                break
            stack[-1] = arr[a]
            pc += 5
        elif op == OP_STOREIDX:
            v = stack.pop()
            a = stack.pop()
            arr = arrays_[ops[pc + 1]]
            if a < 0 or a >= len(arr):
                status = STATUS_CRASH
                crash_kind = CRASH_INDEX
                crash_node = ops[pc + 3]
                break
            arr[a] = v
            pc += 5
        elif op == OP_READBYTE:
            if inpos < inlen:
                stack.append(inp[inpos])
                inpos += 1
            else:
                stack.append(-1)
            pc += 5
        elif op == OP_READINT:
            r = 0
            shift: cython.int = 0
            while shift < 32 and inpos < inlen:
                r |= inp[inpos] << shift
                shift += 8
                inpos += 1
            if r >= 0x80000000:
                r -= 0x100000000
            stack.append(r)
            pc += 5
        elif op == OP_NEG:
            v = -stack[-1]
            if v > INT64_MAX:
                status = STATUS_CRASH
                crash_kind = CRASH_OVERFLOW
                crash_node = ops[pc + 3]
                break
            stack[-1] = v
            pc += 5
        elif op == OP_NOT:
            stack[-1] = 1 if stack[-1] == 0 else 0
            pc += 5
        elif op == OP_ANDJMP:
            mut = ops[pc + 4]
            if mut:
                mcov.add(mut - 1)
            if stack[-1] == 0:
                stack[-1] = 0
                pc = ops[pc + 1]
            else:
                stack.pop()
                pc += 5
        elif op == OP_ORJMP:
            mut = ops[pc + 4]
            if mut:
                mcov.add(mut - 1)
            if stack[-1] != 0:
                stack[-1] = 1
                pc = ops[pc + 1]
            else:
                stack.pop()
                pc += 5
        elif op == OP_BOOL:
            stack[-1] = 0 if stack[-1] == 0 else 1
            pc += 5
        elif op == OP_POP:
            stack.pop()
            pc += 5
        elif op == OP_PRINT:
            out.append(str(stack.pop()))
            out.append("\n")
            pc += 5
        elif op == OP_ASSERT:
            if stack.pop() == 0:
                status = STATUS_CRASH
                crash_kind = CRASH_ASSERT
                crash_node = ops[pc + 3]
                break
            pc += 5
        elif op == OP_SKIPSTMT:
            cov.add(ops[pc + 3] << 2)
            mut = ops[pc + 4]
            if mut:
                mcov.add(mut - 1)
            pc += 5
        elif op == OP_CALL:
            fidx: cython.Py_ssize_t = ops[pc + 1]
            argc: cython.Py_ssize_t = ops[pc + 2]
            new_locals = [0] * func_nslots[fidx]
            i: cython.Py_ssize_t = argc - 1
            while i >= 0:
                new_locals[i] = stack.pop()
                i -= 1
            frames.append((pc + 5, locals_, arrays_))
            locals_ = new_locals
            arrays_ = [[0] * size for size in func_arrays[fidx]]
            pc = func_entry[fidx]
        elif op == OP_RET or op == OP_RET0:
            rv = stack.pop() if op == OP_RET else 0
            if frames:
                frame = frames.pop()
                pc = frame[0]
                locals_ = frame[1]
                arrays_ = frame[2]
                stack.append(rv)
            else:
                status = STATUS_EXIT
                break
        else:
            raise AssertionError(f"bad opcode {op} at pc {pc}")

    # a run that consumed the entire budget is reported as a hang even if
    # it was about to exit or crash: outcome is FuelExhausted iff
    # fuel_used == budget
    if fuel_used == fuel_budget:
        status = STATUS_FUEL
        crash_kind = 0
        crash_node = -1

    return (status, crash_kind, crash_node, fuel_used, "".join(out), cov, mcov)
