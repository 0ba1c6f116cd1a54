"""First-order mutation enumeration and higher-order mutant materialization.

The operator catalog is fixed: AOR, ROR, LCR, CONST, SDL, UNEG. Mutants
are materialized as patched ASTs (never schemata): patching copies only the
path from the root to each mutated node and shares all other subtrees with
the original program. Each patched node carries its mutation_id so the
engine records it into mutations_covered whenever the node is evaluated.

Statement deletion leaves a Skip tombstone that reuses the deleted
statement's node id: the mutation still reports coverage when control
reaches the deleted statement, which supermutant adjudication depends on.
"""

from __future__ import annotations

from dataclasses import dataclass

from .minilang import ast_nodes as A
from .minilang.parser import INT64_MAX, INT64_MIN
from .minilang.printer import format_expr
from .prng import SplitMix64


class OverlappingMutations(Exception):
    pass


class StaleMutation(Exception):
    pass


class SampleTooLarge(Exception):
    pass


@dataclass(frozen=True)
class MutationOperator:
    id: str
    description: str


OPERATORS = {
    "AOR": MutationOperator("AOR", "arithmetic operator replacement among + - * / %"),
    "CONST": MutationOperator("CONST", "integer literal replaced by c+1, c-1, 0"),
    "LCR": MutationOperator("LCR", "logical connector replacement between && and ||"),
    "ROR": MutationOperator("ROR", "relational operator replacement among < <= > >= == !="),
    "SDL": MutationOperator("SDL", "statement deletion"),
    "UNEG": MutationOperator("UNEG", "negation of an if/while condition"),
}

_AOR_OPS = ("+", "-", "*", "/", "%")
_ROR_OPS = ("<", "<=", ">", ">=", "==", "!=")

# statements SDL may delete; declarations and value-returning returns are
# excluded because removing them changes name resolution or the callee
# contract rather than modelling an omitted action
_DELETABLE = (A.Assign, A.IndexAssign, A.Print, A.Assert, A.ExprStmt, A.If, A.While)


@dataclass(frozen=True)
class Mutation:
    mutation_id: int
    operator: str
    node_id: int
    original_token: str
    replacement_token: str


@dataclass(frozen=True)
class Mutant:
    mutations: tuple[Mutation, ...]
    program: A.Program


def _stmt_token(stmt: A.Node) -> str:
    from .minilang import printer

    lines: list[str] = []
    printer._emit_stmt(stmt, 0, lines)
    return "\n".join(lines)


def _const_replacements(value: int) -> list[str]:
    candidates = []
    for cand in (value + 1, value - 1, 0):
        if cand == value or not INT64_MIN <= cand <= INT64_MAX:
            continue
        if cand not in candidates:
            candidates.append(cand)
    return sorted(str(c) for c in candidates)


def _site_mutations(node: A.Node) -> list[tuple[str, str, str]]:
    """(operator, original_token, replacement_token) triples at one node."""
    sites: list[tuple[str, str, str]] = []
    if isinstance(node, A.Binary):
        if node.op in _AOR_OPS:
            for alt in sorted(op for op in _AOR_OPS if op != node.op):
                sites.append(("AOR", node.op, alt))
        elif node.op in _ROR_OPS:
            for alt in sorted(op for op in _ROR_OPS if op != node.op):
                sites.append(("ROR", node.op, alt))
        elif node.op == "&&":
            sites.append(("LCR", "&&", "||"))
        elif node.op == "||":
            sites.append(("LCR", "||", "&&"))
    elif isinstance(node, A.IntLit):
        for repl in _const_replacements(node.value):
            sites.append(("CONST", str(node.value), repl))
    elif isinstance(node, _DELETABLE) or (isinstance(node, A.Return) and node.value is None):
        sites.append(("SDL", _stmt_token(node), ""))
    return sites


def enumerate_mutations(
    program: A.Program, operators: set[str] | None = None
) -> list[Mutation]:
    """All first-order mutations over the enabled operators.

    Order is deterministic: by node_id, then operator id, then replacement
    token. mutation_id is the dense index in that order.
    """
    if operators is None:
        operators = set(OPERATORS)
    unknown = operators - set(OPERATORS)
    if unknown:
        raise ValueError(f"unknown operators: {sorted(unknown)}")
    per_node: dict[int, list[tuple[str, str, str]]] = {}
    for node in program.walk():
        sites = [s for s in _site_mutations(node) if s[0] in operators]
        if sites:
            per_node.setdefault(node.node_id, []).extend(sites)
        if isinstance(node, (A.If, A.While)) and "UNEG" in operators:
            cond_text = format_expr(node.cond)
            per_node.setdefault(node.cond.node_id, []).append(
                ("UNEG", cond_text, f"!({cond_text})")
            )
    mutations: list[Mutation] = []
    for node_id in sorted(per_node):
        for op, orig, repl in sorted(per_node[node_id]):
            mutations.append(Mutation(len(mutations), op, node_id, orig, repl))
    return mutations


@dataclass(frozen=True)
class SamplingStrategy:
    kind: str = "all"  # "all" | "uniform" | "strata_by_operator"
    n: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("all", "uniform", "strata_by_operator"):
            raise ValueError(f"unknown sampling strategy {self.kind!r}")


def _pick(pool: list[Mutation], n: int, rng: SplitMix64) -> list[Mutation]:
    # partial Fisher-Yates; selection depends only on the rng stream
    work = list(pool)
    for i in range(n):
        j = i + rng.below(len(work) - i)
        work[i], work[j] = work[j], work[i]
    return work[:n]


def sample_mutations(mutations: list[Mutation], strategy: SamplingStrategy) -> list[Mutation]:
    """Reduce the mutation pool; output is sorted by mutation_id."""
    if strategy.kind == "all":
        return list(mutations)
    if strategy.n > len(mutations):
        raise SampleTooLarge(
            f"asked for {strategy.n} of {len(mutations)} mutations"
        )
    rng = SplitMix64(strategy.seed)
    if strategy.kind == "uniform":
        chosen = _pick(mutations, strategy.n, rng)
        return sorted(chosen, key=lambda m: m.mutation_id)
    # strata_by_operator: proportional allocation with largest-remainder
    # rounding, then uniform within each stratum
    strata: dict[str, list[Mutation]] = {}
    for m in mutations:
        strata.setdefault(m.operator, []).append(m)
    total = len(mutations)
    ops = sorted(strata)
    base: dict[str, int] = {}
    remainders: list[tuple[float, str]] = []
    for op in ops:
        exact = strategy.n * len(strata[op]) / total
        base[op] = int(exact)
        remainders.append((exact - int(exact), op))
    leftover = strategy.n - sum(base.values())
    for _, op in sorted(remainders, key=lambda t: (-t[0], t[1]))[:leftover]:
        base[op] += 1
    chosen = []
    for op in ops:
        chosen.extend(_pick(strata[op], base[op], rng))
    return sorted(chosen, key=lambda m: m.mutation_id)


def _patched_binary(node: A.Binary, mutation: Mutation) -> A.Binary:
    if node.op != mutation.original_token:
        raise StaleMutation(
            f"mutation {mutation.mutation_id}: node {node.node_id} has op "
            f"{node.op!r}, expected {mutation.original_token!r}"
        )
    return A.copy_node(node, op=mutation.replacement_token, mut_id=mutation.mutation_id)


def _patched_literal(node: A.IntLit, mutation: Mutation) -> A.IntLit:
    if str(node.value) != mutation.original_token:
        raise StaleMutation(
            f"mutation {mutation.mutation_id}: literal is {node.value}, "
            f"expected {mutation.original_token}"
        )
    return A.copy_node(node, value=int(mutation.replacement_token), mut_id=mutation.mutation_id)


def _patch_node(node: A.Node, mutation: Mutation) -> A.Node:
    op = mutation.operator
    if op in ("AOR", "ROR", "LCR"):
        if not isinstance(node, A.Binary):
            raise StaleMutation(f"node {node.node_id} is not a binary expression")
        return _patched_binary(node, mutation)
    if op == "CONST":
        if not isinstance(node, A.IntLit):
            raise StaleMutation(f"node {node.node_id} is not a literal")
        return _patched_literal(node, mutation)
    if op == "SDL":
        if _stmt_token(node) != mutation.original_token:
            raise StaleMutation(
                f"mutation {mutation.mutation_id}: statement text changed"
            )
        return A.Skip(node_id=node.node_id, line=node.line, col=node.col,
                      mut_id=mutation.mutation_id)
    raise AssertionError(f"unhandled operator {op}")


def _transform(node: A.Node, direct: dict[int, Mutation], uneg: dict[int, Mutation]) -> A.Node:
    changes = {}
    for field_name in A._CHILD_FIELDS[type(node)]:
        value = getattr(node, field_name)
        if value is None:
            continue
        if isinstance(value, list):
            new_list = [_transform(child, direct, uneg) for child in value]
            if any(a is not b for a, b in zip(new_list, value)):
                changes[field_name] = new_list
        else:
            new_child = _transform(value, direct, uneg)
            if new_child is not value:
                changes[field_name] = new_child
    out = A.copy_node(node, **changes) if changes else node
    if isinstance(node, (A.If, A.While)) and node.cond.node_id in uneg:
        mutation = uneg[node.cond.node_id]
        if format_expr(node.cond) != mutation.original_token:
            raise StaleMutation(
                f"mutation {mutation.mutation_id}: condition text changed"
            )
        out = A.copy_node(
            out, cond_negated=True, cond_mut_id=mutation.mutation_id
        )
    if node.node_id in direct:
        out = _patch_node(out, direct[node.node_id])
    return out


def apply_mutations(program: A.Program, mutations: list[Mutation]) -> Mutant:
    """Materialize a mutant containing all given mutations.

    Mutations must target pairwise-distinct nodes; node ids of unmutated
    nodes are unchanged.
    """
    if not mutations:
        raise ValueError("a mutant needs at least one mutation")
    by_node: dict[int, Mutation] = {}
    for m in mutations:
        if m.node_id in by_node:
            raise OverlappingMutations(
                f"mutations {by_node[m.node_id].mutation_id} and "
                f"{m.mutation_id} both target node {m.node_id}"
            )
        by_node[m.node_id] = m
    known = {n.node_id for n in program.walk()}
    for m in mutations:
        if m.node_id not in known:
            raise StaleMutation(f"node {m.node_id} does not exist in this program")
    direct = {m.node_id: m for m in mutations if m.operator != "UNEG"}
    uneg = {m.node_id: m for m in mutations if m.operator == "UNEG"}
    functions = [_transform(fn, direct, uneg) for fn in program.functions]
    ids = ",".join(str(m.mutation_id) for m in sorted(mutations, key=lambda m: m.mutation_id))
    patched = A.Program(
        functions=functions,
        node_table=program.node_table,
        source_name=f"{program.source_name}+m[{ids}]",
        patched=True,
    )
    return Mutant(tuple(sorted(mutations, key=lambda m: m.mutation_id)), patched)


def first_order_mutants(program: A.Program, mutations: list[Mutation]):
    """Yield (mutation, Mutant) pairs, one single-mutation mutant each."""
    for m in mutations:
        yield m, apply_mutations(program, [m])


def mutation_records(program: A.Program, mutations: list[Mutation]) -> list[dict]:
    """JSON-ready export: id, operator, location, and both tokens."""
    records = []
    for m in mutations:
        kind, line, col = program.node_table[m.node_id]
        records.append(
            {
                "mutation_id": m.mutation_id,
                "operator": m.operator,
                "node_id": m.node_id,
                "line": line,
                "col": col,
                "original": m.original_token,
                "replacement": m.replacement_token,
            }
        )
    return records


