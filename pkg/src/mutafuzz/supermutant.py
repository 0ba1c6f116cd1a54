"""Grouping of surviving mutations into higher-order supermutants.

Two mutations may share a supermutant only if no profiling input covers
both mutated nodes (and they sit on distinct nodes). Co-coverage under the
coverage seed approximates semantic independence; the approximation is made
safe at runtime: an execution that covers two grouped mutations is an
independence violation, the kill (if any) is discarded, and the offending
mutations are split into fresh supermutants with their own campaigns.

A kill is attributed to the single grouped mutation covered by the killing
input; the crash node is kept on the log for auditing the cases where the
crash site is not the mutated node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from .minilang import OracleMode, kills
from .minilang.interp import ExecutionResult
from .mutation import Mutant, Mutation


@dataclass
class ConflictGraph:
    """Symmetric irreflexive graph over mutation ids."""

    vertices: tuple[int, ...]
    adj: dict[int, set[int]]

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adj.get(a, ())

    def degree(self, v: int) -> int:
        return len(self.adj.get(v, ()))


def build_conflict_graph(
    mutations: Iterable[Mutation],
    profiles: Iterable[tuple[bytes, frozenset[int]]],
) -> ConflictGraph:
    """Edges join mutations co-covered by some profiling input.

    profiles come from executing the original program on the coverage seed;
    each entry is (input, set of covered node ids). Two mutations on the
    same node always conflict regardless of profiles.
    """
    muts = sorted(mutations, key=lambda m: m.mutation_id)
    adj: dict[int, set[int]] = {m.mutation_id: set() for m in muts}

    by_node: dict[int, list[int]] = {}
    for m in muts:
        by_node.setdefault(m.node_id, []).append(m.mutation_id)
    for ids in by_node.values():
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)

    for _, covered_nodes in profiles:
        hit = [m.mutation_id for m in muts if m.node_id in covered_nodes]
        for i, a in enumerate(hit):
            for b in hit[i + 1 :]:
                adj[a].add(b)
                adj[b].add(a)

    return ConflictGraph(tuple(m.mutation_id for m in muts), adj)


def group_supermutants(graph: ConflictGraph, max_group_size: int) -> list[tuple[int, ...]]:
    """Partition mutations into independent sets.

    Greedy graph coloring in descending-degree order (ties by mutation id),
    then color classes are chunked to max_group_size. Deterministic; groups
    are returned sorted by their smallest member.
    """
    if max_group_size < 1:
        raise ValueError("max_group_size must be >= 1")
    order = sorted(graph.vertices, key=lambda v: (-graph.degree(v), v))
    color_of: dict[int, int] = {}
    classes: list[list[int]] = []
    for v in order:
        used = {color_of[u] for u in graph.adj.get(v, ()) if u in color_of}
        color = 0
        while color in used:
            color += 1
        color_of[v] = color
        if color == len(classes):
            classes.append([])
        classes[color].append(v)
    groups: list[tuple[int, ...]] = []
    for members in classes:
        members.sort()
        for i in range(0, len(members), max_group_size):
            groups.append(tuple(members[i : i + max_group_size]))
    groups.sort(key=lambda g: g[0])
    return groups


ALIVE = "alive"
KILLED = "killed"
VIOLATED = "violated"


@dataclass
class Supermutant:
    """A group of mutations evaluated by one campaign."""

    sm_id: str
    group: tuple[int, ...]
    mutant: Mutant
    status: dict[int, str] = field(default_factory=dict)
    killed_at: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for mid in self.group:
            self.status.setdefault(mid, ALIVE)

    def alive(self) -> frozenset[int]:
        return frozenset(m for m in self.group if self.status[m] == ALIVE)

    def mark_killed(self, mid: int, vtime: int) -> None:
        self.status[mid] = KILLED
        self.killed_at[mid] = vtime


@dataclass(frozen=True)
class Verdict:
    kind: str  # "killed" | "violation" | "no_kill" | "no_effect" | "harness_defect"
    mutation_id: int | None = None
    violating: tuple[int, ...] = ()


def adjudicate_execution(
    sm: Supermutant,
    result: ExecutionResult,
    baseline_result: ExecutionResult,
    oracle: OracleMode,
) -> Verdict:
    """Decide what one execution of the supermutant means.

    Exactly one grouped mutation covered and the oracle fires: that
    mutation is killed. Two or more grouped mutations covered: independence
    violation, nothing is attributed. Zero covered: any behavioral
    difference would be a harness defect, since an unreached patch cannot
    act.
    """
    covered = frozenset(result.mutations_covered) & frozenset(sm.group)
    if len(covered) >= 2:
        return Verdict("violation", violating=tuple(sorted(covered)))
    if len(covered) == 1:
        (mid,) = covered
        if sm.status.get(mid) == ALIVE and kills(baseline_result, result, oracle):
            return Verdict("killed", mutation_id=mid)
        return Verdict("no_kill", mutation_id=mid)
    if kills(baseline_result, result, oracle):
        return Verdict("harness_defect")
    return Verdict("no_effect")


def split_on_violation(
    sm: Supermutant,
    violating: Iterable[int],
    materialize: Callable[[tuple[int, ...]], Mutant],
) -> list[Supermutant]:
    """Split a violated supermutant; returns the replacements.

    The lowest violating mutation stays with the group; every other
    violating mutation moves to a fresh singleton supermutant. All returned
    supermutants carry re-materialized programs, and campaign budgets for
    them restart from zero.
    """
    violating = sorted(violating)
    if len(violating) < 2:
        raise ValueError("a violation involves at least two mutations")
    if not set(violating) <= set(sm.group):
        raise ValueError("violating mutations must belong to the supermutant")
    moved = violating[1:]
    kept_group = tuple(m for m in sm.group if m not in moved)
    out = [
        Supermutant(
            sm_id=sm.sm_id,
            group=kept_group,
            mutant=materialize(kept_group),
            status={m: sm.status[m] for m in kept_group},
            killed_at={m: v for m, v in sm.killed_at.items() if m in kept_group},
        )
    ]
    for mid in moved:
        out.append(
            Supermutant(
                sm_id=f"{sm.sm_id}.m{mid}",
                group=(mid,),
                mutant=materialize((mid,)),
                status={mid: sm.status[mid]},
                killed_at={mid: sm.killed_at[mid]} if mid in sm.killed_at else {},
            )
        )
    return out
