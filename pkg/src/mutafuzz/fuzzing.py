"""Built-in fuzzers and the campaign engine.

Two fuzzers ship with the harness: a hidden-box random fuzzer that draws
every input from scratch, and a coverage-guided greybox fuzzer that keeps
a corpus and mutates it with a havoc stack, adding an input whenever it
produced a coverage element unseen in the campaign.

All progress is virtual time: one unit per target execution. Campaigns are
pure functions of (target, config, budget, seed), so logs replay exactly.
Baseline comparisons for the kill oracle are made lazily; under the crash
oracle a baseline run is only needed when the mutant actually crashed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .minilang import OracleMode, execute, execute_profiled, kills
from .minilang.ast_nodes import Program
from .minilang.interp import CRASH, FUEL_EXHAUSTED, ExecutionResult, MODE_CRASH
from .prng import SplitMix64


class InvalidConfig(Exception):
    pass


@dataclass(frozen=True)
class FuzzerConfig:
    name: str
    kind: str  # "random" | "greybox"
    rng_seed: int
    max_input_len: int = 1024
    fuel_per_exec: int = 4096
    initial_corpus: tuple[bytes, ...] = (b"",)

    def validate(self) -> None:
        if self.kind not in ("random", "greybox"):
            raise InvalidConfig(f"unknown fuzzer kind {self.kind!r}")
        if self.max_input_len < 1:
            raise InvalidConfig("max_input_len must be >= 1")
        if self.fuel_per_exec <= 0:
            raise InvalidConfig("fuel_per_exec must be positive")
        if self.kind == "greybox" and not self.initial_corpus:
            raise InvalidConfig("greybox needs a non-empty initial corpus "
                                "(a single empty input counts)")
        for inp in self.initial_corpus:
            if len(inp) > self.max_input_len:
                raise InvalidConfig("corpus input longer than max_input_len")


def next_input_random(rng: SplitMix64, max_input_len: int) -> bytes:
    """Fresh input: length uniform in [0, max_input_len], bytes uniform."""
    return rng.bytes(rng.below(max_input_len + 1))


_N_EDITS = 7


def havoc_mutate(data: bytes, rng: SplitMix64, max_input_len: int) -> bytes:
    """Stacked random edits on one corpus input.

    Applies 1-8 edits drawn from: bit flip, byte overwrite, byte +-[1,8],
    delete span, duplicate span, insert random bytes, truncate. Edits that
    need an existing byte are skipped on an empty buffer. The result is
    clamped to max_input_len.
    """
    buf = bytearray(data)
    for _ in range(1 + rng.below(8)):
        kind = rng.below(_N_EDITS)
        n = len(buf)
        if kind == 0 and n:
            buf[rng.below(n)] ^= 1 << rng.below(8)
        elif kind == 1 and n:
            buf[rng.below(n)] = rng.below(256)
        elif kind == 2 and n:
            pos = rng.below(n)
            delta = 1 + rng.below(8)
            if rng.below(2):
                delta = -delta
            buf[pos] = (buf[pos] + delta) & 0xFF
        elif kind == 3 and n:
            start = rng.below(n)
            del buf[start : start + 1 + rng.below(n - start)]
        elif kind == 4 and n:
            start = rng.below(n)
            span = buf[start : start + 1 + rng.below(n - start)]
            buf[start + len(span) : start + len(span)] = span
        elif kind == 5:
            pos = rng.below(n + 1)
            buf[pos:pos] = rng.bytes(1 + rng.below(16))
        elif kind == 6 and n:
            del buf[rng.below(n + 1) :]
    del buf[max_input_len:]
    return bytes(buf)


@dataclass
class GrowthInput:
    """A coverage-increasing input with its execution profile."""

    vtime: int
    data: bytes
    elements: frozenset[int]
    nodes: frozenset[int]


@dataclass
class CampaignLog:
    fuzzer: str
    target_name: str
    executions: int = 0
    coverage_events: list[tuple[int, int]] = field(default_factory=list)
    kill_events: list[tuple[int, int, bytes]] = field(default_factory=list)
    corpus_final: list[bytes] = field(default_factory=list)
    covered_mutations: dict[int, int] = field(default_factory=dict)
    status: str = "completed"  # | "all_killed" | "saturated" | "violation"
    violation: tuple[int, ...] | None = None
    node_first_cover: dict[int, int] | None = None
    growth_inputs: list[GrowthInput] | None = None
    defects: list[dict] = field(default_factory=list)


def _may_kill(result: ExecutionResult, oracle: OracleMode) -> bool:
    if oracle.mode != MODE_CRASH:
        return True
    if result.outcome == CRASH:
        return True
    return oracle.hangs_are_kills and result.outcome == FUEL_EXHAUSTED


def run_campaign(
    target: Program,
    config: FuzzerConfig,
    budget_execs: int,
    oracle: OracleMode,
    baseline: Program,
    *,
    rng_seed: int | None = None,
    group: tuple[int, ...] = (),
    alive: frozenset[int] | None = None,
    baseline_seed_results: dict[bytes, ExecutionResult] | None = None,
    stop_after_no_new_cov: int | None = None,
    track_node_cover: bool = False,
    collect_growth_inputs: bool = False,
    verify_zero_covered: bool = False,
) -> CampaignLog:
    """Run one fuzzing campaign against a target program.

    group lists the mutation ids materialized in the target (empty for the
    original program); alive defaults to all of group. A kill is recorded
    when exactly one grouped mutation is covered and the oracle fires; an
    input covering two or more grouped mutations aborts the campaign with a
    violation (the pipeline splits the supermutant and reschedules).
    """
    config.validate()
    if budget_execs <= 0:
        raise InvalidConfig("budget_execs must be positive")
    rng = SplitMix64(config.rng_seed if rng_seed is None else rng_seed)
    fuel = config.fuel_per_exec
    group_set = frozenset(group)
    alive_set = set(group_set if alive is None else alive)
    seed_results = baseline_seed_results or {}

    log = CampaignLog(fuzzer=config.name, target_name=target.source_name)
    if track_node_cover:
        log.node_first_cover = {}
    if collect_growth_inputs:
        log.growth_inputs = []

    greybox = config.kind == "greybox"
    corpus: list[bytes] = list(config.initial_corpus) if greybox else []
    seen_cov: set[int] = set()
    vtime = 0
    last_new = 0
    pending_seeds = len(corpus) if greybox else 0

    def baseline_result(data: bytes) -> ExecutionResult:
        cached = seed_results.get(data)
        if cached is not None:
            return cached
        return execute(baseline, data, fuel)

    while vtime < budget_execs:
        if pending_seeds:
            data = corpus[len(corpus) - pending_seeds]
            pending_seeds -= 1
            from_corpus = True
        elif greybox:
            data = havoc_mutate(corpus[rng.below(len(corpus))], rng, config.max_input_len)
            from_corpus = False
        else:
            data = next_input_random(rng, config.max_input_len)
            from_corpus = False
        vtime += 1

        if track_node_cover or collect_growth_inputs:
            result, nodes = execute_profiled(target, data, fuel)
            if track_node_cover:
                nfc = log.node_first_cover
                for node in nodes:
                    if node not in nfc:
                        nfc[node] = vtime
        else:
            result = execute(target, data, fuel)
            nodes = frozenset()

        if not result.coverage_raw <= seen_cov:
            new_codes = result.coverage_raw - seen_cov
            for code in sorted(new_codes):
                log.coverage_events.append((vtime, code))
            seen_cov |= new_codes
            last_new = vtime
            if greybox and not from_corpus:
                corpus.append(data)
            if collect_growth_inputs:
                log.growth_inputs.append(
                    GrowthInput(vtime, data, frozenset(result.coverage_raw), nodes)
                )

        for mid in result.mutations_covered:
            if mid not in log.covered_mutations:
                log.covered_mutations[mid] = vtime

        covered_in_group = result.mutations_covered & group_set
        if len(covered_in_group) >= 2:
            log.status = "violation"
            log.violation = tuple(sorted(covered_in_group))
            break
        if len(covered_in_group) == 1:
            (mid,) = covered_in_group
            if mid in alive_set and _may_kill(result, oracle):
                if kills(baseline_result(data), result, oracle):
                    log.kill_events.append((vtime, mid, data))
                    alive_set.discard(mid)
                    if not alive_set:
                        log.status = "all_killed"
                        break
        elif verify_zero_covered and group_set:
            if kills(baseline_result(data), result, oracle):
                log.defects.append(
                    {"vtime": vtime, "input": data.hex(),
                     "note": "behavioral difference with zero covered mutations"}
                )

        if stop_after_no_new_cov is not None and vtime - last_new >= stop_after_no_new_cov:
            log.status = "saturated"
            break

    log.executions = vtime
    log.corpus_final = corpus
    return log
