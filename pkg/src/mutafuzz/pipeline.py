"""Staged evaluation pipeline.

Order of phases: a coverage phase runs every fuzzer on the original program
until its coverage saturates; the coverage-increasing inputs are minimized
into the coverage seed; a static pass replays the seed against every
first-order mutant (selecting only inputs that cover the mutated node) and
removes the trivially killed ones; survivors are grouped into supermutants
and each gets a fuzzing campaign per (fuzzer, trial), seeded with the
coverage seed. Classification assigns each mutation exactly one of:
trivial, intelligent, stubborn, live-covered, uncovered.

Campaigns are independent units of work: the scheduler may run any number
concurrently and the results are identical for any job count, because every
campaign's RNG stream is derived from (fuzzer seed, trial seed, supermutant
id, generation) and nothing else.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .fuzzing import CampaignLog, FuzzerConfig, InvalidConfig, run_campaign
from .minilang import OracleMode, execute, execute_profiled
from .minilang.ast_nodes import Program
from .minilang.interp import ExecutionResult, MODE_CRASH, MODE_DIFF, kills
from .mutation import Mutation, SamplingStrategy, apply_mutations
from .prng import derive
from .supermutant import (
    ALIVE,
    KILLED,
    Supermutant,
    build_conflict_graph,
    group_supermutants,
    split_on_violation,
)

DEFAULT_OPERATORS = ("AOR", "CONST", "LCR", "ROR", "SDL", "UNEG")


@dataclass(frozen=True)
class PipelineConfig:
    fuzzers: tuple[FuzzerConfig, ...]
    oracle: OracleMode = OracleMode()
    operators: tuple[str, ...] = DEFAULT_OPERATORS
    sampling: SamplingStrategy = SamplingStrategy()
    phase1_budget: int = 50_000
    saturation_window: int = 10_000
    phase2_budget: int = 20_000
    trials: int = 5
    trial_seeds: tuple[int, ...] = (101, 102, 103, 104, 105)
    max_group_size: int = 16
    max_respawns: int | None = None

    def validate(self) -> None:
        if not self.fuzzers:
            raise InvalidConfig("at least one fuzzer is required")
        names = [f.name for f in self.fuzzers]
        if len(set(names)) != len(names):
            raise InvalidConfig("fuzzer names must be unique")
        for f in self.fuzzers:
            f.validate()
        fuels = {f.fuel_per_exec for f in self.fuzzers}
        if len(fuels) != 1:
            # oracle comparisons need baseline and mutant at the same fuel
            raise InvalidConfig("all fuzzers must share fuel_per_exec")
        if self.phase1_budget <= 0 or self.phase2_budget <= 0:
            raise InvalidConfig("budgets must be positive")
        if self.saturation_window <= 0:
            raise InvalidConfig("saturation_window must be positive")
        if self.trials < 1:
            raise InvalidConfig("trials must be >= 1")
        if len(self.trial_seeds) != self.trials:
            raise InvalidConfig("need exactly one trial seed per trial")
        if self.max_group_size < 1:
            raise InvalidConfig("max_group_size must be >= 1")

    @property
    def fuel(self) -> int:
        return self.fuzzers[0].fuel_per_exec


# --- phase 1: coverage ---


@dataclass
class SeedInput:
    data: bytes
    elements: frozenset[int]
    nodes: frozenset[int]
    origin_fuzzer: str
    origin_vtime: int


@dataclass
class Phase1Result:
    logs: dict[str, CampaignLog]
    curves: dict[str, list[tuple[int, int]]]
    saturated_at: dict[str, int | None]
    candidates: list[SeedInput]


def _coverage_curve(log: CampaignLog) -> list[tuple[int, int]]:
    curve = []
    total = 0
    current_vtime = None
    for vtime, _ in log.coverage_events:
        if vtime != current_vtime:
            if current_vtime is not None:
                curve.append((current_vtime, total))
            current_vtime = vtime
        total += 1
    if current_vtime is not None:
        curve.append((current_vtime, total))
    return curve


def run_coverage_phase(program: Program, config: PipelineConfig) -> Phase1Result:
    """Run every fuzzer on the original program until coverage saturates."""
    logs: dict[str, CampaignLog] = {}
    curves: dict[str, list[tuple[int, int]]] = {}
    saturated: dict[str, int | None] = {}
    candidates: list[SeedInput] = []
    for fuzzer in config.fuzzers:
        log = run_campaign(
            program,
            fuzzer,
            config.phase1_budget,
            config.oracle,
            program,
            rng_seed=derive(fuzzer.rng_seed, "phase1"),
            stop_after_no_new_cov=config.saturation_window,
            track_node_cover=True,
            collect_growth_inputs=True,
        )
        logs[fuzzer.name] = log
        curves[fuzzer.name] = _coverage_curve(log)
        if log.status == "saturated":
            saturated[fuzzer.name] = log.coverage_events[-1][0] if log.coverage_events else 0
        else:
            saturated[fuzzer.name] = None
        for gi in log.growth_inputs or ():
            candidates.append(
                SeedInput(gi.data, gi.elements, gi.nodes, fuzzer.name, gi.vtime)
            )
    return Phase1Result(logs, curves, saturated, candidates)


# --- coverage seed minimization ---


@dataclass
class CoverageSeed:
    inputs: list[SeedInput]
    covered: frozenset[int]


def minimize_corpus(candidates: list[SeedInput]) -> CoverageSeed:
    """Greedy set cover over coverage elements.

    Repeatedly picks the input covering the most still-uncovered elements;
    ties go to the earliest origin vtime, then the shortest input, then the
    input bytes. The selected set covers exactly the union of all
    candidates' elements.
    """
    unique: dict[bytes, SeedInput] = {}
    for cand in candidates:
        prev = unique.get(cand.data)
        if prev is None or cand.origin_vtime < prev.origin_vtime:
            unique[cand.data] = cand
    pool = list(unique.values())
    universe = frozenset().union(*(c.elements for c in pool)) if pool else frozenset()
    chosen: list[SeedInput] = []
    covered: set[int] = set()
    while covered != universe:
        best = max(
            pool,
            key=lambda c: (
                len(c.elements - covered),
                -c.origin_vtime,
                -len(c.data),
                _neg_bytes(c.data),
            ),
        )
        gain = len(best.elements - covered)
        if gain == 0:
            break
        chosen.append(best)
        covered |= best.elements
        pool.remove(best)
    return CoverageSeed(chosen, frozenset(covered))


def _neg_bytes(data: bytes) -> bytes:
    # byte-wise complement so that max() prefers lexicographically smaller data
    return bytes(255 - b for b in data)


# --- static kill pass ---


@dataclass
class StaticPass:
    trivially_killed: dict[int, int]  # mutation_id -> seed input index of first kill
    survivors: list[Mutation]
    executions: int
    baseline_results: dict[bytes, ExecutionResult]


def static_kill_pass(
    program: Program,
    mutations: list[Mutation],
    seed: CoverageSeed,
    oracle: OracleMode,
    fuel: int,
) -> StaticPass:
    """Replay the coverage seed against each first-order mutant.

    Coverage-based test selection: only seed inputs whose profile covers
    the mutated node are executed, which is sound for a static suite.
    Mutants whose node no seed input covers survive with zero executions.
    """
    baseline_results = {
        si.data: execute(program, si.data, fuel) for si in seed.inputs
    }
    trivially_killed: dict[int, int] = {}
    survivors: list[Mutation] = []
    executions = 0
    for m in mutations:
        selected = [i for i, si in enumerate(seed.inputs) if m.node_id in si.nodes]
        killer = None
        if selected:
            mutant = apply_mutations(program, [m])
            for i in selected:
                data = seed.inputs[i].data
                executions += 1
                result = execute(mutant.program, data, fuel)
                if kills(baseline_results[data], result, oracle):
                    killer = i
                    break
        if killer is None:
            survivors.append(m)
        else:
            trivially_killed[m.mutation_id] = killer
    return StaticPass(trivially_killed, survivors, executions, baseline_results)


# --- phase 2: per-supermutant campaigns ---


def plan_supermutants(
    program: Program,
    survivors: list[Mutation],
    seed: CoverageSeed,
    max_group_size: int,
) -> list[Supermutant]:
    graph = build_conflict_graph(survivors, [(si.data, si.nodes) for si in seed.inputs])
    groups = group_supermutants(graph, max_group_size)
    by_id = {m.mutation_id: m for m in survivors}
    supermutants = []
    for i, group in enumerate(groups):
        mutant = apply_mutations(program, [by_id[mid] for mid in group])
        supermutants.append(Supermutant(sm_id=f"sm{i:04d}", group=group, mutant=mutant))
    return supermutants


@dataclass
class TrialRun:
    fuzzer: str
    trial: int
    campaigns: dict[str, list[CampaignLog]] = field(default_factory=dict)
    final_groups: dict[str, tuple[int, ...]] = field(default_factory=dict)
    backlog: list[int] = field(default_factory=list)

    def kill_events(self):
        for sm_id in sorted(self.campaigns):
            for log in self.campaigns[sm_id]:
                for vtime, mid, data in log.kill_events:
                    yield sm_id, vtime, mid, data


@dataclass
class Phase2Result:
    trial_runs: dict[tuple[str, int], TrialRun]
    supermutant_plan: dict[str, tuple[int, ...]]

    def runs_sorted(self) -> list[TrialRun]:
        return [self.trial_runs[key] for key in sorted(self.trial_runs)]


def _run_lineage(
    program: Program,
    mutations_by_id: dict[int, Mutation],
    fuzzer: FuzzerConfig,
    trial_seed: int,
    root: Supermutant,
    seed_inputs: tuple[bytes, ...],
    baseline_results: dict[bytes, ExecutionResult],
    config: PipelineConfig,
) -> tuple[dict[str, list[CampaignLog]], dict[str, tuple[int, ...]], list[int]]:
    """Run one supermutant and everything it splits into, sequentially."""

    def materialize(group: tuple[int, ...]):
        return apply_mutations(program, [mutations_by_id[mid] for mid in group])

    fresh_root = Supermutant(sm_id=root.sm_id, group=root.group, mutant=root.mutant)
    campaign_cfg = FuzzerConfig(
        name=fuzzer.name,
        kind=fuzzer.kind,
        rng_seed=fuzzer.rng_seed,
        max_input_len=fuzzer.max_input_len,
        fuel_per_exec=fuzzer.fuel_per_exec,
        initial_corpus=seed_inputs,
    )
    logs: dict[str, list[CampaignLog]] = {}
    groups: dict[str, tuple[int, ...]] = {}
    backlog: list[int] = []
    queue: list[tuple[Supermutant, int]] = [(fresh_root, 0)]
    respawns = 0
    while queue:
        sm, gen = queue.pop(0)
        groups[sm.sm_id] = sm.group
        if not sm.alive():
            continue
        rng_seed = derive(fuzzer.rng_seed, "phase2", trial_seed, sm.sm_id, gen)
        log = run_campaign(
            sm.mutant.program,
            campaign_cfg,
            config.phase2_budget,
            config.oracle,
            program,
            rng_seed=rng_seed,
            group=sm.group,
            alive=sm.alive(),
            baseline_seed_results=baseline_results,
        )
        logs.setdefault(sm.sm_id, []).append(log)
        for vtime, mid, _ in log.kill_events:
            sm.mark_killed(mid, vtime)
        if log.status == "violation":
            respawns += 1
            if config.max_respawns is not None and respawns > config.max_respawns:
                backlog.extend(sorted(sm.alive()))
                continue
            for part in split_on_violation(sm, log.violation, materialize):
                next_gen = gen + 1 if part.sm_id == sm.sm_id else 0
                queue.append((part, next_gen))
    return logs, groups, backlog


def run_mutation_phase(
    program: Program,
    config: PipelineConfig,
    mutations: list[Mutation],
    supermutants: list[Supermutant],
    seed: CoverageSeed,
    baseline_results: dict[bytes, ExecutionResult],
    jobs: int = 1,
) -> Phase2Result:
    """Per-(fuzzer, trial, supermutant) campaigns, with violation splitting.

    Every campaign is seeded with the coverage seed as its initial corpus.
    The result is independent of the number of jobs.
    """
    mutations_by_id = {m.mutation_id: m for m in mutations}
    seed_inputs = tuple(si.data for si in seed.inputs) or (b"",)
    plan = {sm.sm_id: sm.group for sm in supermutants}
    tasks = []
    for fuzzer in config.fuzzers:
        for trial in range(config.trials):
            for sm in supermutants:
                tasks.append((fuzzer, trial, sm))

    def run_task(task):
        fuzzer, trial, sm = task
        return _run_lineage(
            program,
            mutations_by_id,
            fuzzer,
            config.trial_seeds[trial],
            sm,
            seed_inputs,
            baseline_results,
            config,
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_task, tasks))
    else:
        results = [run_task(t) for t in tasks]

    trial_runs: dict[tuple[str, int], TrialRun] = {}
    for fuzzer in config.fuzzers:
        for trial in range(config.trials):
            trial_runs[(fuzzer.name, trial)] = TrialRun(fuzzer.name, trial)
    for (fuzzer, trial, _), (logs, groups, backlog) in zip(tasks, results):
        run = trial_runs[(fuzzer.name, trial)]
        for sm_id in sorted(logs):
            run.campaigns.setdefault(sm_id, []).extend(logs[sm_id])
        run.final_groups.update(groups)
        run.backlog.extend(backlog)
    return Phase2Result(trial_runs, plan)


# --- classification ---

TRIVIAL = "trivial"
INTELLIGENT = "intelligent"
STUBBORN = "stubborn"
LIVE_COVERED = "live-covered"
UNCOVERED = "uncovered"

CANDIDATE_IMMORTAL = "candidate-immortal"
CANDIDATE_EQUIVALENT = "candidate-equivalent"
CANDIDATE_IMMORTAL_OR_EQUIVALENT = "candidate-immortal-or-equivalent"


@dataclass
class MutantVerdict:
    mutation_id: int
    klass: str
    candidate: str | None
    killed_by: tuple[tuple[str, int, int], ...]  # (fuzzer, trial, vtime)
    first_covered: dict[str, int]  # fuzzer -> phase-1 vtime of node cover
    static_killed_by: int | None


def final_static_suite(seed: CoverageSeed, phase2: Phase2Result) -> list[bytes]:
    """Coverage seed plus all kill-event inputs, deduplicated, in a fixed order."""
    suite: list[bytes] = []
    seen: set[bytes] = set()
    for si in seed.inputs:
        if si.data not in seen:
            suite.append(si.data)
            seen.add(si.data)
    per_run = []
    for run in phase2.runs_sorted():
        for sm_id, vtime, mid, data in run.kill_events():
            per_run.append((run.fuzzer, run.trial, sm_id, vtime, mid, data))
    for _, _, _, _, _, data in sorted(per_run, key=lambda t: t[:5]):
        if data not in seen:
            suite.append(data)
            seen.add(data)
    return suite


def classify(
    program: Program,
    mutations: list[Mutation],
    static_pass: StaticPass,
    phase1: Phase1Result,
    phase2: Phase2Result,
    seed: CoverageSeed,
    oracle: OracleMode,
    fuel: int,
) -> list[MutantVerdict]:
    """Assign exactly one class per mutation, plus equivalence candidacy.

    Mutations never killed under the crash oracle are additionally flagged:
    a differential replay of the final static suite separates
    candidate-immortal (an output difference exists) from
    candidate-immortal-or-equivalent (no difference found either way).
    """
    kills_by_mutation: dict[int, list[tuple[str, int, int]]] = {}
    covered_phase2: set[int] = set()
    for run in phase2.runs_sorted():
        for sm_id in sorted(run.campaigns):
            for log in run.campaigns[sm_id]:
                covered_phase2.update(log.covered_mutations)
                for vtime, mid, _ in log.kill_events:
                    kills_by_mutation.setdefault(mid, []).append(
                        (run.fuzzer, run.trial, vtime)
                    )

    seed_covered_nodes: set[int] = set()
    for si in seed.inputs:
        seed_covered_nodes |= si.nodes

    suite = final_static_suite(seed, phase2)
    suite_profiles: dict[bytes, frozenset[int]] = {}
    suite_baseline: dict[bytes, ExecutionResult] = {}
    for data in suite:
        result, nodes = execute_profiled(program, data, fuel)
        suite_profiles[data] = nodes
        suite_baseline[data] = result

    diff_oracle = OracleMode(MODE_DIFF)
    verdicts = []
    for m in mutations:
        mid = m.mutation_id
        killed = kills_by_mutation.get(mid, [])
        if mid in static_pass.trivially_killed:
            klass = TRIVIAL
        elif killed:
            klass = INTELLIGENT
        elif mid in covered_phase2:
            klass = STUBBORN
        elif m.node_id in seed_covered_nodes:
            klass = LIVE_COVERED
        else:
            klass = UNCOVERED

        candidate = None
        if klass in (STUBBORN, LIVE_COVERED, UNCOVERED):
            if oracle.mode == MODE_DIFF:
                candidate = CANDIDATE_EQUIVALENT
            else:
                diff_killed = False
                mutant = apply_mutations(program, [m])
                for data in suite:
                    if m.node_id not in suite_profiles[data]:
                        continue
                    result = execute(mutant.program, data, fuel)
                    if kills(suite_baseline[data], result, diff_oracle):
                        diff_killed = True
                        break
                candidate = (
                    CANDIDATE_IMMORTAL if diff_killed else CANDIDATE_IMMORTAL_OR_EQUIVALENT
                )

        first_covered = {}
        for fuzzer_name, log in phase1.logs.items():
            vtime = (log.node_first_cover or {}).get(m.node_id)
            if vtime is not None:
                first_covered[fuzzer_name] = vtime

        verdicts.append(
            MutantVerdict(
                mutation_id=mid,
                klass=klass,
                candidate=candidate,
                killed_by=tuple(sorted(killed)),
                first_covered=first_covered,
                static_killed_by=static_pass.trivially_killed.get(mid),
            )
        )
    return verdicts


# --- whole pipeline ---


@dataclass
class PipelineResult:
    program: Program
    config: PipelineConfig
    mutations: list[Mutation]
    phase1: Phase1Result
    seed: CoverageSeed
    static_pass: StaticPass
    supermutant_plan: dict[str, tuple[int, ...]]
    phase2: Phase2Result
    verdicts: list[MutantVerdict]


def run_pipeline(
    program: Program,
    config: PipelineConfig,
    mutations: list[Mutation],
    jobs: int = 1,
) -> PipelineResult:
    """Run all phases over an already-enumerated (and sampled) mutation pool."""
    config.validate()
    phase1 = run_coverage_phase(program, config)
    seed = minimize_corpus(phase1.candidates)
    static = static_kill_pass(program, mutations, seed, config.oracle, config.fuel)
    supermutants = plan_supermutants(program, static.survivors, seed, config.max_group_size)
    phase2 = run_mutation_phase(
        program, config, mutations, supermutants, seed, static.baseline_results, jobs
    )
    verdicts = classify(
        program, mutations, static, phase1, phase2, seed, config.oracle, config.fuel
    )
    return PipelineResult(
        program=program,
        config=config,
        mutations=mutations,
        phase1=phase1,
        seed=seed,
        static_pass=static,
        supermutant_plan=phase2.supermutant_plan,
        phase2=phase2,
        verdicts=verdicts,
    )
