"""Post-hoc analytics over completed pipeline runs.

The final static test suite (coverage seed plus every kill-event input) is
replayed to build the full mutants x tests kill matrix. From the matrix:
duplicate groups and redundant pairs, the dominator (subsuming) mutant set,
the bias-corrected Chao1 richness estimate over kill abundances, and the
residual-risk figure. Kill curves and cross-trial fuzzer ranking come from
the raw campaign logs.

Duplicates and redundancy are only computable here, after the fact: during
fuzzing each mutant sees its own input sequence, so there is no shared
suite to compare kill sets against.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .minilang import OracleMode, execute, execute_profiled, kills
from .minilang.ast_nodes import Program
from .mutation import Mutation, apply_mutations
from .pipeline import (
    INTELLIGENT,
    TRIVIAL,
    MutantVerdict,
    Phase1Result,
    Phase2Result,
)
from .prng import SplitMix64, derive

BOOTSTRAP_SEED = 0xB0075EED
AUDIT_SAMPLE_SEED = 0xA0D17
AUDIT_SAMPLE_SIZE = 10
BOOTSTRAP_RESAMPLES = 10_000


class InsufficientTrials(Exception):
    pass


# --- kill matrix ---


@dataclass
class KillMatrix:
    mutation_ids: tuple[int, ...]
    tests: tuple[bytes, ...]
    kill_sets: dict[int, frozenset[int]]  # mutation_id -> killing test indices

    def cell(self, mutation_id: int, test_idx: int) -> bool:
        return test_idx in self.kill_sets[mutation_id]

    def killed_ids(self) -> list[int]:
        return [m for m in self.mutation_ids if self.kill_sets[m]]

    def restrict(self, test_indices: set[int]) -> "KillMatrix":
        """Sub-matrix over a subset of test columns (indices are preserved)."""
        return KillMatrix(
            self.mutation_ids,
            self.tests,
            {m: frozenset(ks & test_indices) for m, ks in self.kill_sets.items()},
        )


def build_kill_matrix(
    program: Program,
    mutations: list[Mutation],
    suite: list[bytes],
    oracle: OracleMode,
    fuel: int,
) -> KillMatrix:
    """Replay the final static suite against every first-order mutant.

    Coverage-based selection: cells for tests whose profile does not cover
    the mutated node are false without spending an execution.
    """
    seen: set[bytes] = set()
    tests: list[bytes] = []
    for data in suite:
        if data not in seen:
            tests.append(data)
            seen.add(data)
    baselines = []
    profiles = []
    for data in tests:
        result, nodes = execute_profiled(program, data, fuel)
        baselines.append(result)
        profiles.append(nodes)
    kill_sets: dict[int, frozenset[int]] = {}
    for m in mutations:
        selected = [i for i, nodes in enumerate(profiles) if m.node_id in nodes]
        killers: set[int] = set()
        if selected:
            mutant = apply_mutations(program, [m])
            for i in selected:
                result = execute(mutant.program, tests[i], fuel)
                if kills(baselines[i], result, oracle):
                    killers.add(i)
        kill_sets[m.mutation_id] = frozenset(killers)
    return KillMatrix(tuple(m.mutation_id for m in mutations), tuple(tests), kill_sets)


# --- minimal mutant computation ---


@dataclass
class MinimalSet:
    dominators: frozenset[int]
    duplicate_groups: list[tuple[int, ...]]
    redundant_pairs: list[tuple[int, int]]


def minimal_mutant_set(matrix: KillMatrix) -> MinimalSet:
    """Dominators, duplicates, and redundant pairs from kill sets.

    (a, b) is a redundant pair when every test killing b also kills a (and
    b is killable); duplicates have equal non-empty kill sets; dominators
    are one representative (lowest id) per duplicate class whose kill set
    is minimal under strict-subset order. Unkillable rows are excluded from
    all three outputs.
    """
    killable = [m for m in matrix.mutation_ids if matrix.kill_sets[m]]
    ks = matrix.kill_sets

    redundant_pairs = [
        (a, b)
        for a in killable
        for b in killable
        if a != b and ks[b] <= ks[a]
    ]

    classes: dict[frozenset[int], list[int]] = {}
    for m in killable:
        classes.setdefault(ks[m], []).append(m)
    duplicate_groups = sorted(
        tuple(sorted(members)) for members in classes.values() if len(members) > 1
    )

    distinct = list(classes)
    dominators = set()
    for kill_set, members in classes.items():
        if any(other < kill_set for other in distinct):
            continue
        dominators.add(min(members))
    return MinimalSet(frozenset(dominators), duplicate_groups, sorted(redundant_pairs))


# --- Chao1 richness ---


@dataclass(frozen=True)
class Chao1:
    estimate: float
    s_obs: int
    f1: int
    f2: int


def chao1_estimate(matrix: KillMatrix) -> Chao1:
    """Bias-corrected Chao1 over kill abundances.

    Species are killed mutants; the abundance of a mutant is how many suite
    tests kill it. S = S_obs + f1*(f1-1) / (2*(f2+1)), where f1/f2 count
    mutants killed by exactly one/two tests. The bias-corrected form is
    defined for f2 = 0 as well.
    """
    abundances = [len(ks) for ks in matrix.kill_sets.values() if ks]
    s_obs = len(abundances)
    f1 = sum(1 for a in abundances if a == 1)
    f2 = sum(1 for a in abundances if a == 2)
    if s_obs == 0:
        return Chao1(0.0, 0, 0, 0)
    estimate = s_obs + f1 * (f1 - 1) / (2 * (f2 + 1))
    return Chao1(estimate, s_obs, f1, f2)


def residual_risk(chao1: Chao1, killed: int) -> float:
    """Estimated killable-but-unkilled mutants remaining; floored at zero."""
    return max(0.0, chao1.estimate - killed)


# --- kill curves ---


@dataclass(frozen=True)
class CurvePoint:
    vtime: int
    kills: int
    fuzzer: str
    trial: int


def kill_curves(
    verdicts: list[MutantVerdict],
    phase2: Phase2Result,
    trials: int,
) -> tuple[dict[tuple[str, int], list[CurvePoint]], list[dict]]:
    """Cumulative kill counts over virtual time per (fuzzer, trial).

    A trivial mutant is counted at the phase-1 vtime its node was first
    covered by that fuzzer. An intelligent kill is counted at
    first-cover vtime + phase-2 kill vtime, where first-cover is the
    phase-1 cover vtime if the fuzzer reached the node there and otherwise
    the first-cover vtime inside the killing campaign. Trivial mutants
    whose node a fuzzer never covered in phase 1 are excluded from that
    fuzzer's curves and reported as warnings.
    """
    by_id = {v.mutation_id: v for v in verdicts}
    warnings: list[dict] = []

    trivial_times: dict[str, list[int]] = {}
    fuzzers = sorted({run.fuzzer for run in phase2.trial_runs.values()})
    for fuzzer in fuzzers:
        times = []
        for v in verdicts:
            if v.klass != TRIVIAL:
                continue
            vtime = v.first_covered.get(fuzzer)
            if vtime is None:
                warnings.append(
                    {
                        "kind": "MissingCoverageTime",
                        "fuzzer": fuzzer,
                        "mutation_id": v.mutation_id,
                    }
                )
            else:
                times.append(vtime)
        trivial_times[fuzzer] = times

    curves: dict[tuple[str, int], list[CurvePoint]] = {}
    for (fuzzer, trial), run in sorted(phase2.trial_runs.items()):
        times = list(trivial_times[fuzzer])
        for sm_id in sorted(run.campaigns):
            for log in run.campaigns[sm_id]:
                for kill_vtime, mid, _ in log.kill_events:
                    verdict = by_id[mid]
                    first_cover = verdict.first_covered.get(fuzzer)
                    if first_cover is None:
                        first_cover = log.covered_mutations[mid]
                    times.append(first_cover + kill_vtime)
        times.sort()
        points = []
        cumulative = 0
        for vtime in times:
            cumulative += 1
            if points and points[-1].vtime == vtime:
                points[-1] = CurvePoint(vtime, cumulative, fuzzer, trial)
            else:
                points.append(CurvePoint(vtime, cumulative, fuzzer, trial))
        curves[(fuzzer, trial)] = points
    return curves, warnings


def median_curve(points_per_trial: list[list[CurvePoint]]) -> list[tuple[int, float]]:
    """Per-vtime median of cumulative kill counts across trials."""
    vtimes = sorted({p.vtime for points in points_per_trial for p in points})
    out = []
    for vtime in vtimes:
        values = []
        for points in points_per_trial:
            current = 0
            for p in points:
                if p.vtime <= vtime:
                    current = p.kills
                else:
                    break
            values.append(current)
        out.append((vtime, statistics.median(values)))
    return out


# --- cross-trial comparison ---


@dataclass
class FuzzerStats:
    fuzzer: str
    per_trial: list[int]
    median: float
    ci_low: float
    ci_high: float


@dataclass
class Ranking:
    stats: list[FuzzerStats]  # sorted by descending median
    ties: list[tuple[str, str]]  # pairs with overlapping intervals


def bootstrap_interval(
    values: list[int | float],
    seed: int,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> tuple[float, float]:
    """Percentile bootstrap 95% interval for the median."""
    rng = SplitMix64(seed)
    n = len(values)
    medians = []
    for _ in range(resamples):
        sample = [values[rng.below(n)] for _ in range(n)]
        medians.append(statistics.median(sample))
    medians.sort()
    lo = medians[int(0.025 * resamples)]
    hi = medians[min(resamples - 1, int(0.975 * resamples))]
    return float(lo), float(hi)


def compare_fuzzers(
    per_trial_kills: dict[str, list[int]],
    bootstrap_seed: int = BOOTSTRAP_SEED,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> Ranking:
    """Rank fuzzers by median trivial-excluded kills across trials.

    Requires at least two trials. Overlapping bootstrap intervals are
    reported as statistical ties rather than hidden by the point ranking.
    """
    stats = []
    for fuzzer in sorted(per_trial_kills):
        values = per_trial_kills[fuzzer]
        if len(values) < 2:
            raise InsufficientTrials(
                f"{fuzzer}: need >= 2 trials for ranking, got {len(values)}"
            )
        lo, hi = bootstrap_interval(values, derive(bootstrap_seed, fuzzer), resamples)
        stats.append(
            FuzzerStats(
                fuzzer=fuzzer,
                per_trial=list(values),
                median=float(statistics.median(values)),
                ci_low=lo,
                ci_high=hi,
            )
        )
    stats.sort(key=lambda s: (-s.median, s.fuzzer))
    ties = []
    for i, a in enumerate(stats):
        for b in stats[i + 1 :]:
            if a.ci_low <= b.ci_high and b.ci_low <= a.ci_high:
                ties.append((a.fuzzer, b.fuzzer))
    return Ranking(stats, ties)


# --- score report ---


@dataclass
class FuzzerScore:
    fuzzer: str
    kills_per_trial: list[int]
    median_kills: float
    ci_low: float
    ci_high: float
    raw_score: float
    trivial_excluded_score: float
    minimal_set_score: float
    chao1: Chao1
    residual_risk: float
    live_mutants: int


@dataclass
class ScoreReport:
    total_mutations: int
    class_counts: dict[str, int]
    raw_score: float
    trivial_excluded_score: float
    minimal_set_score: float
    chao1: Chao1
    residual_risk: float
    live_mutants: int
    dominators: tuple[int, ...]
    duplicate_groups: list[tuple[int, ...]]
    per_fuzzer: dict[str, FuzzerScore]
    ranking: Ranking | None
    audit_sample: list[int]
    warnings: list[dict]


def _safe_ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def build_score_report(
    verdicts: list[MutantVerdict],
    matrix: KillMatrix,
    suite: list[bytes],
    seed_size: int,
    phase2: Phase2Result,
    trials: int,
    warnings: list[dict] | None = None,
) -> ScoreReport:
    """Assemble every headline number from verdicts, matrix, and logs.

    The headline per-fuzzer score is trivial-excluded kills over the
    dominator set; the raw score is retained for comparability. Per-fuzzer
    Chao1 and residual risk are computed on the sub-matrix restricted to
    the coverage seed plus that fuzzer's own kill inputs.
    """
    total = len(verdicts)
    class_counts: dict[str, int] = {}
    for v in verdicts:
        class_counts[v.klass] = class_counts.get(v.klass, 0) + 1
    trivial_count = class_counts.get(TRIVIAL, 0)
    survivors_total = total - trivial_count

    killed_any = {v.mutation_id for v in verdicts if v.klass in (TRIVIAL, INTELLIGENT)}
    minimal = minimal_mutant_set(matrix)
    n_dominators = len(minimal.dominators)

    chao1 = chao1_estimate(matrix)
    aggregate_killed = len(matrix.killed_ids())
    live = total - len(killed_any)

    test_index = {data: i for i, data in enumerate(matrix.tests)}
    seed_indices = set(range(min(seed_size, len(matrix.tests))))

    fuzzer_names = sorted({run.fuzzer for run in phase2.trial_runs.values()})
    per_trial_kills: dict[str, list[int]] = {f: [0] * trials for f in fuzzer_names}
    fuzzer_kills: dict[str, set[int]] = {f: set() for f in fuzzer_names}
    fuzzer_kill_inputs: dict[str, set[int]] = {f: set() for f in fuzzer_names}
    for (fuzzer, trial), run in sorted(phase2.trial_runs.items()):
        killed_this_trial: set[int] = set()
        for _, _, mid, data in run.kill_events():
            killed_this_trial.add(mid)
            fuzzer_kills[fuzzer].add(mid)
            idx = test_index.get(data)
            if idx is not None:
                fuzzer_kill_inputs[fuzzer].add(idx)
        per_trial_kills[fuzzer][trial] = len(killed_this_trial)

    trivial_ids = {v.mutation_id for v in verdicts if v.klass == TRIVIAL}
    per_fuzzer: dict[str, FuzzerScore] = {}
    ranking = None
    if trials >= 2 and fuzzer_names:
        ranking = compare_fuzzers(per_trial_kills)
    for fuzzer in fuzzer_names:
        killed_by_f = trivial_ids | fuzzer_kills[fuzzer]
        sub = matrix.restrict(seed_indices | fuzzer_kill_inputs[fuzzer])
        sub_chao1 = chao1_estimate(sub)
        if ranking is not None:
            stats = next(s for s in ranking.stats if s.fuzzer == fuzzer)
            median_kills, ci_low, ci_high = stats.median, stats.ci_low, stats.ci_high
        else:
            median_kills = float(statistics.median(per_trial_kills[fuzzer]))
            ci_low = ci_high = median_kills
        per_fuzzer[fuzzer] = FuzzerScore(
            fuzzer=fuzzer,
            kills_per_trial=per_trial_kills[fuzzer],
            median_kills=median_kills,
            ci_low=ci_low,
            ci_high=ci_high,
            raw_score=_safe_ratio(len(killed_by_f), total),
            trivial_excluded_score=_safe_ratio(len(fuzzer_kills[fuzzer]), survivors_total),
            minimal_set_score=_safe_ratio(
                len(minimal.dominators & killed_by_f), n_dominators
            ),
            chao1=sub_chao1,
            residual_risk=residual_risk(sub_chao1, len(sub.killed_ids())),
            live_mutants=total - len(killed_by_f),
        )

    rng = SplitMix64(derive(AUDIT_SAMPLE_SEED, "audit"))
    live_ids = sorted(v.mutation_id for v in verdicts if v.mutation_id not in killed_any)
    sample: list[int] = []
    pool = list(live_ids)
    while pool and len(sample) < AUDIT_SAMPLE_SIZE:
        sample.append(pool.pop(rng.below(len(pool))))
    sample.sort()

    return ScoreReport(
        total_mutations=total,
        class_counts=class_counts,
        raw_score=_safe_ratio(len(killed_any), total),
        trivial_excluded_score=_safe_ratio(
            len(killed_any - trivial_ids), survivors_total
        ),
        minimal_set_score=_safe_ratio(
            len(minimal.dominators & killed_any), n_dominators
        ),
        chao1=chao1,
        residual_risk=residual_risk(chao1, aggregate_killed),
        live_mutants=live,
        dominators=tuple(sorted(minimal.dominators)),
        duplicate_groups=minimal.duplicate_groups,
        per_fuzzer=per_fuzzer,
        ranking=ranking,
        audit_sample=sample,
        warnings=list(warnings or ()),
    )
