"""Run-directory layout and (de)serialization of every artifact.

Layout:
    run/
      config.json       effective pipeline configuration
      target.mini       copy of the target source
      manifest.json     digests, engine, phase completion flags
      mutants.json      enumerated (and sampled) mutation pool
      seed/             coverage seed: raw input files + seed.json profiles
      phase1/           one campaign log per fuzzer
      static.json       trivial-kill pass outcome
      supermutants.json initial supermutant plan
      logs/<fuzzer>/trial<k>/<sm>.json   phase-2 campaign logs
      verdicts.json     per-mutation classification
      matrix.csv        kill matrix (rows mutants, columns tests, 0/1)
      curves.csv        kill curves (fuzzer, trial, vtime, kills)
      report.json       score report
      report.md         human-readable summary

All JSON is dumped with sorted keys and a trailing newline so that reruns
with identical inputs are byte-identical. Wall-clock timestamps appear only
in the manifest.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import Chao1, CurvePoint, KillMatrix, Ranking, ScoreReport
from .fuzzing import CampaignLog, FuzzerConfig, InvalidConfig
from .minilang import OracleMode
from .minilang.engine import BACKEND
from .mutation import OPERATORS, Mutation, SamplingStrategy
from .pipeline import (
    CoverageSeed,
    MutantVerdict,
    Phase1Result,
    Phase2Result,
    PipelineConfig,
    SeedInput,
    TrialRun,
)

PHASES = ("gen", "phase1", "static", "phase2", "verdicts", "analyze", "report")


class CorruptRunDir(Exception):
    pass


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(canonical_json(obj), encoding="utf-8")
    tmp.replace(path)


def read_json(path: Path):
    if not path.exists():
        raise CorruptRunDir(f"missing {path.name}")
    return json.loads(path.read_text(encoding="utf-8"))


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# --- config ---


def config_to_dict(config: PipelineConfig) -> dict:
    return {
        "operators": list(config.operators),
        "sampling": {
            "strategy": config.sampling.kind,
            "n": config.sampling.n,
            "seed": config.sampling.seed,
        },
        "oracle": {
            "mode": config.oracle.mode,
            "hangs_are_kills": config.oracle.hangs_are_kills,
        },
        "fuzzers": [
            {
                "name": f.name,
                "kind": f.kind,
                "rng_seed": f.rng_seed,
                "max_input_len": f.max_input_len,
                "fuel_per_exec": f.fuel_per_exec,
                "initial_corpus_hex": [c.hex() for c in f.initial_corpus],
            }
            for f in config.fuzzers
        ],
        "phase1_budget": config.phase1_budget,
        "saturation_window": config.saturation_window,
        "phase2_budget": config.phase2_budget,
        "trials": config.trials,
        "trial_seeds": list(config.trial_seeds),
        "max_group_size": config.max_group_size,
        "max_respawns": config.max_respawns,
    }


def config_from_dict(raw: dict) -> PipelineConfig:
    try:
        sampling = raw.get("sampling", {"strategy": "all"})
        oracle = raw.get("oracle", {})
        fuzzers = []
        for f in raw["fuzzers"]:
            fuzzers.append(
                FuzzerConfig(
                    name=f["name"],
                    kind=f["kind"],
                    rng_seed=int(f["rng_seed"]),
                    max_input_len=int(f.get("max_input_len", 1024)),
                    fuel_per_exec=int(f.get("fuel_per_exec", 4096)),
                    initial_corpus=tuple(
                        bytes.fromhex(h) for h in f.get("initial_corpus_hex", [""])
                    ),
                )
            )
        operators = tuple(raw.get("operators", sorted(OPERATORS)))
        unknown = set(operators) - set(OPERATORS)
        if unknown:
            raise InvalidConfig(
                f"unknown operators {sorted(unknown)}; known: {sorted(OPERATORS)}"
            )
        trials = int(raw.get("trials", 5))
        config = PipelineConfig(
            fuzzers=tuple(fuzzers),
            oracle=OracleMode(
                mode=oracle.get("mode", "crash"),
                hangs_are_kills=bool(oracle.get("hangs_are_kills", False)),
            ),
            operators=operators,
            sampling=SamplingStrategy(
                kind=sampling.get("strategy", "all"),
                n=int(sampling.get("n", 0)),
                seed=int(sampling.get("seed", 0)),
            ),
            phase1_budget=int(raw.get("phase1_budget", 50_000)),
            saturation_window=int(raw.get("saturation_window", 10_000)),
            phase2_budget=int(raw.get("phase2_budget", 20_000)),
            trials=trials,
            trial_seeds=tuple(
                int(s) for s in raw.get("trial_seeds", range(101, 101 + trials))
            ),
            max_group_size=int(raw.get("max_group_size", 16)),
            max_respawns=raw.get("max_respawns"),
        )
    except InvalidConfig:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad config: {exc}") from exc
    config.validate()
    return config


# --- manifest ---


def new_manifest(config_text: str, target_text: str) -> dict:
    return {
        "tool_version": __version__,
        "engine": BACKEND,
        "config_digest": digest_bytes(config_text.encode("utf-8")),
        "target_digest": digest_bytes(target_text.encode("utf-8")),
        "phases": {},
    }


def mark_phase(run_dir: Path, manifest: dict, phase: str) -> None:
    manifest["phases"][phase] = datetime.now(timezone.utc).isoformat()
    write_json(run_dir / "manifest.json", manifest)


def load_manifest(run_dir: Path) -> dict:
    return read_json(run_dir / "manifest.json")


def check_digests(run_dir: Path, manifest: dict) -> None:
    config_text = (run_dir / "config.json").read_text(encoding="utf-8")
    target_text = (run_dir / "target.mini").read_text(encoding="utf-8")
    if digest_bytes(config_text.encode("utf-8")) != manifest["config_digest"]:
        raise CorruptRunDir("config.json does not match manifest digest")
    if digest_bytes(target_text.encode("utf-8")) != manifest["target_digest"]:
        raise CorruptRunDir("target.mini does not match manifest digest")


# --- mutations ---


def save_mutations(run_dir: Path, records: list[dict], meta: dict) -> None:
    write_json(run_dir / "mutants.json", {"meta": meta, "mutations": records})


def load_mutations(run_dir: Path) -> list[Mutation]:
    raw = read_json(run_dir / "mutants.json")
    return [
        Mutation(
            mutation_id=r["mutation_id"],
            operator=r["operator"],
            node_id=r["node_id"],
            original_token=r["original"],
            replacement_token=r["replacement"],
        )
        for r in raw["mutations"]
    ]


# --- phase 1 + seed ---


def _log_to_dict(log: CampaignLog) -> dict:
    out = {
        "fuzzer": log.fuzzer,
        "target": log.target_name,
        "executions": log.executions,
        "status": log.status,
        "violation": list(log.violation) if log.violation else None,
        "coverage_events": [[v, c] for v, c in log.coverage_events],
        "kill_events": [[v, m, d.hex()] for v, m, d in log.kill_events],
        "covered_mutations": {str(m): v for m, v in log.covered_mutations.items()},
        "corpus_final": [d.hex() for d in log.corpus_final],
        "defects": log.defects,
        "node_first_cover": (
            {str(n): v for n, v in log.node_first_cover.items()}
            if log.node_first_cover is not None
            else None
        ),
    }
    return out


def _log_from_dict(raw: dict) -> CampaignLog:
    return CampaignLog(
        fuzzer=raw["fuzzer"],
        target_name=raw["target"],
        executions=raw["executions"],
        status=raw["status"],
        violation=tuple(raw["violation"]) if raw["violation"] else None,
        coverage_events=[(v, c) for v, c in raw["coverage_events"]],
        kill_events=[(v, m, bytes.fromhex(d)) for v, m, d in raw["kill_events"]],
        covered_mutations={int(m): v for m, v in raw["covered_mutations"].items()},
        corpus_final=[bytes.fromhex(d) for d in raw["corpus_final"]],
        defects=list(raw.get("defects", [])),
        node_first_cover=(
            {int(n): v for n, v in raw["node_first_cover"].items()}
            if raw.get("node_first_cover") is not None
            else None
        ),
    )


def save_phase1(run_dir: Path, phase1: Phase1Result) -> None:
    p1 = run_dir / "phase1"
    p1.mkdir(exist_ok=True)
    for name, log in phase1.logs.items():
        payload = _log_to_dict(log)
        payload["curve"] = [[v, c] for v, c in phase1.curves[name]]
        payload["saturated_at"] = phase1.saturated_at[name]
        write_json(p1 / f"{name}.json", payload)


def load_phase1(run_dir: Path, fuzzer_names: list[str]) -> Phase1Result:
    logs: dict[str, CampaignLog] = {}
    curves: dict[str, list[tuple[int, int]]] = {}
    saturated: dict[str, int | None] = {}
    for name in fuzzer_names:
        raw = read_json(run_dir / "phase1" / f"{name}.json")
        logs[name] = _log_from_dict(raw)
        curves[name] = [(v, c) for v, c in raw["curve"]]
        saturated[name] = raw["saturated_at"]
    return Phase1Result(logs, curves, saturated, candidates=[])


def save_seed(run_dir: Path, seed: CoverageSeed) -> None:
    seed_dir = run_dir / "seed"
    seed_dir.mkdir(exist_ok=True)
    entries = []
    for i, si in enumerate(seed.inputs):
        fname = f"input_{i:04d}.bin"
        (seed_dir / fname).write_bytes(si.data)
        entries.append(
            {
                "file": fname,
                "hex": si.data.hex(),
                "origin_fuzzer": si.origin_fuzzer,
                "origin_vtime": si.origin_vtime,
                "elements": sorted(si.elements),
                "nodes": sorted(si.nodes),
            }
        )
    write_json(
        seed_dir / "seed.json",
        {"inputs": entries, "covered_elements": sorted(seed.covered)},
    )


def load_seed(run_dir: Path) -> CoverageSeed:
    raw = read_json(run_dir / "seed" / "seed.json")
    inputs = [
        SeedInput(
            data=bytes.fromhex(e["hex"]),
            elements=frozenset(e["elements"]),
            nodes=frozenset(e["nodes"]),
            origin_fuzzer=e["origin_fuzzer"],
            origin_vtime=e["origin_vtime"],
        )
        for e in raw["inputs"]
    ]
    return CoverageSeed(inputs, frozenset(raw["covered_elements"]))


# --- static pass ---


def save_static(run_dir: Path, trivially_killed: dict[int, int], survivors: list[int], executions: int) -> None:
    write_json(
        run_dir / "static.json",
        {
            "trivially_killed": {str(m): i for m, i in trivially_killed.items()},
            "survivors": survivors,
            "executions": executions,
        },
    )


def load_static(run_dir: Path) -> tuple[dict[int, int], list[int], int]:
    raw = read_json(run_dir / "static.json")
    return (
        {int(m): i for m, i in raw["trivially_killed"].items()},
        list(raw["survivors"]),
        raw["executions"],
    )


# --- phase 2 ---


def save_supermutant_plan(run_dir: Path, plan: dict[str, tuple[int, ...]]) -> None:
    write_json(run_dir / "supermutants.json", {k: sorted(v) for k, v in plan.items()})


def load_supermutant_plan(run_dir: Path) -> dict[str, tuple[int, ...]]:
    raw = read_json(run_dir / "supermutants.json")
    return {k: tuple(v) for k, v in raw.items()}


def save_phase2(run_dir: Path, phase2: Phase2Result) -> None:
    for (fuzzer, trial), run in sorted(phase2.trial_runs.items()):
        log_dir = run_dir / "logs" / fuzzer / f"trial{trial}"
        log_dir.mkdir(parents=True, exist_ok=True)
        for sm_id in sorted(run.campaigns):
            payload = {
                "sm_id": sm_id,
                "final_group": list(run.final_groups.get(sm_id, ())),
                "generations": [_log_to_dict(log) for log in run.campaigns[sm_id]],
            }
            write_json(log_dir / f"{sm_id}.json", payload)
        write_json(
            log_dir / "_run.json",
            {
                "fuzzer": fuzzer,
                "trial": trial,
                "supermutants": sorted(run.campaigns),
                "final_groups": {k: list(v) for k, v in sorted(run.final_groups.items())},
                "backlog": sorted(run.backlog),
            },
        )


def load_phase2(run_dir: Path, fuzzer_names: list[str], trials: int) -> Phase2Result:
    trial_runs: dict[tuple[str, int], TrialRun] = {}
    for fuzzer in fuzzer_names:
        for trial in range(trials):
            log_dir = run_dir / "logs" / fuzzer / f"trial{trial}"
            meta = read_json(log_dir / "_run.json")
            run = TrialRun(fuzzer, trial)
            run.backlog = list(meta["backlog"])
            run.final_groups = {k: tuple(v) for k, v in meta["final_groups"].items()}
            for sm_id in meta["supermutants"]:
                payload = read_json(log_dir / f"{sm_id}.json")
                run.campaigns[sm_id] = [
                    _log_from_dict(g) for g in payload["generations"]
                ]
            trial_runs[(fuzzer, trial)] = run
    plan = load_supermutant_plan(run_dir)
    return Phase2Result(trial_runs, plan)


# --- verdicts ---


def save_verdicts(
    run_dir: Path,
    verdicts: list[MutantVerdict],
    mutation_records: list[dict],
    backlog: dict[str, list[int]],
) -> None:
    by_id = {r["mutation_id"]: r for r in mutation_records}
    entries = []
    class_counts: dict[str, int] = {}
    for v in sorted(verdicts, key=lambda v: v.mutation_id):
        record = dict(by_id[v.mutation_id])
        record.update(
            {
                "class": v.klass,
                "candidate": v.candidate,
                "killed_by": [[f, t, vt] for f, t, vt in v.killed_by],
                "first_covered": dict(sorted(v.first_covered.items())),
                "static_killed_by": v.static_killed_by,
            }
        )
        entries.append(record)
        class_counts[v.klass] = class_counts.get(v.klass, 0) + 1
    write_json(
        run_dir / "verdicts.json",
        {
            "mutations": entries,
            "class_counts": class_counts,
            "violation_backlog": backlog,
        },
    )


def load_verdicts(run_dir: Path) -> list[MutantVerdict]:
    raw = read_json(run_dir / "verdicts.json")
    out = []
    for r in raw["mutations"]:
        out.append(
            MutantVerdict(
                mutation_id=r["mutation_id"],
                klass=r["class"],
                candidate=r["candidate"],
                killed_by=tuple((f, t, vt) for f, t, vt in r["killed_by"]),
                first_covered={f: v for f, v in r["first_covered"].items()},
                static_killed_by=r["static_killed_by"],
            )
        )
    return out


# --- analysis artifacts ---


def save_matrix_csv(run_dir: Path, matrix: KillMatrix) -> None:
    lines = ["mutation_id," + ",".join(f"t{i}" for i in range(len(matrix.tests)))]
    for mid in matrix.mutation_ids:
        ks = matrix.kill_sets[mid]
        cells = ",".join("1" if i in ks else "0" for i in range(len(matrix.tests)))
        lines.append(f"{mid},{cells}")
    (run_dir / "matrix.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_curves_csv(run_dir: Path, curves: dict[tuple[str, int], list[CurvePoint]]) -> None:
    lines = ["fuzzer,trial,vtime,kills"]
    for (fuzzer, trial) in sorted(curves):
        for p in curves[(fuzzer, trial)]:
            lines.append(f"{fuzzer},{trial},{p.vtime},{p.kills}")
    (run_dir / "curves.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _chao1_dict(c: Chao1) -> dict:
    return {"estimate": c.estimate, "s_obs": c.s_obs, "f1": c.f1, "f2": c.f2}


def _ranking_dict(r: Ranking | None) -> dict | None:
    if r is None:
        return None
    return {
        "order": [s.fuzzer for s in r.stats],
        "stats": [
            {
                "fuzzer": s.fuzzer,
                "per_trial": s.per_trial,
                "median": s.median,
                "ci95": [s.ci_low, s.ci_high],
            }
            for s in r.stats
        ],
        "ties": [[a, b] for a, b in r.ties],
    }


def report_to_dict(report: ScoreReport, suite: list[bytes], median_curves: dict[str, list]) -> dict:
    return {
        "total_mutations": report.total_mutations,
        "class_counts": dict(sorted(report.class_counts.items())),
        "scores": {
            "raw": report.raw_score,
            "trivial_excluded": report.trivial_excluded_score,
            "minimal_set": report.minimal_set_score,
        },
        "chao1": _chao1_dict(report.chao1),
        "residual_risk": report.residual_risk,
        "live_mutants": report.live_mutants,
        "dominators": list(report.dominators),
        "duplicate_groups": [list(g) for g in report.duplicate_groups],
        "per_fuzzer": {
            f: {
                "kills_per_trial": s.kills_per_trial,
                "median_kills": s.median_kills,
                "ci95": [s.ci_low, s.ci_high],
                "raw_score": s.raw_score,
                "trivial_excluded_score": s.trivial_excluded_score,
                "minimal_set_score": s.minimal_set_score,
                "chao1": _chao1_dict(s.chao1),
                "residual_risk": s.residual_risk,
                "live_mutants": s.live_mutants,
            }
            for f, s in sorted(report.per_fuzzer.items())
        },
        "ranking": _ranking_dict(report.ranking),
        "median_curves": median_curves,
        "audit_sample": report.audit_sample,
        "warnings": report.warnings,
        "final_suite_hex": [d.hex() for d in suite],
    }


_GLOSSARY = """\
## Glossary

- **trivial**: killed by the coverage seed alone (reaching the mutation was
  enough; no targeted input generation was needed).
- **intelligent**: survived the seed but killed by a fuzzer's own campaign.
- **stubborn**: reached during campaigns, never killed.
- **live-covered**: reached only by the static seed replay, never killed.
- **uncovered**: the mutated code was never reached at all.
- **candidate-immortal**: unkillable by the crash oracle on the final
  suite, but an output difference exists (a stronger oracle would kill it).
- **candidate-equivalent / candidate-immortal-or-equivalent**: no behavioral
  difference found by any oracle; possibly semantically identical.
- **dominator (subsuming) mutant**: representative hardest-to-kill mutant;
  a suite killing every dominator kills every killable mutant.
- **Chao1**: species-richness estimate of the total killable mutants, from
  the frequency of mutants killed by exactly one or two tests. Reported as
  an estimate with its inputs (S_obs, f1, f2), never as ground truth.
- **residual risk**: estimated killable-but-unkilled mutants remaining.
  Live-mutant counts decrease monotonically as defects are found, which is
  what makes them an ordinal measure of remaining risk.
- Background constants for reading the numbers: simple faults couple to
  complex ones (tests that kill all first-order mutants are observed to
  detect >99% of higher-order faults), and most observed failures involve
  interactions of only one or two faults.
"""


def render_report_md(report_dict: dict, target_name: str) -> str:
    lines = [f"# Mutation-analysis report: {target_name}", ""]
    lines.append(f"Total mutations evaluated: {report_dict['total_mutations']}")
    lines.append("")
    lines.append("## Mutant taxonomy")
    lines.append("")
    lines.append("| class | count |")
    lines.append("|-------|-------|")
    for klass, count in report_dict["class_counts"].items():
        lines.append(f"| {klass} | {count} |")
    lines.append("")
    scores = report_dict["scores"]
    lines.append("## Scores (aggregate)")
    lines.append("")
    lines.append(f"- raw score: {scores['raw']:.4f}")
    lines.append(f"- trivial-excluded score: {scores['trivial_excluded']:.4f}")
    lines.append(f"- minimal-set (dominator) score: {scores['minimal_set']:.4f}")
    chao1 = report_dict["chao1"]
    lines.append(
        f"- Chao1 estimate of killable mutants: {chao1['estimate']:.2f} "
        f"(S_obs={chao1['s_obs']}, f1={chao1['f1']}, f2={chao1['f2']})"
    )
    lines.append(f"- residual risk: {report_dict['residual_risk']:.2f}")
    lines.append(f"- live mutants: {report_dict['live_mutants']}")
    lines.append("")
    lines.append("## Per-fuzzer results")
    lines.append("")
    lines.append(
        "| fuzzer | median kills | 95% CI | raw | trivial-excluded | minimal-set "
        "| residual risk | live |"
    )
    lines.append("|--------|-------------|--------|-----|------------------|-------------|---------------|------|")
    for name, s in report_dict["per_fuzzer"].items():
        ci = s["ci95"]
        lines.append(
            f"| {name} | {s['median_kills']:g} | [{ci[0]:g}, {ci[1]:g}] "
            f"| {s['raw_score']:.4f} | {s['trivial_excluded_score']:.4f} "
            f"| {s['minimal_set_score']:.4f} | {s['residual_risk']:.2f} "
            f"| {s['live_mutants']} |"
        )
    lines.append("")
    ranking = report_dict["ranking"]
    if ranking:
        lines.append("## Ranking")
        lines.append("")
        lines.append("Order by median trivial-excluded kills: " + " > ".join(ranking["order"]))
        if ranking["ties"]:
            ties = ", ".join(f"{a} ~ {b}" for a, b in ranking["ties"])
            lines.append("")
            lines.append(f"Statistical ties (overlapping 95% intervals): {ties}")
        lines.append("")
    if report_dict["audit_sample"]:
        lines.append("## Live-mutant audit sample")
        lines.append("")
        lines.append(
            "Fixed-seed sample of live mutants for manual killability audit: "
            + ", ".join(str(m) for m in report_dict["audit_sample"])
        )
        lines.append("")
    if report_dict["warnings"]:
        lines.append("## Warnings")
        lines.append("")
        for w in report_dict["warnings"]:
            lines.append(f"- {w}")
        lines.append("")
    lines.append(_GLOSSARY)
    return "\n".join(lines)
