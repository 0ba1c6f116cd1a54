"""Command-line entry point.

Subcommands: gen (enumerate mutations into a run directory), run (execute
the pipeline phases, resumable), analyze (kill matrix, curves, report
data), report (human-readable summary). The run directory defaults to the
MUTAFUZZ_RUN_DIR environment variable.

Exit codes: 0 success, 2 parse/config error, 3 interrupted or corrupt run
directory.
"""

from __future__ import annotations

import argparse
import os
import shutil
import sys
from pathlib import Path

from . import analysis, pipeline, runio
from .fuzzing import InvalidConfig
from .minilang import MODE_CRASH, MODE_DIFF, OracleMode, ParseError, parse
from .mutation import enumerate_mutations, mutation_records, sample_mutations
from .prng import derive
from .runio import CorruptRunDir

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNDIR = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mutafuzz",
        description="Evaluate fuzzers by mutation analysis on MiniLang targets.",
    )
    parser.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="campaign concurrency for `run`; never changes results",
    )
    parser.add_argument(
        "--seed-override",
        type=int,
        default=None,
        help="replace the config's trial seeds with seeds derived from this value (gen)",
    )
    parser.add_argument(
        "--oracle",
        choices=["crash", "diff"],
        default=None,
        help="override the config's oracle mode (gen)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="enumerate mutations and set up a run directory")
    gen.add_argument("target", help="MiniLang source file (*.mini)")
    gen.add_argument("config", help="pipeline config (JSON)")
    gen.add_argument("-o", "--out", default=None, help="run directory (default: $MUTAFUZZ_RUN_DIR)")

    for name, help_text in (
        ("run", "execute pipeline phases 1-2 and write verdicts (resumable)"),
        ("analyze", "build kill matrix, curves, and report data"),
        ("report", "render the human-readable report"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("-o", "--out", default=None, help="run directory (default: $MUTAFUZZ_RUN_DIR)")
    return parser


def _run_dir(args) -> Path:
    out = args.out or os.environ.get("MUTAFUZZ_RUN_DIR")
    if not out:
        raise InvalidConfig("no run directory: pass -o/--out or set MUTAFUZZ_RUN_DIR")
    return Path(out)


def cmd_gen(args) -> int:
    run_dir = _run_dir(args)
    target_path = Path(args.target)
    config_path = Path(args.config)
    target_text = target_path.read_text(encoding="utf-8")
    program = parse(target_text, target_path.name)
    config = runio.config_from_dict(runio.read_json(config_path))
    if args.oracle is not None:
        mode = MODE_CRASH if args.oracle == "crash" else MODE_DIFF
        config = runio.config_from_dict(
            {**runio.config_to_dict(config), "oracle": {"mode": mode,
             "hangs_are_kills": config.oracle.hangs_are_kills}}
        )
    if args.seed_override is not None:
        seeds = [derive(args.seed_override, "trial", i) for i in range(config.trials)]
        config = runio.config_from_dict(
            {**runio.config_to_dict(config), "trial_seeds": seeds}
        )

    run_dir.mkdir(parents=True, exist_ok=True)
    config_text = runio.canonical_json(runio.config_to_dict(config))
    (run_dir / "config.json").write_text(config_text, encoding="utf-8")
    shutil.copyfile(target_path, run_dir / "target.mini")

    mutations = enumerate_mutations(program, set(config.operators))
    pool = sample_mutations(mutations, config.sampling)
    records = mutation_records(program, pool)
    runio.save_mutations(
        run_dir,
        records,
        meta={
            "target": target_path.name,
            "operators": list(config.operators),
            "sampling": {
                "strategy": config.sampling.kind,
                "n": config.sampling.n,
                "seed": config.sampling.seed,
            },
            "total_enumerated": len(mutations),
        },
    )
    manifest = runio.new_manifest(config_text, target_text)
    runio.mark_phase(run_dir, manifest, "gen")

    counts: dict[str, int] = {}
    for m in pool:
        counts[m.operator] = counts.get(m.operator, 0) + 1
    print(f"enumerated {len(mutations)} mutations, pool of {len(pool)} after sampling")
    for op in sorted(counts):
        print(f"  {op:6s} {counts[op]}")
    print(f"run directory ready: {run_dir}")
    return EXIT_OK


def _load_run_inputs(run_dir: Path):
    manifest = runio.load_manifest(run_dir)
    runio.check_digests(run_dir, manifest)
    config = runio.config_from_dict(runio.read_json(run_dir / "config.json"))
    program = parse(
        (run_dir / "target.mini").read_text(encoding="utf-8"), "target.mini"
    )
    mutations = runio.load_mutations(run_dir)
    return manifest, config, program, mutations


def cmd_run(args) -> int:
    run_dir = _run_dir(args)
    manifest, config, program, mutations = _load_run_inputs(run_dir)
    if "gen" not in manifest["phases"]:
        raise CorruptRunDir("run directory was not initialized by gen")
    done = manifest["phases"]

    if "phase1" in done:
        phase1 = runio.load_phase1(run_dir, [f.name for f in config.fuzzers])
        seed = runio.load_seed(run_dir)
    else:
        print("phase 1: coverage campaigns")
        phase1 = pipeline.run_coverage_phase(program, config)
        seed = pipeline.minimize_corpus(phase1.candidates)
        if not seed.inputs:
            print("warning: empty coverage seed (no input produced any coverage)")
        runio.save_phase1(run_dir, phase1)
        runio.save_seed(run_dir, seed)
        runio.mark_phase(run_dir, manifest, "phase1")

    if "static" in done:
        trivially_killed, survivor_ids, execs = runio.load_static(run_dir)
        by_id = {m.mutation_id: m for m in mutations}
        baseline_results = {
            si.data: pipeline.execute(program, si.data, config.fuel)
            for si in seed.inputs
        }
        static = pipeline.StaticPass(
            trivially_killed, [by_id[i] for i in survivor_ids], execs, baseline_results
        )
    else:
        print("static pass: replaying the coverage seed against all mutants")
        static = pipeline.static_kill_pass(
            program, mutations, seed, config.oracle, config.fuel
        )
        runio.save_static(
            run_dir,
            static.trivially_killed,
            [m.mutation_id for m in static.survivors],
            static.executions,
        )
        runio.mark_phase(run_dir, manifest, "static")

    if "phase2" in done:
        phase2 = runio.load_phase2(
            run_dir, [f.name for f in config.fuzzers], config.trials
        )
    else:
        supermutants = pipeline.plan_supermutants(
            program, static.survivors, seed, config.max_group_size
        )
        runio.save_supermutant_plan(run_dir, {sm.sm_id: sm.group for sm in supermutants})
        n_campaigns = len(supermutants) * len(config.fuzzers) * config.trials
        print(f"phase 2: {len(supermutants)} supermutants, {n_campaigns} campaigns")
        phase2 = pipeline.run_mutation_phase(
            program,
            config,
            mutations,
            supermutants,
            seed,
            static.baseline_results,
            jobs=max(1, args.jobs),
        )
        runio.save_phase2(run_dir, phase2)
        runio.mark_phase(run_dir, manifest, "phase2")

    if "verdicts" not in done:
        verdicts = pipeline.classify(
            program, mutations, static, phase1, phase2, seed, config.oracle, config.fuel
        )
        backlog = {
            f"{fuzzer}/trial{trial}": sorted(run.backlog)
            for (fuzzer, trial), run in sorted(phase2.trial_runs.items())
            if run.backlog
        }
        if backlog:
            print(f"warning: budget exhausted with violation backlog: {backlog}")
        runio.save_verdicts(
            run_dir, verdicts, runio.read_json(run_dir / "mutants.json")["mutations"], backlog
        )
        runio.mark_phase(run_dir, manifest, "verdicts")
        print(f"verdicts written: {run_dir / 'verdicts.json'}")
    else:
        print("run already complete")
    return EXIT_OK


def cmd_analyze(args) -> int:
    run_dir = _run_dir(args)
    manifest, config, program, mutations = _load_run_inputs(run_dir)
    if "verdicts" not in manifest["phases"]:
        raise CorruptRunDir("run is not complete; run `mutafuzz run` first")
    seed = runio.load_seed(run_dir)
    phase2 = runio.load_phase2(run_dir, [f.name for f in config.fuzzers], config.trials)
    verdicts = runio.load_verdicts(run_dir)

    suite = pipeline.final_static_suite(seed, phase2)
    matrix = analysis.build_kill_matrix(program, mutations, suite, config.oracle, config.fuel)
    curves, warnings = analysis.kill_curves(verdicts, phase2, config.trials)
    report = analysis.build_score_report(
        verdicts, matrix, suite, len(seed.inputs), phase2, config.trials, warnings
    )
    med_curves = {}
    for fuzzer in sorted({f.name for f in config.fuzzers}):
        per_trial = [curves[(fuzzer, t)] for t in range(config.trials)]
        med_curves[fuzzer] = [
            [vtime, kills] for vtime, kills in analysis.median_curve(per_trial)
        ]
    runio.save_matrix_csv(run_dir, matrix)
    runio.save_curves_csv(run_dir, curves)
    runio.write_json(
        run_dir / "report.json", runio.report_to_dict(report, suite, med_curves)
    )
    runio.mark_phase(run_dir, manifest, "analyze")
    print(f"analysis artifacts written to {run_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    run_dir = _run_dir(args)
    manifest = runio.load_manifest(run_dir)
    runio.check_digests(run_dir, manifest)
    if "analyze" not in manifest["phases"]:
        raise CorruptRunDir("no analysis artifacts; run `mutafuzz analyze` first")
    report_dict = runio.read_json(run_dir / "report.json")
    meta = runio.read_json(run_dir / "mutants.json")["meta"]
    text = runio.render_report_md(report_dict, meta["target"])
    (run_dir / "report.md").write_text(text, encoding="utf-8")
    runio.mark_phase(run_dir, manifest, "report")
    print(f"report written: {run_dir / 'report.md'}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "gen": cmd_gen,
        "run": cmd_run,
        "analyze": cmd_analyze,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (ParseError, InvalidConfig, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CorruptRunDir as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNDIR


if __name__ == "__main__":
    sys.exit(main())
