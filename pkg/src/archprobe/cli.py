"""Command line interface.

Subcommands: ``generate`` (build corpora), ``run`` (execute the agent
matrix), ``score`` (score trajectories), ``report`` (re-aggregate
persisted reports), ``sweep`` (budget sweep over the rule-based
baselines), ``check-corpus`` (invoke the external corpus checker).

Exit codes: 0 success, 1 scoring or assertion failure, 2 configuration
error.
"""

from __future__ import annotations

import argparse
import json
import shutil
import subprocess
import sys
from pathlib import Path

from . import runner
from .agents import BASELINE_NAMES
from .conditions import CONDITION_ACTIVE, CONDITION_PASSIVE_REPLAY, CONDITIONS, ConditionError
from .llm import TRACK_SCRATCHPAD, TRACKING_MODES, ConfigurationError, LlmAgent, ProviderConfig
from .runner import RunCell
from .trajectory import load_trajectory

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _cmd_generate(args: argparse.Namespace) -> int:
    try:
        stats = runner.generate_corpus(args.seeds, args.out, complexity=args.complexity,
                                       domain=args.domain, force=args.force)
    except FileExistsError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    for st in stats:
        print(runner.format_stats_block(st))
        print()
    print(f"wrote {len(stats)} corpora under {args.out} (stats: {args.out}/corpus_stats.csv)")
    return EXIT_OK


def _find_replay_source(source: Path, seed: int, replay_of: str | None) -> Path:
    if source.is_file():
        return source
    candidates = []
    for path in sorted(source.glob("*.jsonl")):
        traj = load_trajectory(path)
        if traj.seed != seed or traj.condition != CONDITION_ACTIVE:
            continue
        if replay_of is not None and traj.agent != replay_of:
            continue
        candidates.append(path)
    if len(candidates) != 1:
        hint = "" if replay_of else " (narrow the choice with --replay-of <agent>)"
        raise ConfigurationError(
            f"need exactly one active-run trajectory for seed {seed} under {source}, "
            f"found {len(candidates)}{hint}"
        )
    return candidates[0]


def _build_cells(args: argparse.Namespace) -> list[RunCell]:
    corpus = Path(args.corpus)
    cells: list[RunCell] = []
    for seed in args.seeds:
        seed_dir = corpus / f"seed_{seed}"
        if not seed_dir.exists():
            raise ConfigurationError(f"corpus for seed {seed} not found at {seed_dir}")
        source = None
        if args.condition == CONDITION_PASSIVE_REPLAY:
            if not args.source:
                raise ConfigurationError("--source is required for the passive_replay condition")
            source = _find_replay_source(Path(args.source), seed, args.replay_of)
        if args.agent == "llm":
            if not args.provider_config:
                raise ConfigurationError("--provider-config is required for the llm agent")
            provider = ProviderConfig.load(args.provider_config)
            provider.api_key()  # fail fast, naming the missing variable
            mode = args.tracking_mode
            version = args.prompt_version

            def factory(p=provider, m=mode, v=version):
                return LlmAgent(p, tracking_mode=m, prompt_version=v)

            label = f"llm-{provider.model}"
            cells.append(RunCell(agent_factory=factory, agent_label=label, seed=seed,
                                 seed_dir=seed_dir, condition=args.condition,
                                 tracking_mode=args.tracking_mode, budget=args.budget,
                                 probe_interval=args.probe_interval,
                                 prompt_version=args.prompt_version,
                                 source_trajectory=source))
        else:
            _cb, gt = runner.load_corpus(seed_dir)
            factory = runner._baseline_factory(args.agent, gt, seed)
            cells.append(RunCell(agent_factory=factory, agent_label=args.agent, seed=seed,
                                 seed_dir=seed_dir, condition=args.condition,
                                 tracking_mode=args.tracking_mode, budget=args.budget,
                                 probe_interval=args.probe_interval,
                                 source_trajectory=source))
    return cells


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        runner.RunConfig(
            seeds=args.seeds, budget=args.budget, probe_interval=args.probe_interval,
            agent=args.agent, condition=args.condition, tracking_mode=args.tracking_mode,
            out_dir=args.out, prompt_version=args.prompt_version,
        ).validate()
        if args.agent == "baselines":
            cells = []
            sub_args = argparse.Namespace(**vars(args))
            for name in BASELINE_NAMES:
                sub_args.agent = name
                cells.extend(_build_cells(sub_args))
        else:
            cells = _build_cells(args)
        written = runner.execute_matrix(cells, Path(args.out) / "runs",
                                        workers=args.workers, resume=not args.force)
    except (ConfigurationError, ConditionError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    failures = 0
    for path in written:
        traj = load_trajectory(path)
        if traj.failed:
            failures += 1
            print(f"FAILED {traj.run_id}: {traj.failure}", file=sys.stderr)
    print(f"{len(written)} trajectories under {Path(args.out) / 'runs'} ({failures} failed)")
    return EXIT_FAILURE if failures else EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    try:
        written = runner.score_runs(Path(args.out) / "runs" if args.runs is None else args.runs,
                                    args.corpus, args.out)
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAILURE
    reports = runner.load_reports(args.out)
    outputs = runner.write_tables(reports, args.out)
    print(f"{len(written)} reports; tables:")
    for name in ("main", "edge_types", "apg"):
        print(f"  {outputs[name]}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    reports = runner.load_reports(args.out)
    if not reports:
        print(f"error: no reports under {Path(args.out) / 'reports'}", file=sys.stderr)
        return EXIT_FAILURE
    outputs = runner.write_tables(reports, args.out)
    rows = runner.aggregate_main_table(reports)
    for row in rows:
        auc_part = (f"{row['auc_actions_mean']:.3f}" if row["auc_actions_mean"] is not None else "--")
        print(f"{row['agent']:<22} {row['condition']:<16} {row['tracking_mode']:<12} "
              f"depF1={row['dep_f1_mean']:.3f}±{row['dep_f1_halfrange']:.3f} "
              f"P={row['precision_mean']:.3f} R={row['recall_mean']:.3f} "
              f"AUC={auc_part} invF1={row['inv_relaxed_f1_mean']:.3f} "
              f"files={row['files_opened_mean']:.1f}")
    print(f"tables under {Path(args.out) / 'tables'}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        corpus = Path(args.corpus)
        for seed in args.seeds:
            if not (corpus / f"seed_{seed}").exists():
                raise ConfigurationError(f"corpus for seed {seed} not found under {corpus}")
        all_cells = []
        for budget in args.budgets:
            all_cells.extend(runner.baseline_cells(
                corpus, args.seeds, budget=budget, probe_interval=args.probe_interval,
            ))
        runner.execute_matrix(all_cells, Path(args.out) / "runs", workers=args.workers)
        runner.score_runs(Path(args.out) / "runs", corpus, args.out)
    except (ConfigurationError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    reports = runner.load_reports(args.out)
    rows = runner.sweep_table(reports)
    runner._write_csv(rows, Path(args.out) / "tables" / "budget_sweep.csv")
    header = ["agent"] + [f"B{b}" for b in sorted(args.budgets)]
    print("  ".join(f"{h:>12}" for h in header))
    for row in rows:
        cells = [f"{row['agent']:>12}"] + [
            f"{row.get(f'B{b}', ''):>12}" for b in sorted(args.budgets)
        ]
        print("  ".join(str(c) for c in cells))
    print(f"sweep table: {Path(args.out) / 'tables' / 'budget_sweep.csv'}")
    return EXIT_OK


def _cmd_check_corpus(args: argparse.Namespace) -> int:
    executable = shutil.which("check_corpus")
    if executable is not None:
        command = [executable]
    else:
        command = [sys.executable, "-m", "corpus_checker"]
    failures = 0
    for seed_dir in sorted(Path(args.corpus).glob("seed_*")):
        proc = subprocess.run(command + [str(seed_dir), "--json"],
                              capture_output=True, text=True)
        if proc.returncode not in (0, 1):
            print(f"error: corpus checker unavailable or crashed for {seed_dir}: "
                  f"{proc.stderr.strip() or proc.stdout.strip()}", file=sys.stderr)
            return EXIT_CONFIG
        try:
            result = json.loads(proc.stdout)
        except ValueError:
            print(f"error: corpus checker emitted invalid JSON for {seed_dir}", file=sys.stderr)
            return EXIT_CONFIG
        status = "ok" if result.get("passed") else "FAILED"
        print(f"{seed_dir.name}: {status} (stages_loaded={result.get('stages_loaded')})")
        for failure in result.get("failures", []):
            print(f"  {failure.get('check')}: {failure.get('message')}")
        if not result.get("passed"):
            failures += 1
    return EXIT_FAILURE if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="archprobe",
                                     description="Architectural belief benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate benchmark corpora")
    gen.add_argument("--seeds", type=int, nargs="+", default=[42, 123, 999])
    gen.add_argument("--complexity", default="medium")
    gen.add_argument("--domain", default=None)
    gen.add_argument("--out", default="bench_out/corpus")
    gen.add_argument("--force", action="store_true", help="overwrite non-empty seed directories")
    gen.set_defaults(func=_cmd_generate)

    run = sub.add_parser("run", help="execute runs for one agent (or all baselines)")
    run.add_argument("--agent", default="baselines",
                     help="baselines | oracle | config-aware | random | bfs-import | mock | llm")
    run.add_argument("--corpus", default="bench_out/corpus")
    run.add_argument("--seeds", type=int, nargs="+", default=[42, 123, 999])
    run.add_argument("--condition", default=CONDITION_ACTIVE, choices=CONDITIONS)
    run.add_argument("--tracking-mode", default=TRACK_SCRATCHPAD, choices=TRACKING_MODES)
    run.add_argument("--budget", type=int, default=20)
    run.add_argument("--probe-interval", type=int, default=3)
    run.add_argument("--prompt-version", default="v2")
    run.add_argument("--provider-config", default=None)
    run.add_argument("--source", default=None,
                     help="trajectory file or directory (passive_replay source)")
    run.add_argument("--replay-of", default=None,
                     help="agent label to replay when --source is a directory")
    run.add_argument("--out", default="bench_out")
    run.add_argument("--workers", type=int, default=4)
    run.add_argument("--force", action="store_true", help="re-run completed cells")
    run.set_defaults(func=_cmd_run)

    score = sub.add_parser("score", help="score trajectories and emit tables")
    score.add_argument("--runs", default=None, help="defaults to <out>/runs")
    score.add_argument("--corpus", default="bench_out/corpus")
    score.add_argument("--out", default="bench_out")
    score.set_defaults(func=_cmd_score)

    report = sub.add_parser("report", help="re-aggregate persisted per-run reports")
    report.add_argument("--out", default="bench_out")
    report.set_defaults(func=_cmd_report)

    sweep = sub.add_parser("sweep", help="budget sweep over the rule-based baselines")
    sweep.add_argument("--corpus", default="bench_out/corpus")
    sweep.add_argument("--seeds", type=int, nargs="+", default=[42, 123, 999])
    sweep.add_argument("--budgets", type=int, nargs="+", default=[10, 15, 20, 25])
    sweep.add_argument("--probe-interval", type=int, default=3)
    sweep.add_argument("--out", default="bench_out/sweep")
    sweep.add_argument("--workers", type=int, default=4)
    sweep.set_defaults(func=_cmd_sweep)

    check = sub.add_parser("check-corpus", help="run the external corpus checker on every seed")
    check.add_argument("--corpus", default="bench_out/corpus")
    check.set_defaults(func=_cmd_check_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
