"""Run orchestration: corpus generation, the run matrix, scoring, and
aggregate tables.

Scoring is a pure function of (trajectory, ground truth); every
aggregate cell traces back to a persisted per-run report file.  Nothing
written here embeds timestamps, so repeated invocations over the same
inputs are byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import codegen
from .agents import BASELINE_NAMES, AgentPolicy, make_baseline
from .belief import extract_edges
from .conditions import (
    CONDITION_ACTIVE,
    CONDITION_PASSIVE_FULL,
    CONDITION_PASSIVE_ORACLE,
    CONDITION_PASSIVE_REPLAY,
    CONDITIONS,
    run_condition,
)
from .environment import Codebase
from .llm import TRACK_SCRATCHPAD, TRACKING_MODES, ConfigurationError
from .metrics import (
    apg,
    auc,
    calibration_items,
    dep_score,
    ece,
    inv_score_relaxed,
    inv_score_strict,
    recall_by_type,
)
from .belief import diff_maps
from .trajectory import Trajectory, load_trajectory, save_trajectory
from .worldmodel import GroundTruth, load_ground_truth


@dataclass
class RunConfig:
    seeds: list[int] = field(default_factory=lambda: [42, 123, 999])
    complexity: str = "medium"
    budget: int = 20
    probe_interval: int = 3
    agent: str = "config-aware"
    condition: str = CONDITION_ACTIVE
    tracking_mode: str = TRACK_SCRATCHPAD
    out_dir: str = "bench_out"
    prompt_version: str = "v2"
    domain: str | None = None

    def validate(self) -> None:
        if self.budget < 1 or self.probe_interval < 1:
            raise ConfigurationError("budget and probe interval must both be >= 1")
        if self.condition not in CONDITIONS:
            raise ConfigurationError(f"unknown condition {self.condition!r}")
        if self.tracking_mode not in TRACKING_MODES:
            raise ConfigurationError(f"unknown tracking mode {self.tracking_mode!r}")


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", name)


def run_identifier(agent: str, condition: str, mode: str, seed: int, budget: int, interval: int) -> str:
    return f"{_slug(agent)}__{condition}__{mode}__seed{seed}__B{budget}K{interval}"


# ---------------------------------------------------------------------------
# Corpus I/O
# ---------------------------------------------------------------------------

def generate_corpus(seeds: list[int], out_dir: str | Path, complexity: str = "medium",
                    domain: str | None = None, force: bool = False) -> list[dict]:
    """One ``seed_<n>/`` directory per seed: the tree plus ground_truth.json."""
    out = Path(out_dir)
    stats = []
    for seed in seeds:
        seed_dir = out / f"seed_{seed}"
        if seed_dir.exists() and any(seed_dir.iterdir()) and not force:
            raise FileExistsError(f"{seed_dir} exists and is not empty (use force to overwrite)")
        rendered = codegen.generate(seed, complexity, domain)
        codegen.write_codebase(rendered, seed_dir)
        stats.append(codegen.statistics(rendered))
    _write_stats_csv(stats, out / "corpus_stats.csv")
    return stats


def _write_stats_csv(stats: list[dict], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["seed", "domain", "modules", "sub_packages", "edges_total",
                         "IMPORTS", "CALLS_API", "DATA_FLOWS_TO", "REGISTRY_WIRES",
                         "imports_fraction", "constraints"])
        for st in stats:
            writer.writerow([st["seed"], st["domain"], st["modules"], st["sub_packages"],
                             st["edges_total"], st["edges"]["IMPORTS"], st["edges"]["CALLS_API"],
                             st["edges"]["DATA_FLOWS_TO"], st["edges"]["REGISTRY_WIRES"],
                             st["imports_fraction"], st["constraints"]])


def format_stats_block(st: dict) -> str:
    total = st["edges_total"] or 1
    lines = [
        f"seed {st['seed']}  domain={st['domain']}  complexity={st['complexity']}",
        f"  modules        {st['modules']}",
        f"  sub-packages   {st['sub_packages']}",
        f"  edges total    {st['edges_total']}",
    ]
    for name in ("IMPORTS", "CALLS_API", "DATA_FLOWS_TO", "REGISTRY_WIRES"):
        count = st["edges"][name]
        lines.append(f"    {name:<15}{count:>4} ({100.0 * count / total:.0f}%)")
    lines.append(f"  constraints    {st['constraints']}")
    return "\n".join(lines)


def locate_tree(seed_dir: str | Path) -> Path:
    seed_path = Path(seed_dir)
    trees = [p for p in seed_path.iterdir() if p.is_dir() and p.name != "__pycache__"]
    if len(trees) != 1:
        raise FileNotFoundError(f"{seed_dir} must contain exactly one corpus tree, found {len(trees)}")
    return trees[0]


def load_corpus(seed_dir: str | Path) -> tuple[Codebase, GroundTruth]:
    seed_path = Path(seed_dir)
    gt = load_ground_truth(seed_path / "ground_truth.json")
    return Codebase.from_dir(locate_tree(seed_path)), gt


# ---------------------------------------------------------------------------
# Run execution
# ---------------------------------------------------------------------------

@dataclass
class RunCell:
    """One executable cell of the run matrix."""

    agent_factory: object              # Callable[[], AgentPolicy]
    agent_label: str
    seed: int
    seed_dir: Path
    condition: str
    tracking_mode: str
    budget: int
    probe_interval: int
    prompt_version: str = ""
    source_trajectory: Path | None = None

    def run_id(self) -> str:
        return run_identifier(self.agent_label, self.condition, self.tracking_mode,
                              self.seed, self.budget, self.probe_interval)


def execute_cell(cell: RunCell) -> Trajectory:
    codebase, gt = load_corpus(cell.seed_dir)
    agent: AgentPolicy = cell.agent_factory()  # type: ignore[operator]
    source = load_trajectory(cell.source_trajectory) if cell.source_trajectory else None
    try:
        return run_condition(
            agent, codebase, cell.condition,
            gt=gt, source=source,
            budget=cell.budget, probe_interval=cell.probe_interval,
            mode=cell.tracking_mode, seed=cell.seed,
            run_id=cell.run_id(), prompt_version=cell.prompt_version,
        )
    except ConfigurationError:
        raise
    except Exception as err:  # recorded, never silently skipped
        traj = Trajectory(
            run_id=cell.run_id(), agent=cell.agent_label, condition=cell.condition,
            tracking_mode=cell.tracking_mode, seed=cell.seed, budget=cell.budget,
            probe_interval=cell.probe_interval, codebase_root=codebase.root,
            codebase_hash=codebase.content_hash(),
        )
        traj.failed = True
        traj.failure = f"{type(err).__name__}: {err}"
        return traj


def execute_matrix(cells: list[RunCell], runs_dir: str | Path, workers: int = 4,
                   resume: bool = True) -> list[Path]:
    """Run every pending cell; completed trajectory files are skipped."""
    runs_path = Path(runs_dir)
    runs_path.mkdir(parents=True, exist_ok=True)
    pending = []
    written = []
    for cell in cells:
        target = runs_path / f"{cell.run_id()}.jsonl"
        if resume and target.exists():
            written.append(target)
            continue
        pending.append((cell, target))
    if pending:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            for (cell, target), traj in zip(pending, pool.map(execute_cell, [c for c, _ in pending])):
                save_trajectory(traj, target)
                written.append(target)
    return sorted(written)


def baseline_cells(corpus_dir: str | Path, seeds: list[int], agents: tuple[str, ...] = BASELINE_NAMES,
                   condition: str = CONDITION_ACTIVE, mode: str = TRACK_SCRATCHPAD,
                   budget: int = 20, probe_interval: int = 3) -> list[RunCell]:
    corpus = Path(corpus_dir)
    cells = []
    for seed in seeds:
        seed_dir = corpus / f"seed_{seed}"
        _cb, gt = load_corpus(seed_dir)
        for name in agents:
            factory = _baseline_factory(name, gt, seed)
            cells.append(RunCell(
                agent_factory=factory, agent_label=name, seed=seed, seed_dir=seed_dir,
                condition=condition, tracking_mode=mode, budget=budget,
                probe_interval=probe_interval,
            ))
    return cells


def _baseline_factory(name: str, gt: GroundTruth, seed: int):
    # The corpus seed also seeds stochastic agents: one seed drives a run.
    def factory() -> AgentPolicy:
        return make_baseline(name, gt=gt, seed=seed)
    return factory


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def score_trajectory(traj: Trajectory, gt: GroundTruth) -> dict:
    """Score one run; deterministic for fixed inputs."""
    report: dict = {
        "run_id": traj.run_id,
        "agent": traj.agent,
        "condition": traj.condition,
        "tracking_mode": traj.tracking_mode,
        "seed": traj.seed,
        "budget": traj.budget,
        "probe_interval": traj.probe_interval,
        "failed": traj.failed,
        "failure": traj.failure,
        "files_opened": traj.files_opened(),
        "invalid_actions": traj.invalid_actions,
        "probe_count": len(traj.probes),
    }
    if traj.failed:
        return report
    final = traj.final_map()
    edges = extract_edges(final)
    dep = dep_score(edges, gt)
    strict = inv_score_strict(final.invariants, gt.constraints)
    relaxed = inv_score_relaxed(final.invariants, gt.constraints)
    items = calibration_items(final, gt)
    report.update({
        "dep": dep.to_dict(),
        "inv_strict": strict.to_dict(),
        "inv_relaxed": relaxed.to_dict(),
        "ece": ece(items),
        "ece_n": len(items),
        "per_type_recall": recall_by_type(edges, gt),
    })
    for axis, key in (("actions", "auc_actions"), ("opens", "auc_opens")):
        try:
            report[key] = auc(traj, axis, gt).auc
        except ValueError:
            report[key] = None
    series = []
    for probe in traj.probes:
        probe_f1 = dep_score(extract_edges(probe.cognitive_map), gt).f1
        series.append({"step": probe.step, "opens": probe.opens, "dep_f1": probe_f1})
    if traj.final is not None:
        series.append({"step": traj.final.step, "opens": traj.final.opens,
                       "dep_f1": dep.f1, "final": True})
    report["probe_series"] = series
    chain = list(traj.probes) + ([traj.final] if traj.final is not None else [])
    stability = []
    for prev, nxt in zip(chain, chain[1:]):
        delta = diff_maps(prev.cognitive_map, nxt.cognitive_map, gt)
        delta["step"] = nxt.step
        stability.append(delta)
    report["stability"] = stability
    report["repairs_total"] = sum(len(p.parse_report.repairs) for p in chain)
    return report


def score_runs(runs_dir: str | Path, corpus_dir: str | Path, out_dir: str | Path) -> list[Path]:
    """Score every trajectory in ``runs_dir`` against its corpus seed."""
    corpus = Path(corpus_dir)
    reports_dir = Path(out_dir) / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path in sorted(Path(runs_dir).glob("*.jsonl")):
        traj = load_trajectory(path)
        seed_dir = corpus / f"seed_{traj.seed}"
        codebase, gt = load_corpus(seed_dir)
        if not traj.failed and traj.codebase_hash != codebase.content_hash():
            raise ValueError(f"{path.name}: trajectory was recorded on a different codebase "
                             f"than {seed_dir}")
        report = score_trajectory(traj, gt)
        target = reports_dir / f"{traj.run_id}.json"
        target.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(target)
    return written


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0

def _half_range(values: list[float]) -> float:
    return (max(values) - min(values)) / 2.0 if values else 0.0


def load_reports(out_dir: str | Path) -> list[dict]:
    reports_dir = Path(out_dir) / "reports"
    return [json.loads(p.read_text(encoding="utf-8")) for p in sorted(reports_dir.glob("*.json"))]


def _group_key(report: dict) -> tuple:
    return (report["agent"], report["condition"], report["tracking_mode"],
            report["budget"], report["probe_interval"])


def aggregate_main_table(reports: list[dict]) -> list[dict]:
    """Per (agent, condition, mode): mean and half-range across seeds."""
    groups: dict[tuple, list[dict]] = {}
    for report in reports:
        if report.get("failed"):
            continue
        groups.setdefault(_group_key(report), []).append(report)
    rows = []
    for key in sorted(groups):
        agent, condition, mode, budget, interval = key
        members = groups[key]
        dep_f1 = [m["dep"]["f1"] for m in members]
        aucs = [m["auc_actions"] for m in members if m.get("auc_actions") is not None]
        rows.append({
            "agent": agent, "condition": condition, "tracking_mode": mode,
            "budget": budget, "probe_interval": interval, "runs": len(members),
            "dep_f1_mean": _mean(dep_f1), "dep_f1_halfrange": _half_range(dep_f1),
            "precision_mean": _mean([m["dep"]["precision"] for m in members]),
            "recall_mean": _mean([m["dep"]["recall"] for m in members]),
            "auc_actions_mean": _mean(aucs) if aucs else None,
            "auc_actions_halfrange": _half_range(aucs) if aucs else None,
            "inv_relaxed_f1_mean": _mean([m["inv_relaxed"]["f1"] for m in members]),
            "inv_relaxed_f1_halfrange": _half_range([m["inv_relaxed"]["f1"] for m in members]),
            "inv_strict_f1_mean": _mean([m["inv_strict"]["f1"] for m in members]),
            "ece_mean": _mean([m["ece"] for m in members]),
            "files_opened_mean": _mean([float(m["files_opened"]) for m in members]),
        })
    return rows


def aggregate_edge_type_table(reports: list[dict]) -> list[dict]:
    """Recall per edge type, pooled across seeds (tp and n summed)."""
    groups: dict[tuple, list[dict]] = {}
    for report in reports:
        if report.get("failed"):
            continue
        groups.setdefault(_group_key(report), []).append(report)
    rows = []
    for key in sorted(groups):
        agent, condition, mode, budget, interval = key
        members = groups[key]
        type_names = sorted({t for m in members for t in m["per_type_recall"]})
        for type_name in type_names:
            tp = sum(m["per_type_recall"][type_name]["tp"] for m in members)
            n = sum(m["per_type_recall"][type_name]["n"] for m in members)
            rows.append({
                "agent": agent, "condition": condition, "tracking_mode": mode,
                "budget": budget, "edge_type": type_name,
                "tp": tp, "n": n, "recall": tp / n if n else 0.0,
            })
    return rows


def aggregate_apg_table(reports: list[dict]) -> list[dict]:
    """Condition means per (agent, mode, budget) plus the gap decomposition."""
    groups: dict[tuple, dict[str, list[dict]]] = {}
    for report in reports:
        if report.get("failed"):
            continue
        key = (report["agent"], report["tracking_mode"], report["budget"])
        groups.setdefault(key, {}).setdefault(report["condition"], []).append(report)
    rows = []
    for key in sorted(groups):
        agent, mode, budget = key
        by_condition = groups[key]
        dep_means = {}
        inv_means = {}
        for condition in sorted(by_condition):
            members = by_condition[condition]
            dep_values = [m["dep"]["f1"] for m in members]
            inv_values = [m["inv_relaxed"]["f1"] for m in members]
            dep_means[condition] = _mean(dep_values)
            inv_means[condition] = _mean(inv_values)
            rows.append({
                "agent": agent, "tracking_mode": mode, "budget": budget,
                "condition": condition, "runs": len(members),
                "dep_f1_mean": _mean(dep_values), "dep_f1_halfrange": _half_range(dep_values),
                "inv_relaxed_f1_mean": _mean(inv_values),
                "inv_relaxed_f1_halfrange": _half_range(inv_values),
            })
        gaps = apg(dep_means)
        inv_gaps = apg(inv_means)
        if any(v is not None for v in (gaps.apg_total, gaps.apg_selection, gaps.apg_decision)):
            rows.append({
                "agent": agent, "tracking_mode": mode, "budget": budget, "condition": "APG",
                "apg_total": gaps.apg_total, "apg_selection": gaps.apg_selection,
                "apg_decision": gaps.apg_decision,
                "inv_apg_total": inv_gaps.apg_total, "inv_apg_selection": inv_gaps.apg_selection,
                "inv_apg_decision": inv_gaps.apg_decision,
            })
    return rows


def aggregate_tracking_table(reports: list[dict]) -> list[dict]:
    """Tracking-mode means plus the scratchpad effect (scratchpad - no_probe)."""
    groups: dict[tuple, dict[str, list[dict]]] = {}
    for report in reports:
        if report.get("failed"):
            continue
        key = (report["agent"], report["condition"], report["budget"])
        groups.setdefault(key, {}).setdefault(report["tracking_mode"], []).append(report)
    rows = []
    for key in sorted(groups):
        agent, condition, budget = key
        by_mode = groups[key]
        dep_means = {}
        inv_means = {}
        for mode in sorted(by_mode):
            members = by_mode[mode]
            dep_values = [m["dep"]["f1"] for m in members]
            inv_values = [m["inv_relaxed"]["f1"] for m in members]
            dep_means[mode] = _mean(dep_values)
            inv_means[mode] = _mean(inv_values)
            rows.append({
                "agent": agent, "condition": condition, "budget": budget,
                "tracking_mode": mode, "runs": len(members),
                "dep_f1_mean": _mean(dep_values), "dep_f1_halfrange": _half_range(dep_values),
                "inv_relaxed_f1_mean": _mean(inv_values),
                "inv_relaxed_f1_halfrange": _half_range(inv_values),
            })
        if "scratchpad" in dep_means and "no_probe" in dep_means:
            rows.append({
                "agent": agent, "condition": condition, "budget": budget,
                "tracking_mode": "SCRATCHPAD_EFFECT",
                "dep_f1_mean": dep_means["scratchpad"] - dep_means["no_probe"],
                "inv_relaxed_f1_mean": inv_means["scratchpad"] - inv_means["no_probe"],
            })
    return rows


def _write_csv(rows: list[dict], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        path.write_text("", encoding="utf-8")
        return
    fieldnames: list[str] = []
    for row in rows:
        for name in row:
            if name not in fieldnames:
                fieldnames.append(name)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    path.write_text(buffer.getvalue(), encoding="utf-8")


def write_tables(reports: list[dict], out_dir: str | Path) -> dict[str, Path]:
    tables_dir = Path(out_dir) / "tables"
    outputs = {
        "main": tables_dir / "main_results.csv",
        "edge_types": tables_dir / "edge_type_recall.csv",
        "apg": tables_dir / "apg_decomposition.csv",
        "tracking": tables_dir / "tracking_modes.csv",
    }
    _write_csv(aggregate_main_table(reports), outputs["main"])
    _write_csv(aggregate_edge_type_table(reports), outputs["edge_types"])
    _write_csv(aggregate_apg_table(reports), outputs["apg"])
    _write_csv(aggregate_tracking_table(reports), outputs["tracking"])
    curves_dir = Path(out_dir) / "curves"
    curves_dir.mkdir(parents=True, exist_ok=True)
    for report in reports:
        if report.get("failed") or "probe_series" not in report:
            continue
        rows = [{"step": point["step"], "opens": point["opens"], "dep_f1": point["dep_f1"]}
                for point in report["probe_series"]]
        _write_csv(rows, curves_dir / f"{report['run_id']}.csv")
        outputs[f"curve:{report['run_id']}"] = curves_dir / f"{report['run_id']}.csv"
    return outputs


def sweep_table(reports: list[dict]) -> list[dict]:
    """Mean dependency F1 per (agent, budget): the budget-sweep view."""
    groups: dict[tuple, list[float]] = {}
    for report in reports:
        if report.get("failed"):
            continue
        groups.setdefault((report["agent"], report["budget"]), []).append(report["dep"]["f1"])
    agents = sorted({agent for agent, _ in groups})
    budgets = sorted({budget for _, budget in groups})
    rows = []
    for agent in agents:
        row: dict = {"agent": agent}
        for budget in budgets:
            values = groups.get((agent, budget), [])
            row[f"B{budget}"] = round(_mean(values), 4) if values else None
        rows.append(row)
    return rows
