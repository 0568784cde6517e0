"""archprobe: a benchmark harness for architectural belief mapping.

Generates codebases with known architecture, lets agents explore them
under an action budget with periodic belief probes, and scores the
externalized beliefs against the planted ground truth.
"""

from .belief import CognitiveMap, ParseReport, ProbeParseError, diff_maps, extract_edges, parse_probe
from .codegen import GenerationError, RenderedCodebase, generate, statistics, write_codebase
from .conditions import run_active, run_condition, run_passive_full, run_passive_oracle, run_passive_replay
from .environment import Action, Codebase, Observation, Session, inspect, probe_due, search, step
from .metrics import apg, auc, brs, dep_score, ece, inv_score_relaxed, inv_score_strict, recall_by_type
from .worldmodel import (
    Constraint,
    ConstraintType,
    DepEdge,
    EdgeType,
    GroundTruth,
    ModuleSpec,
    connectivity_rank,
    load_ground_truth,
    save_ground_truth,
)

__version__ = "0.1.0"

__all__ = [
    "Action", "Codebase", "CognitiveMap", "Constraint", "ConstraintType", "DepEdge",
    "EdgeType", "GenerationError", "GroundTruth", "ModuleSpec", "Observation",
    "ParseReport", "ProbeParseError", "RenderedCodebase", "Session",
    "apg", "auc", "brs", "connectivity_rank", "dep_score", "diff_maps", "ece",
    "extract_edges", "generate", "inspect", "inv_score_relaxed", "inv_score_strict",
    "load_ground_truth", "parse_probe", "probe_due", "recall_by_type", "run_active",
    "run_condition", "run_passive_full", "run_passive_oracle", "run_passive_replay",
    "save_ground_truth", "search", "statistics", "step", "write_codebase",
]
