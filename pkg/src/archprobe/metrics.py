"""Scoring: dependency F1, invariant F1 (strict/relaxed), calibration,
efficiency curves, active-passive gap decomposition, and belief
revision scoring.

Matching conventions, pinned here so every score is reproducible:

* Dependency edges match on exact (src, dst, type) string equality
  after path normalization.  Directory-level targets, symbol-qualified
  targets (``file.py::Symbol``), and unknown type strings therefore
  never match file-level ground truth.
* Strict invariant matching requires exact equality on
  (type, src, dst, via); the pattern field is excluded.
* Relaxed invariant matching strips directory prefixes from path
  fields, treats empty ground-truth fields as wildcards, and assigns
  greedily by descending pair score with (gt index, pred index) tie
  breaks.
* ECE uses 5 equal-width confidence bins over [0, 1].
* Efficiency curves sample the piecewise-constant belief F1 at every
  integer x from 0 to the axis maximum (y(0)=0 unless a step-0 probe
  exists), integrate with the trapezoid rule, and divide by the axis
  maximum.
"""

from __future__ import annotations

import posixpath
from dataclasses import dataclass, field

from .belief import CognitiveMap, InvariantBelief, edge_confidences, extract_edges
from .worldmodel import GroundTruth

Triple = tuple[str, str, str]
Tuple4 = tuple[str, str, str, str]


@dataclass
class DepScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    empty_prediction: bool = False  # precision reported as 1.0 with n=0

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn,
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
            "empty_prediction": self.empty_prediction,
        }


def _prf(tp: int, fp: int, fn: int) -> DepScore:
    empty = (tp + fp) == 0
    precision = 1.0 if empty else tp / (tp + fp)
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return DepScore(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1,
                    empty_prediction=empty)


def dep_score(predicted: set[Triple] | list[Triple], gt: GroundTruth) -> DepScore:
    """Exact-match dependency scoring against the ground-truth edge set."""
    pred = set(predicted)
    truth = gt.edge_set()
    tp = len(pred & truth)
    return _prf(tp=tp, fp=len(pred) - tp, fn=len(truth) - tp)


def recall_by_type(predicted: set[Triple] | list[Triple], gt: GroundTruth) -> dict[str, dict]:
    """Per-edge-type recall with the ground-truth count n for each type."""
    pred = set(predicted)
    out: dict[str, dict] = {}
    by_type: dict[str, set[Triple]] = {}
    for triple in gt.edge_set():
        by_type.setdefault(triple[2], set()).add(triple)
    for type_name in sorted(by_type):
        truth = by_type[type_name]
        tp = len(pred & truth)
        out[type_name] = {"tp": tp, "n": len(truth), "recall": tp / len(truth)}
    return out


# ---------------------------------------------------------------------------
# Invariant scoring
# ---------------------------------------------------------------------------

def _strip_dirs(path: str) -> str:
    return posixpath.basename(path) if path else ""


def _canonical4(item) -> Tuple4:
    if isinstance(item, InvariantBelief):
        return item.tuple4()
    if hasattr(item, "tuple4"):
        return item.tuple4()
    type_name, src, dst, via = item[0], item[1], item[2], item[3]
    return (str(type_name), str(src), str(dst), str(via))


def inv_score_strict(predicted: list, gt_constraints: list) -> DepScore:
    """Strict invariant F1: exact (type, src, dst, via) agreement, 1-to-1."""
    preds = [_canonical4(p) for p in predicted]
    truths = [_canonical4(g) for g in gt_constraints]
    unmatched = list(range(len(truths)))
    tp = 0
    for pred in preds:
        for slot, gi in enumerate(unmatched):
            if truths[gi] == pred:
                del unmatched[slot]
                tp += 1
                break
    return _prf(tp=tp, fp=len(preds) - tp, fn=len(truths) - tp)


def _relaxed_pair(gt4: Tuple4, pred4: Tuple4) -> int | None:
    """Pair score, or None when ineligible.

    Eligible means: type matches exactly and every nonempty ground-truth
    field agrees (paths compared after directory-prefix stripping).  The
    score counts the nonempty ground-truth fields that matched, so more
    substantive agreements are assigned first.
    """
    if gt4[0] != pred4[0]:
        return None
    score = 1
    for index in (1, 2):  # src, dst: path fields
        if not gt4[index]:
            continue
        if _strip_dirs(gt4[index]) != _strip_dirs(pred4[index]):
            return None
        score += 1
    if gt4[3]:
        if gt4[3] != pred4[3]:
            return None
        score += 1
    return score


def inv_score_relaxed(predicted: list, gt_constraints: list) -> DepScore:
    """Relaxed invariant F1: wildcards for empty gt fields, greedy 1-to-1."""
    preds = [_canonical4(p) for p in predicted]
    truths = [_canonical4(g) for g in gt_constraints]
    pairs: list[tuple[int, int, int]] = []  # (-score, gt index, pred index)
    for gi, gt4 in enumerate(truths):
        for pi, pred4 in enumerate(preds):
            score = _relaxed_pair(gt4, pred4)
            if score is not None:
                pairs.append((-score, gi, pi))
    pairs.sort()
    used_gt: set[int] = set()
    used_pred: set[int] = set()
    tp = 0
    for _neg, gi, pi in pairs:
        if gi in used_gt or pi in used_pred:
            continue
        used_gt.add(gi)
        used_pred.add(pi)
        tp += 1
    return _prf(tp=tp, fp=len(preds) - tp, fn=len(truths) - tp)


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

ECE_BINS = 5


@dataclass
class CalibrationBin:
    lo: float
    hi: float
    n: int = 0
    mean_conf: float = 0.0
    accuracy: float = 0.0


def ece(items: list[tuple[float, bool]]) -> float:
    """Expected calibration error over (confidence, correct) pairs."""
    value, _bins = ece_detail(items)
    return value


def ece_detail(items: list[tuple[float, bool]]) -> tuple[float, list[CalibrationBin]]:
    bins = [CalibrationBin(lo=b / ECE_BINS, hi=(b + 1) / ECE_BINS) for b in range(ECE_BINS)]
    if not items:
        return 0.0, bins
    sums = [0.0] * ECE_BINS
    hits = [0] * ECE_BINS
    counts = [0] * ECE_BINS
    for confidence, correct in items:
        index = min(int(confidence * ECE_BINS), ECE_BINS - 1)
        counts[index] += 1
        sums[index] += confidence
        hits[index] += 1 if correct else 0
    total = len(items)
    error = 0.0
    for index, bin_ in enumerate(bins):
        bin_.n = counts[index]
        if counts[index] == 0:
            continue
        bin_.mean_conf = sums[index] / counts[index]
        bin_.accuracy = hits[index] / counts[index]
        error += (counts[index] / total) * abs(bin_.accuracy - bin_.mean_conf)
    return error, bins


def calibration_items(cmap: CognitiveMap, gt: GroundTruth) -> list[tuple[float, bool]]:
    """Every predicted edge contributes; correct means a strict TP."""
    truth = gt.edge_set()
    return [(confidence, triple in truth) for triple, confidence in edge_confidences(cmap)]


# ---------------------------------------------------------------------------
# Efficiency curves
# ---------------------------------------------------------------------------

@dataclass
class EfficiencyCurve:
    axis: str                      # "actions" | "opens"
    points: list[tuple[int, float]] = field(default_factory=list)  # sampled (x, y)
    auc: float = 0.0
    degenerate: bool = False       # x_max was 0

    def to_dict(self) -> dict:
        return {"axis": self.axis, "auc": self.auc, "degenerate": self.degenerate,
                "points": [list(p) for p in self.points]}


def auc_from_points(probe_points: list[tuple[int, float]], x_max: int, axis: str = "actions") -> EfficiencyCurve:
    """Trapezoid AUC of a piecewise-constant belief curve.

    ``probe_points`` holds (x, f1) per probe; y steps to a probe's value
    at its x and holds until the next probe.  Later probes at the same x
    win.  y(0) = 0 unless a probe exists at x = 0.
    """
    if x_max <= 0:
        return EfficiencyCurve(axis=axis, points=[(0, 0.0)], auc=0.0, degenerate=True)
    level: dict[int, float] = {}
    for x, y in probe_points:
        level[min(max(int(x), 0), x_max)] = float(y)
    samples: list[tuple[int, float]] = []
    current = level.get(0, 0.0)
    for x in range(x_max + 1):
        if x in level:
            current = level[x]
        samples.append((x, current))
    area = sum((samples[i][1] + samples[i + 1][1]) / 2.0 for i in range(x_max))
    return EfficiencyCurve(axis=axis, points=samples, auc=area / x_max)


def auc(trajectory, axis: str, gt: GroundTruth) -> EfficiencyCurve:
    """Efficiency curve for a scored trajectory.

    ``axis`` is ``actions`` (x = costed actions, x_max = budget) or
    ``opens`` (x = cumulative OPEN count at each probe).  Requires at
    least one probe; runs without probes are scored on their final map
    only and have no curve.
    """
    if axis not in ("actions", "opens"):
        raise ValueError(f"unknown AUC axis {axis!r}")
    probes = list(trajectory.probes)
    if not probes:
        raise ValueError("trajectory has no probes; no efficiency curve exists")
    points = []
    for probe in probes:
        x = probe.step if axis == "actions" else probe.opens
        score = dep_score(extract_edges(probe.cognitive_map), gt)
        points.append((x, score.f1))
    x_max = trajectory.budget if axis == "actions" else max((p.opens for p in probes), default=0)
    return auc_from_points(points, x_max, axis=axis)


# ---------------------------------------------------------------------------
# Active-passive gap
# ---------------------------------------------------------------------------

CONDITION_ACTIVE = "active"
CONDITION_PASSIVE_FULL = "passive_full"
CONDITION_PASSIVE_ORACLE = "passive_oracle"
CONDITION_PASSIVE_REPLAY = "passive_replay"


@dataclass
class ApgReport:
    apg_total: float | None = None       # passive-full - active
    apg_selection: float | None = None   # passive-oracle - active
    apg_decision: float | None = None    # active - passive-replay

    def to_dict(self) -> dict:
        return {"apg_total": self.apg_total, "apg_selection": self.apg_selection,
                "apg_decision": self.apg_decision}


def apg(condition_scores: dict[str, float]) -> ApgReport:
    """Gap decomposition from per-condition scores of one metric.

    Missing conditions leave the corresponding component absent (None),
    never zero.
    """
    active = condition_scores.get(CONDITION_ACTIVE)
    report = ApgReport()
    if active is None:
        return report
    full = condition_scores.get(CONDITION_PASSIVE_FULL)
    oracle = condition_scores.get(CONDITION_PASSIVE_ORACLE)
    replay = condition_scores.get(CONDITION_PASSIVE_REPLAY)
    if full is not None:
        report.apg_total = full - active
    if oracle is not None:
        report.apg_selection = oracle - active
    if replay is not None:
        report.apg_decision = active - replay
    return report


# ---------------------------------------------------------------------------
# Belief revision
# ---------------------------------------------------------------------------

def _map_elements(cmap: CognitiveMap) -> set[tuple]:
    elements: set[tuple] = {("edge",) + triple for triple in extract_edges(cmap)}
    elements |= {("component", path) for path in cmap.component_paths()}
    elements |= {("invariant",) + inv.tuple4() for inv in cmap.invariants}
    return elements


def _truth_elements(gt: GroundTruth) -> set[tuple]:
    elements: set[tuple] = {("edge",) + triple for triple in gt.edge_set()}
    elements |= {("component", path) for path in gt.module_paths()}
    elements |= {("invariant",) + c.tuple4() for c in gt.constraints}
    return elements


def brs(before: CognitiveMap, after: CognitiveMap, affected: set[tuple],
        gt_after: GroundTruth, gt_before: GroundTruth | None = None) -> dict[str, float]:
    """Belief revision scoring over mutation-affected elements.

    Elements are tagged tuples: ``("edge", src, dst, type)``,
    ``("component", path)``, or ``("invariant", type, src, dst, via)``.
    ``brs`` is the fraction of affected elements whose post-mutation
    belief agrees with the post-mutation truth.  ``inertia_proper``
    counts elements believed correctly beforehand (against the
    pre-mutation truth when supplied) whose belief did not move and is
    now wrong.  ``impact_discovery`` counts newly-true elements absent
    from the old belief and present and correct in the new one.
    """
    if not affected:
        raise ValueError("affected element set is empty; the ratio is undefined")
    believed_before = _map_elements(before)
    believed_after = _map_elements(after)
    true_after = _truth_elements(gt_after)
    true_before = _truth_elements(gt_before) if gt_before is not None else None

    correct_updates = 0
    inertia = 0
    discovery = 0
    for element in affected:
        b_before = element in believed_before
        b_after = element in believed_after
        t_after = element in true_after
        if b_after == t_after:
            correct_updates += 1
        unchanged = b_before == b_after
        was_correct = True if true_before is None else (b_before == (element in true_before))
        if was_correct and unchanged and b_after != t_after:
            inertia += 1
        if not b_before and b_after and t_after:
            discovery += 1
    return {
        "brs": correct_updates / len(affected),
        "inertia_proper": float(inertia),
        "impact_discovery": float(discovery),
    }
