"""Cognitive map schema, the deterministic repair parser, and map diffs.

A probe response is expected to be a JSON object of the form::

    {
      "components": [
        {"path": ..., "status": "observed|inferred|unknown", "purpose": ...,
         "exports": [{"symbol": ..., "signature": ...}],
         "edges": [{"dst": ..., "type": ..., "confidence": 0.0-1.0}]}
      ],
      "invariants": [
        {"type": ..., "src": ..., "dst": ..., "via": ..., "pattern": ...,
         "evidence": [...]}
      ],
      "unexplored": [...]
    }

Real model output rarely arrives that clean, so :func:`parse_probe`
applies a fixed, closed sequence of repairs (fence stripping, balanced
brace extraction, trailing-comma removal, quote normalization, verbal
confidence coercion, field defaulting) and logs every rule it applied.
The same text always yields the same map and the same repair log.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .worldmodel import GroundTruth

STATUSES = ("observed", "inferred", "unknown")

VERBAL_CONFIDENCE = {"high": 0.9, "medium": 0.6, "low": 0.3}

# Repair rule names, in application order.
R_FENCES = "strip_code_fences"
R_BRACES = "extract_balanced_braces"
R_COMMAS = "remove_trailing_commas"
R_QUOTES = "normalize_single_quotes"
R_CONFIDENCE = "coerce_confidence"
R_DEFAULTS = "default_missing_fields"
R_PATHS = "normalize_paths"
R_MERGE = "merge_duplicate_components"


class ProbeParseError(ValueError):
    """No balanced JSON object could be recovered from the probe text."""

    def __init__(self, message: str, raw_text: str):
        super().__init__(message)
        self.raw_text = raw_text


@dataclass
class ParseReport:
    repairs: list[str] = field(default_factory=list)
    dropped: list[str] = field(default_factory=list)
    success: bool = False

    def note(self, rule: str) -> None:
        if rule not in self.repairs:
            self.repairs.append(rule)


@dataclass
class ComponentBelief:
    path: str
    status: str = "unknown"
    purpose: str = ""
    exports: list[tuple[str, str]] = field(default_factory=list)
    edges: list[tuple[str, str, float]] = field(default_factory=list)  # (dst, type, confidence)


@dataclass
class InvariantBelief:
    type: str = ""
    src: str = ""
    dst: str = ""
    via: str = ""
    pattern: str = ""
    evidence: list[str] = field(default_factory=list)

    def tuple4(self) -> tuple[str, str, str, str]:
        return (self.type, self.src, self.dst, self.via)

    def tuple5(self) -> tuple[str, str, str, str, str]:
        return (self.type, self.src, self.dst, self.via, self.pattern)


@dataclass
class CognitiveMap:
    components: list[ComponentBelief] = field(default_factory=list)
    invariants: list[InvariantBelief] = field(default_factory=list)
    unexplored: list[str] = field(default_factory=list)
    probe_step: int = 0

    def component_paths(self) -> list[str]:
        return [c.path for c in self.components]

    def to_dict(self) -> dict:
        return {
            "components": [
                {
                    "path": c.path,
                    "status": c.status,
                    "purpose": c.purpose,
                    "exports": [{"symbol": s, "signature": sig} for s, sig in c.exports],
                    "edges": [{"dst": d, "type": t, "confidence": conf} for d, t, conf in c.edges],
                }
                for c in self.components
            ],
            "invariants": [
                {
                    "type": i.type, "src": i.src, "dst": i.dst,
                    "via": i.via, "pattern": i.pattern, "evidence": list(i.evidence),
                }
                for i in self.invariants
            ],
            "unexplored": list(self.unexplored),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def cognitive_map_from_dict(doc: dict, probe_step: int = 0) -> CognitiveMap:
    """Rebuild a map from its serialized form (no repairs applied)."""
    components = [
        ComponentBelief(
            path=str(c.get("path", "")),
            status=str(c.get("status", "unknown")),
            purpose=str(c.get("purpose", "")),
            exports=[(str(e.get("symbol", "")), str(e.get("signature", ""))) for e in c.get("exports", [])],
            edges=[(str(e.get("dst", "")), str(e.get("type", "")), float(e.get("confidence", 0.5)))
                   for e in c.get("edges", [])],
        )
        for c in doc.get("components", [])
    ]
    invariants = [
        InvariantBelief(
            type=str(i.get("type", "")), src=str(i.get("src", "")), dst=str(i.get("dst", "")),
            via=str(i.get("via", "")), pattern=str(i.get("pattern", "")),
            evidence=[str(e) for e in i.get("evidence", [])],
        )
        for i in doc.get("invariants", [])
    ]
    return CognitiveMap(
        components=components,
        invariants=invariants,
        unexplored=[str(u) for u in doc.get("unexplored", [])],
        probe_step=probe_step,
    )


def normalize_belief_path(path: str) -> str:
    """Case, separator, and leading ``./`` normalization (parse-time only)."""
    path = str(path).strip().replace("\\", "/").lower()
    while path.startswith("./"):
        path = path[2:]
    return path.lstrip("/")


# ---------------------------------------------------------------------------
# Text repairs
# ---------------------------------------------------------------------------

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n?(.*?)```", re.DOTALL)
_TRAILING_COMMA = re.compile(r",(\s*[}\]])")
# A single-quoted string is convertible when it sits where JSON expects a
# key, value, or array element: opened after {, [, comma, or colon and
# closed before a colon, comma, or closing bracket.
_SINGLE_QUOTED = re.compile(r"([{\[,:]\s*)'([^'\n]*)'(?=\s*[:,\]}])")


def _strip_fences(text: str, report: ParseReport) -> str:
    matches = _FENCE.findall(text)
    if matches:
        report.note(R_FENCES)
        return max(matches, key=len)
    return text


def _scan_braces(text: str, delimiters: str) -> str | None:
    best: tuple[int, int] | None = None
    depth = 0
    start = -1
    in_string: str | None = None
    escaped = False
    for index, char in enumerate(text):
        if in_string is not None:
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == in_string:
                in_string = None
            continue
        if char in delimiters:
            in_string = char
            continue
        if char == "{":
            if depth == 0:
                start = index
            depth += 1
        elif char == "}" and depth > 0:
            depth -= 1
            if depth == 0:
                span = (start, index + 1)
                if best is None or span[1] - span[0] > best[1] - best[0]:
                    best = span
    if best is None:
        return None
    return text[best[0]:best[1]]


def _balanced_brace_span(text: str) -> str | None:
    """Largest balanced ``{...}`` span, ignoring braces inside strings.

    Prose wrappers make string detection ambiguous (an apostrophe in
    "I'm" is not a delimiter), so scanning falls back through a fixed
    cascade: both quote kinds honored, then double quotes only, then
    raw brace counting.  The first pass that finds a span wins, which
    keeps the result deterministic.
    """
    for delimiters in ("\"'", '"', ""):
        span = _scan_braces(text, delimiters)
        if span is not None:
            return span
    return None


def _extract_braces(text: str, report: ParseReport) -> str:
    span = _balanced_brace_span(text)
    if span is None:
        raise ProbeParseError("no balanced JSON object found in probe text", text)
    if span != text.strip():
        report.note(R_BRACES)
    return span


def _remove_trailing_commas(text: str, report: ParseReport) -> str:
    repaired = _TRAILING_COMMA.sub(r"\1", text)
    if repaired != text:
        report.note(R_COMMAS)
    return repaired


def _normalize_single_quotes(text: str, report: ParseReport) -> str:
    previous = None
    repaired = text
    while repaired != previous:  # adjacent elements share boundary commas
        previous = repaired
        repaired = _SINGLE_QUOTED.sub(r'\1"\2"', repaired)
    if repaired != text:
        report.note(R_QUOTES)
    return repaired


def _coerce_confidence(value, report: ParseReport) -> float:
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in VERBAL_CONFIDENCE:
            report.note(R_CONFIDENCE)
            return VERBAL_CONFIDENCE[lowered]
        try:
            value = float(lowered)
        except ValueError:
            report.note(R_CONFIDENCE)
            return 0.5
        report.note(R_CONFIDENCE)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        report.note(R_CONFIDENCE)
        return 0.5
    number = float(value)
    if number < 0.0 or number > 1.0:
        report.note(R_CONFIDENCE)
        return min(1.0, max(0.0, number))
    return number


# ---------------------------------------------------------------------------
# Structure assembly
# ---------------------------------------------------------------------------

def _as_exports(raw, report: ParseReport) -> list[tuple[str, str]]:
    exports = []
    if not isinstance(raw, list):
        return exports
    for item in raw:
        if isinstance(item, dict) and "symbol" in item:
            exports.append((str(item["symbol"]), str(item.get("signature", ""))))
        elif isinstance(item, (list, tuple)) and item:
            exports.append((str(item[0]), str(item[1]) if len(item) > 1 else ""))
        elif isinstance(item, str):
            exports.append((item, ""))
        else:
            report.dropped.append(f"export entry {item!r}")
    return exports


def _normalized_path(raw_path, report: ParseReport) -> str:
    path = normalize_belief_path(raw_path)
    if path != str(raw_path):
        report.note(R_PATHS)
    return path


def _as_edges(raw, report: ParseReport) -> list[tuple[str, str, float]]:
    edges = []
    if not isinstance(raw, list):
        return edges
    for item in raw:
        if not isinstance(item, dict) or "dst" not in item:
            report.dropped.append(f"edge entry {item!r}")
            continue
        dst = _normalized_path(item["dst"], report)
        edge_type = str(item.get("type", "")).strip().upper()
        if "confidence" in item:
            confidence = _coerce_confidence(item["confidence"], report)
        else:
            report.note(R_DEFAULTS)
            confidence = 0.5
        edges.append((dst, edge_type, confidence))
    return edges


def _as_component(raw, report: ParseReport) -> ComponentBelief | None:
    if not isinstance(raw, dict):
        report.dropped.append(f"component entry {raw!r}")
        return None
    path = raw.get("path") or raw.get("file") or raw.get("module")
    if not path:
        report.dropped.append("component without a path")
        return None
    status = str(raw.get("status", "")).strip().lower()
    if status not in STATUSES:
        if "status" in raw:
            report.note(R_DEFAULTS)
        status = "unknown"
    return ComponentBelief(
        path=_normalized_path(path, report),
        status=status,
        purpose=str(raw.get("purpose", "")),
        exports=_as_exports(raw.get("exports"), report),
        edges=_as_edges(raw.get("edges"), report),
    )


def _as_invariant(raw, report: ParseReport) -> InvariantBelief | None:
    if not isinstance(raw, dict):
        report.dropped.append(f"invariant entry {raw!r}")
        return None
    missing = [name for name in ("type", "src", "dst", "via", "pattern") if name not in raw]
    if missing:
        report.note(R_DEFAULTS)
    evidence = raw.get("evidence", [])
    if not isinstance(evidence, list):
        evidence = [evidence]
    return InvariantBelief(
        type=str(raw.get("type", "")).strip().upper(),
        src=_normalized_path(raw.get("src", ""), report),
        dst=_normalized_path(raw.get("dst", ""), report),
        via=str(raw.get("via", "")).strip(),
        pattern=str(raw.get("pattern", "")).strip(),
        evidence=[str(item) for item in evidence],
    )


def _merge_components(components: list[ComponentBelief], report: ParseReport) -> list[ComponentBelief]:
    by_path: dict[str, ComponentBelief] = {}
    order: list[str] = []
    merged = False
    for comp in components:
        if comp.path not in by_path:
            by_path[comp.path] = comp
            order.append(comp.path)
            continue
        merged = True
        kept = by_path[comp.path]
        kept.edges.extend(edge for edge in comp.edges if edge not in kept.edges)
        kept.exports.extend(exp for exp in comp.exports if exp not in kept.exports)
        if not kept.purpose:
            kept.purpose = comp.purpose
    if merged:
        report.note(R_MERGE)
    return [by_path[path] for path in order]


def parse_probe(text: str, probe_step: int = 0) -> tuple[CognitiveMap, ParseReport]:
    """Parse one probe response into a cognitive map, repairing as needed.

    Raises :class:`ProbeParseError` when no balanced JSON object exists
    in the text.  Identical input always produces an identical map and
    an identical repair log.
    """
    report = ParseReport()
    doc = None
    try:
        candidate = json.loads(text)
        if isinstance(candidate, dict):
            doc = candidate
    except ValueError:
        doc = None
    if doc is None:
        repaired = _strip_fences(text, report)
        repaired = _extract_braces(repaired, report)
        repaired = _remove_trailing_commas(repaired, report)
        repaired = _normalize_single_quotes(repaired, report)
        try:
            doc = json.loads(repaired)
        except ValueError as err:
            raise ProbeParseError(f"unrecoverable probe JSON: {err}", text) from err
        if not isinstance(doc, dict):
            raise ProbeParseError("probe JSON is not an object", text)

    components = []
    for raw in doc.get("components", []) or []:
        comp = _as_component(raw, report)
        if comp is not None:
            components.append(comp)
    components = _merge_components(components, report)

    invariants = []
    for raw in doc.get("invariants", []) or []:
        inv = _as_invariant(raw, report)
        if inv is not None:
            invariants.append(inv)

    unexplored_raw = doc.get("unexplored", []) or []
    if not isinstance(unexplored_raw, list):
        unexplored_raw = [unexplored_raw]
    unexplored = [str(item) for item in unexplored_raw]

    report.success = True
    cmap = CognitiveMap(
        components=components,
        invariants=invariants,
        unexplored=unexplored,
        probe_step=probe_step,
    )
    return cmap, report


# ---------------------------------------------------------------------------
# Derived views
# ---------------------------------------------------------------------------

def extract_edges(cmap: CognitiveMap) -> set[tuple[str, str, str]]:
    """Flatten component edges into deduplicated (src, dst, type) triples.

    ``dst`` strings are kept as written (beyond parse-time path
    normalization); judging granularity is the scorer's job.
    """
    triples: set[tuple[str, str, str]] = set()
    for comp in cmap.components:
        for dst, edge_type, _confidence in comp.edges:
            triples.add((comp.path, dst, edge_type))
    return triples


def edge_confidences(cmap: CognitiveMap) -> list[tuple[tuple[str, str, str], float]]:
    """One (triple, confidence) pair per distinct predicted edge.

    The first occurrence of a duplicated triple wins, so the output is
    deterministic for a fixed map.
    """
    seen: set[tuple[str, str, str]] = set()
    out: list[tuple[tuple[str, str, str], float]] = []
    for comp in cmap.components:
        for dst, edge_type, confidence in comp.edges:
            triple = (comp.path, dst, edge_type)
            if triple in seen:
                continue
            seen.add(triple)
            out.append((triple, confidence))
    return out


def diff_maps(prev: CognitiveMap, next_map: CognitiveMap, gt: GroundTruth) -> dict[str, int]:
    """Probe-to-probe stability: correct-edge churn and component loss.

    ``lost_correct_edges`` counts ground-truth-correct edges present in
    ``prev`` but absent from ``next_map`` -- the belief-collapse
    signature; ``lost_components`` counts ground-truth components that
    disappeared between the two maps.
    """
    truth = gt.edge_set()
    prev_correct = extract_edges(prev) & truth
    next_correct = extract_edges(next_map) & truth
    known_paths = set(gt.module_paths())
    prev_components = set(prev.component_paths()) & known_paths
    next_components = set(next_map.component_paths())
    return {
        "lost_correct_edges": len(prev_correct - next_correct),
        "gained_correct_edges": len(next_correct - prev_correct),
        "lost_components": len(prev_components - next_components),
    }
