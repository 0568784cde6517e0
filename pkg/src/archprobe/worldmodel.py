"""Canonical data model for ground-truth codebase architecture.

A generated codebase is described by a :class:`GroundTruth`: the module
set (vertices), typed dependency edges, and planted constraints.  The
same structures are shared by the generator, the exploration
environment, the agents, and the scoring code, and round-trip through
``ground_truth.json``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1

SOURCE_EXTENSIONS = (".py",)


class EdgeType(str, enum.Enum):
    """Discovery channel of a dependency edge."""

    IMPORTS = "IMPORTS"
    CALLS_API = "CALLS_API"
    DATA_FLOWS_TO = "DATA_FLOWS_TO"
    REGISTRY_WIRES = "REGISTRY_WIRES"


EDGE_TYPE_NAMES = tuple(e.value for e in EdgeType)


class ConstraintType(str, enum.Enum):
    """Category of a planted architectural constraint."""

    BOUNDARY = "BOUNDARY"
    DATAFLOW = "DATAFLOW"
    INTERFACE = "INTERFACE"
    INVARIANT = "INVARIANT"
    PURPOSE = "PURPOSE"


CONSTRAINT_TYPE_NAMES = tuple(c.value for c in ConstraintType)

MODULE_ROLES = (
    "infrastructure",
    "stage",
    "adapter",
    "middleware",
    "utility",
    "distractor",
    "orchestrator",
    "config-data",
    "test",
)

EVIDENCE_KINDS = ("test", "structure", "doc")


class GroundTruthError(ValueError):
    """A ground-truth document violated the schema or its invariants.

    ``line`` and ``fieldname`` locate the offending content when known.
    """

    def __init__(self, message: str, line: int | None = None, fieldname: str | None = None):
        super().__init__(message)
        self.line = line
        self.fieldname = fieldname


@dataclass(frozen=True)
class DepEdge:
    """One typed, file-level dependency edge."""

    src: str
    dst: str
    type: EdgeType

    def as_triple(self) -> tuple[str, str, str]:
        return (self.src, self.dst, self.type.value)


@dataclass(frozen=True)
class Evidence:
    kind: str  # test | structure | doc
    locator: str


@dataclass(frozen=True)
class Constraint:
    """Planted architectural rule in canonical five-field form.

    ``src``/``dst``/``via`` may be empty strings; ``evidence`` is never
    empty (every constraint is discoverable somewhere in the tree).
    """

    type: ConstraintType
    src: str
    dst: str
    via: str
    pattern: str
    evidence: tuple[Evidence, ...]

    def tuple4(self) -> tuple[str, str, str, str]:
        return (self.type.value, self.src, self.dst, self.via)


@dataclass(frozen=True)
class ModuleSpec:
    """One module (vertex): path, role, purpose, exported contracts."""

    path: str
    role: str
    purpose: str
    exports: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Manifest:
    seed: int
    domain: str
    complexity: str


@dataclass
class GroundTruth:
    manifest: Manifest
    modules: list[ModuleSpec] = field(default_factory=list)
    edges: list[DepEdge] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)

    def module_paths(self) -> list[str]:
        return [m.path for m in self.modules]

    def edge_set(self) -> set[tuple[str, str, str]]:
        return {e.as_triple() for e in self.edges}

    def edges_of_type(self, edge_type: EdgeType | str) -> list[DepEdge]:
        name = EdgeType(edge_type).value
        return [e for e in self.edges if e.type.value == name]

    def module(self, path: str) -> ModuleSpec:
        for m in self.modules:
            if m.path == path:
                return m
        raise KeyError(path)


def validate_ground_truth(gt: GroundTruth) -> None:
    """Check structural invariants; raise GroundTruthError on the first hit."""
    paths = gt.module_paths()
    known = set(paths)
    if len(known) != len(paths):
        dupes = sorted({p for p in paths if paths.count(p) > 1})
        raise GroundTruthError(f"duplicate module paths: {dupes}", fieldname="modules")
    for m in gt.modules:
        if m.role not in MODULE_ROLES:
            raise GroundTruthError(f"module {m.path!r}: unknown role {m.role!r}", fieldname="modules")
        symbols = [s for s, _ in m.exports]
        if len(set(symbols)) != len(symbols):
            raise GroundTruthError(f"module {m.path!r}: duplicate export symbols", fieldname="modules")
    seen: set[tuple[str, str, str]] = set()
    for i, e in enumerate(gt.edges):
        label = f"edge {i} ({e.src} -> {e.dst}, {e.type.value})"
        if e.src == e.dst:
            raise GroundTruthError(f"{label}: self edge", fieldname="edges")
        for endpoint in (e.src, e.dst):
            if not endpoint.endswith(SOURCE_EXTENSIONS):
                raise GroundTruthError(
                    f"{label}: endpoint {endpoint!r} is not a source file", fieldname="edges"
                )
            if endpoint not in known:
                raise GroundTruthError(
                    f"{label}: endpoint {endpoint!r} not in module set", fieldname="edges"
                )
        triple = e.as_triple()
        if triple in seen:
            raise GroundTruthError(f"{label}: duplicate edge", fieldname="edges")
        seen.add(triple)
    for i, c in enumerate(gt.constraints):
        label = f"constraint {i} ({c.type.value})"
        if not c.evidence:
            raise GroundTruthError(f"{label}: empty evidence list", fieldname="constraints")
        for ev in c.evidence:
            if ev.kind not in EVIDENCE_KINDS:
                raise GroundTruthError(f"{label}: unknown evidence kind {ev.kind!r}", fieldname="constraints")
        for endpoint in (c.src, c.dst):
            if endpoint and endpoint not in known:
                raise GroundTruthError(
                    f"{label}: endpoint {endpoint!r} not in module set", fieldname="constraints"
                )


def ground_truth_to_dict(gt: GroundTruth) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "manifest": {
            "seed": gt.manifest.seed,
            "domain": gt.manifest.domain,
            "complexity": gt.manifest.complexity,
        },
        "modules": [
            {
                "path": m.path,
                "role": m.role,
                "purpose": m.purpose,
                "exports": [{"symbol": s, "signature": sig} for s, sig in m.exports],
            }
            for m in gt.modules
        ],
        "edges": [{"src": e.src, "dst": e.dst, "type": e.type.value} for e in gt.edges],
        "constraints": [
            {
                "type": c.type.value,
                "src": c.src,
                "dst": c.dst,
                "via": c.via,
                "pattern": c.pattern,
                "evidence": [{"kind": ev.kind, "locator": ev.locator} for ev in c.evidence],
            }
            for c in gt.constraints
        ],
    }


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise GroundTruthError(f"{context}: missing field {key!r}", fieldname=key)
    return mapping[key]


def ground_truth_from_dict(doc: dict) -> GroundTruth:
    if not isinstance(doc, dict):
        raise GroundTruthError("ground truth document must be a JSON object")
    manifest_doc = _require(doc, "manifest", "document")
    manifest = Manifest(
        seed=int(_require(manifest_doc, "seed", "manifest")),
        domain=str(_require(manifest_doc, "domain", "manifest")),
        complexity=str(_require(manifest_doc, "complexity", "manifest")),
    )
    modules = []
    for i, m in enumerate(_require(doc, "modules", "document")):
        exports = tuple(
            (str(_require(x, "symbol", f"modules[{i}].exports")), str(x.get("signature", "")))
            for x in m.get("exports", [])
        )
        modules.append(
            ModuleSpec(
                path=str(_require(m, "path", f"modules[{i}]")),
                role=str(_require(m, "role", f"modules[{i}]")),
                purpose=str(m.get("purpose", "")),
                exports=exports,
            )
        )
    edges = []
    for i, e in enumerate(_require(doc, "edges", "document")):
        type_name = str(_require(e, "type", f"edges[{i}]"))
        if type_name not in EDGE_TYPE_NAMES:
            raise GroundTruthError(f"edges[{i}]: unknown edge type {type_name!r}", fieldname="edges")
        edges.append(
            DepEdge(
                src=str(_require(e, "src", f"edges[{i}]")),
                dst=str(_require(e, "dst", f"edges[{i}]")),
                type=EdgeType(type_name),
            )
        )
    constraints = []
    for i, c in enumerate(_require(doc, "constraints", "document")):
        type_name = str(_require(c, "type", f"constraints[{i}]"))
        if type_name not in CONSTRAINT_TYPE_NAMES:
            raise GroundTruthError(
                f"constraints[{i}]: unknown constraint type {type_name!r}", fieldname="constraints"
            )
        evidence = tuple(
            Evidence(kind=str(_require(ev, "kind", f"constraints[{i}].evidence")), locator=str(ev.get("locator", "")))
            for ev in c.get("evidence", [])
        )
        constraints.append(
            Constraint(
                type=ConstraintType(type_name),
                src=str(c.get("src", "")),
                dst=str(c.get("dst", "")),
                via=str(c.get("via", "")),
                pattern=str(c.get("pattern", "")),
                evidence=evidence,
            )
        )
    gt = GroundTruth(manifest=manifest, modules=modules, edges=edges, constraints=constraints)
    validate_ground_truth(gt)
    return gt


def save_ground_truth(gt: GroundTruth, path: str | Path) -> None:
    validate_ground_truth(gt)
    text = json.dumps(ground_truth_to_dict(gt), indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_ground_truth(path: str | Path) -> GroundTruth:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as err:
        raise GroundTruthError(f"malformed ground truth JSON: {err.msg}", line=err.lineno) from err
    return ground_truth_from_dict(doc)


def connectivity_rank(gt: GroundTruth) -> list[str]:
    """Module paths ordered by total degree (all edge types), descending.

    Ties break lexicographically, so the ordering is a deterministic
    permutation of the module set.  Zero-degree modules (which include
    any unreferenced config-data and test files) sort to the tail.
    """
    degree = {m.path: 0 for m in gt.modules}
    for e in gt.edges:
        degree[e.src] += 1
        degree[e.dst] += 1
    return sorted(degree, key=lambda p: (-degree[p], p))
