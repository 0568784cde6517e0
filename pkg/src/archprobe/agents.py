"""Rule-based exploration baselines and the canned offline mock agent.

All baselines build their belief maps from what they actually observed:
AST-parsed import statements of opened files, plus (for the
config-aware strategy) component references parsed out of the config
document.  Their probe responses are rendered straight into the probe
JSON schema, so they always parse with zero repairs.  Given the same
codebase and seed they are fully deterministic.
"""

from __future__ import annotations

import ast
import json
import random
from dataclasses import dataclass, field

from .environment import (
    DONE,
    INSPECT,
    LIST,
    OPEN,
    SEARCH,
    Action,
    Codebase,
    Observation,
    Session,
)
from .worldmodel import EdgeType, GroundTruth

Triple = tuple[str, str, str]


# ---------------------------------------------------------------------------
# Import scanning
# ---------------------------------------------------------------------------

class ImportResolver:
    """Maps dotted module names to tree-relative file paths."""

    def __init__(self, root: str, paths: list[str] | set[str]):
        self.root = root
        self.by_dotted: dict[str, str] = {}
        for path in paths:
            if not path.endswith(".py"):
                continue
            if path.endswith("/__init__.py"):
                dotted = path[: -len("/__init__.py")].replace("/", ".")
            else:
                dotted = path[:-3].replace("/", ".")
            self.by_dotted[dotted] = path
            self.by_dotted[f"{root}.{dotted}"] = path

    def resolve(self, dotted: str) -> str | None:
        return self.by_dotted.get(dotted)


def import_scan(text: str, resolver: ImportResolver) -> tuple[list[tuple[str, str]], int]:
    """Intra-repo import targets of one source file.

    Parses the module AST (comments and string literals therefore never
    contribute) and resolves ``import X.Y`` and ``from X.Y import Z``
    forms against the known layout; ``Z`` may itself be a submodule.
    Returns (edges, unresolved_count) where each edge is
    (dst path, "IMPORTS"); names that resolve nowhere in the repo are
    skipped and counted.
    """
    try:
        tree = ast.parse(text)
    except SyntaxError:
        return [], 0
    targets: list[str] = []
    unresolved = 0
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                path = resolver.resolve(alias.name)
                if path is not None:
                    targets.append(path)
                else:
                    unresolved += 1
        elif isinstance(node, ast.ImportFrom):
            if node.level:  # relative imports are not emitted by the generator
                unresolved += len(node.names)
                continue
            module = node.module or ""
            module_path = resolver.resolve(module)
            for alias in node.names:
                child = resolver.resolve(f"{module}.{alias.name}") if module else None
                if child is not None:
                    targets.append(child)
                elif module_path is not None:
                    targets.append(module_path)
                else:
                    unresolved += 1
    seen: set[str] = set()
    edges: list[tuple[str, str]] = []
    for path in targets:
        if path in seen:
            continue
        seen.add(path)
        edges.append((path, EdgeType.IMPORTS.value))
    return edges, unresolved


def top_level_exports(text: str) -> list[tuple[str, str]]:
    """(symbol, one-line signature) for top-level defs and classes."""
    try:
        tree = ast.parse(text)
    except SyntaxError:
        return []
    exports = []
    lines = text.splitlines()
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            exports.append((node.name, lines[node.lineno - 1].strip().rstrip(":")))
    return exports


# ---------------------------------------------------------------------------
# Probe rendering (schema-native JSON)
# ---------------------------------------------------------------------------

def render_probe_json(components: list[dict], invariants: list[dict], unexplored: list[str]) -> str:
    return json.dumps(
        {"components": components, "invariants": invariants, "unexplored": unexplored},
        indent=1,
    )


def _component(path: str, status: str, purpose: str = "",
               exports: list[tuple[str, str]] | tuple = (),
               edges: list[tuple[str, str, float]] | tuple = ()) -> dict:
    return {
        "path": path,
        "status": status,
        "purpose": purpose,
        "exports": [{"symbol": s, "signature": sig} for s, sig in exports],
        "edges": [{"dst": d, "type": t, "confidence": c} for d, t, c in edges],
    }


# ---------------------------------------------------------------------------
# Policy interface
# ---------------------------------------------------------------------------

class AgentPolicy:
    """Behavioral interface driven by the condition runners.

    ``next_action`` is consulted only under the active condition;
    ``observe`` receives every observation under every condition;
    ``on_probe`` must return probe-response text.
    """

    name = "agent"

    def begin(self, session: Session) -> None:  # pragma: no cover - default no-op
        pass

    def next_action(self, session: Session) -> Action:
        raise NotImplementedError

    def observe(self, action: Action, obs: Observation) -> None:  # pragma: no cover
        pass

    def on_probe(self, session: Session) -> str:
        raise NotImplementedError


class _ScanningPolicy(AgentPolicy):
    """Shared bookkeeping: directory listings, opened files, import edges."""

    def __init__(self):
        self.resolver: ImportResolver | None = None
        self.listed: list[str] = []          # directories already listed
        self.pending_dirs: list[str] = []    # discovered, not yet listed
        self.discovered_files: list[str] = []
        self.opened: dict[str, str] = {}
        self.edges: list[Triple] = []
        self.unresolved_imports = 0

    def begin(self, session: Session) -> None:
        self.resolver = ImportResolver(session.codebase.root, list(session.codebase.files))
        self.listed = []
        self.pending_dirs = [""]
        self.discovered_files = []
        self.opened = {}
        self.edges = []
        self.unresolved_imports = 0

    def _note_edge(self, triple: Triple) -> None:
        if triple not in self.edges:
            self.edges.append(triple)

    def observe(self, action: Action, obs: Observation) -> None:
        if obs.kind == LIST:
            directory = action.arg.strip("/")
            if directory not in self.listed:
                self.listed.append(directory)
            for entry in obs.payload.splitlines():
                full = f"{directory}/{entry}" if directory else entry
                if entry.endswith("/"):
                    name = full.rstrip("/")
                    if name not in self.listed and name not in self.pending_dirs:
                        self.pending_dirs.append(name)
                elif full not in self.discovered_files:
                    self.discovered_files.append(full)
        elif obs.kind == OPEN:
            path = action.arg
            self.opened[path] = obs.payload
            if path.endswith(".py") and self.resolver is not None:
                edges, skipped = import_scan(obs.payload, self.resolver)
                self.unresolved_imports += skipped
                for dst, type_name in edges:
                    if dst != path:
                        self._note_edge((path, dst, type_name))

    def _render_map(self) -> str:
        by_src: dict[str, list[tuple[str, str, float]]] = {}
        for src, dst, type_name in self.edges:
            by_src.setdefault(src, []).append((dst, type_name, 1.0))
        components = []
        mentioned = set(self.opened) | set(by_src)
        for path in sorted(mentioned):
            status = "observed" if path in self.opened else "inferred"
            exports = top_level_exports(self.opened[path]) if path in self.opened else []
            components.append(_component(path, status, exports=exports, edges=by_src.get(path, [])))
        unexplored = sorted(set(self.discovered_files) - set(self.opened))
        return render_probe_json(components, [], unexplored)

    def on_probe(self, session: Session) -> str:
        return self._render_map()


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

class OraclePolicy(AgentPolicy):
    """Upper bound: reports the ground truth directly and stops."""

    name = "oracle"

    def __init__(self, gt: GroundTruth):
        self.gt = gt

    def next_action(self, session: Session) -> Action:
        return Action(DONE)

    def on_probe(self, session: Session) -> str:
        by_src: dict[str, list[tuple[str, str, float]]] = {}
        for edge in self.gt.edges:
            by_src.setdefault(edge.src, []).append((edge.dst, edge.type.value, 1.0))
        components = [
            _component(m.path, "observed", m.purpose, list(m.exports), by_src.get(m.path, []))
            for m in self.gt.modules
        ]
        invariants = [
            {
                "type": c.type.value, "src": c.src, "dst": c.dst, "via": c.via,
                "pattern": c.pattern,
                "evidence": [f"{ev.kind}:{ev.locator}" for ev in c.evidence],
            }
            for c in self.gt.constraints
        ]
        return render_probe_json(components, invariants, [])


class RandomPolicy(_ScanningPolicy):
    """Lists directories as discovered, then opens unopened files uniformly."""

    name = "random"

    def __init__(self, seed: int = 0):
        super().__init__()
        self.seed = seed
        self.rng = random.Random(seed)

    def begin(self, session: Session) -> None:
        super().begin(session)
        self.rng = random.Random(self.seed)

    def next_action(self, session: Session) -> Action:
        if self.pending_dirs:
            return Action(LIST, self.pending_dirs.pop(0))
        unopened = sorted(f for f in self.discovered_files if f not in self.opened)
        if not unopened:
            return Action(DONE)
        return Action(OPEN, self.rng.choice(unopened))


class BfsImportPolicy(_ScanningPolicy):
    """Opens entry files, then follows import targets breadth-first."""

    name = "bfs-import"

    ENTRY_NAMES = ("cli.py", "runner.py")

    def __init__(self):
        super().__init__()
        self.queue: list[str] = []
        self.enqueued: set[str] = set()

    def begin(self, session: Session) -> None:
        super().begin(session)
        self.queue = []
        self.enqueued = set()

    def observe(self, action: Action, obs: Observation) -> None:
        before = len(self.edges)
        super().observe(action, obs)
        if obs.kind == LIST and action.arg.strip("/") == "":
            for name in self.ENTRY_NAMES:
                if name in self.discovered_files and name not in self.enqueued:
                    self.queue.append(name)
                    self.enqueued.add(name)
        for src, dst, _type in self.edges[before:]:
            if dst not in self.enqueued and dst not in self.opened:
                self.queue.append(dst)
                self.enqueued.add(dst)

    def next_action(self, session: Session) -> Action:
        if "" not in self.listed and not self.queue:
            return Action(LIST, "")
        while self.queue:
            path = self.queue.pop(0)
            if path not in self.opened:
                return Action(OPEN, path)
        return Action(DONE)


class ConfigAwarePolicy(_ScanningPolicy):
    """Lists everything, reads config/registry files, follows references.

    Phase 1 lists the root and every sub-directory; phase 2 opens files
    whose names mark them as configuration or registry machinery and
    parses component references out of the config document (these become
    REGISTRY_WIRES beliefs); phase 3 opens referenced components and
    then follows scanned imports breadth-first until the budget runs
    out.
    """

    name = "config-aware"

    def __init__(self):
        super().__init__()
        self.config_queue: list[str] = []
        self.follow_queue: list[str] = []
        self.enqueued: set[str] = set()
        self.config_parsed = False

    def begin(self, session: Session) -> None:
        super().begin(session)
        self.config_queue = []
        self.follow_queue = []
        self.enqueued = set()
        self.config_parsed = False

    @staticmethod
    def _is_config_file(path: str) -> bool:
        name = path.rsplit("/", 1)[-1].lower()
        return name.endswith(".json") or "config" in name or "registry" in name

    def _registry_path(self) -> str | None:
        candidates = [f for f in self.discovered_files if "registry" in f.rsplit("/", 1)[-1].lower()]
        return sorted(candidates)[0] if candidates else None

    def _reference_path(self, name: str) -> str | None:
        matches = [f for f in self.discovered_files if f.rsplit("/", 1)[-1] == f"{name}.py"]
        return sorted(matches)[0] if len(matches) >= 1 else None

    def _parse_config_doc(self, text: str) -> None:
        try:
            doc = json.loads(text)
        except ValueError:
            return
        if not isinstance(doc, dict) or not isinstance(doc.get("stages"), list):
            return
        self.config_parsed = True
        registry = self._registry_path()
        referenced: list[str] = [str(n) for n in doc["stages"]]
        referenced += [str(n) for n in doc.get("middleware", []) if isinstance(n, str)]
        adapters = doc.get("adapters", {})
        if not isinstance(adapters, dict):
            adapters = {}
        referenced += [str(n) for n in adapters.values()]
        for name in referenced:
            target = self._reference_path(name)
            if target is None:
                continue
            if registry is not None:
                self._note_edge((registry, target, EdgeType.REGISTRY_WIRES.value))
            if target not in self.enqueued and target not in self.opened:
                self.follow_queue.append(target)
                self.enqueued.add(target)
        for stage_name, adapter_name in adapters.items():
            adapter_path = self._reference_path(str(adapter_name))
            stage_path = self._reference_path(str(stage_name))
            if adapter_path is not None and stage_path is not None:
                self._note_edge((adapter_path, stage_path, EdgeType.REGISTRY_WIRES.value))

    def observe(self, action: Action, obs: Observation) -> None:
        before_files = len(self.discovered_files)
        before_edges = len(self.edges)
        super().observe(action, obs)
        if obs.kind == LIST:
            new_files = self.discovered_files[before_files:]
            for path in sorted(new_files, key=lambda p: (not p.endswith(".json"), p)):
                if self._is_config_file(path) and path not in self.enqueued:
                    self.config_queue.append(path)
                    self.enqueued.add(path)
        elif obs.kind == OPEN:
            if action.arg.endswith(".json"):
                self._parse_config_doc(obs.payload)
            for _src, dst, _type in self.edges[before_edges:]:
                if dst not in self.enqueued and dst not in self.opened:
                    self.follow_queue.append(dst)
                    self.enqueued.add(dst)

    def next_action(self, session: Session) -> Action:
        if self.pending_dirs:
            return Action(LIST, self.pending_dirs.pop(0))
        while self.config_queue:
            path = self.config_queue.pop(0)
            if path not in self.opened:
                return Action(OPEN, path)
        while self.follow_queue:
            path = self.follow_queue.pop(0)
            if path not in self.opened:
                return Action(OPEN, path)
        return Action(DONE)


class MockAgent(AgentPolicy):
    """Canned action and probe script; exercises the pipeline offline."""

    name = "mock"

    def __init__(self, actions: list[Action], probe_texts: list[str]):
        self.script = list(actions)
        self.probe_texts = list(probe_texts)
        self._action_index = 0
        self._probe_index = 0

    def begin(self, session: Session) -> None:
        self._action_index = 0
        self._probe_index = 0

    def next_action(self, session: Session) -> Action:
        if self._action_index >= len(self.script):
            return Action(DONE)
        action = self.script[self._action_index]
        self._action_index += 1
        return action

    def on_probe(self, session: Session) -> str:
        if not self.probe_texts:
            return render_probe_json([], [], [])
        text = self.probe_texts[min(self._probe_index, len(self.probe_texts) - 1)]
        self._probe_index += 1
        return text


def default_mock_agent() -> MockAgent:
    """The shipped fixture script: a short exploration with messy probes."""
    actions = [
        Action(LIST, ""),
        Action(OPEN, "registry.py"),
        Action(SEARCH, "StageBase"),
        Action(OPEN, "pipeline_config.json"),
        Action(INSPECT, "base.py", "StageBase"),
        Action(OPEN, "runner.py"),
        Action(OPEN, "no/such/file.py"),
    ]
    probes = [
        '```json\n{"components": [{"path": "registry.py", "status": "observed", "purpose": "loads stages",'
        ' "exports": [], "edges": [{"dst": "config.py", "type": "IMPORTS", "confidence": "high"},]}],'
        ' "invariants": [], "unexplored": ["stages/"]}\n```',
        "Here is my current belief:\n{'components': [{'path': 'registry.py', 'status': 'observed',"
        " 'purpose': 'loads stages', 'exports': [], 'edges': [{'dst': 'base.py', 'type': 'IMPORTS',"
        " 'confidence': 'medium'}]}], 'invariants': [], 'unexplored': []}",
        '{"components": [{"path": "runner.py", "status": "observed", "purpose": "orchestrator",'
        ' "exports": [], "edges": [{"dst": "registry.py", "type": "IMPORTS", "confidence": 0.9}]}],'
        ' "invariants": [{"type": "INTERFACE", "src": "runner.py", "via": "StageBase",'
        ' "pattern": "stages via interface"}], "unexplored": []}',
    ]
    return MockAgent(actions, probes)


# ---------------------------------------------------------------------------
# Registry of baseline constructors
# ---------------------------------------------------------------------------

def make_baseline(name: str, gt: GroundTruth | None = None, seed: int = 0,
                  codebase: Codebase | None = None) -> AgentPolicy:
    if name == "oracle":
        if gt is None:
            raise ValueError("oracle baseline requires the ground truth")
        return OraclePolicy(gt)
    if name == "random":
        return RandomPolicy(seed=seed)
    if name == "bfs-import":
        return BfsImportPolicy()
    if name == "config-aware":
        return ConfigAwarePolicy()
    if name == "mock":
        return default_mock_agent()
    raise ValueError(f"unknown baseline {name!r}")

BASELINE_NAMES = ("oracle", "config-aware", "random", "bfs-import")
