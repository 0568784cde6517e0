"""Budgeted partial-observability interface over a generated codebase.

Agents interact through five actions: LIST a directory, OPEN a file,
SEARCH for a literal substring, INSPECT a top-level symbol, or DONE.
Every action except DONE costs one unit of budget, including actions
that miss (a NOT_FOUND observation is a wasted action, not a crash).
Belief probes are scheduled every ``probe_interval`` costed actions and
never touch the budget.
"""

from __future__ import annotations

import ast
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .codegen import RenderedCodebase

LIST = "LIST"
OPEN = "OPEN"
SEARCH = "SEARCH"
INSPECT = "INSPECT"
DONE = "DONE"
INVALID = "INVALID"
NOT_FOUND = "NOT_FOUND"

COSTED_KINDS = (LIST, OPEN, SEARCH, INSPECT, INVALID)

DEFAULT_BUDGET = 20
DEFAULT_PROBE_INTERVAL = 3


class SessionError(RuntimeError):
    """An action was attempted that the session state does not allow."""


@dataclass(frozen=True)
class Action:
    kind: str
    arg: str = ""
    symbol: str = ""

    def render(self) -> str:
        if self.kind == INSPECT:
            return f"{self.kind}({self.arg}, {self.symbol})"
        if self.kind == DONE:
            return "DONE()"
        return f"{self.kind}({self.arg})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "arg": self.arg, "symbol": self.symbol}

    @classmethod
    def from_dict(cls, doc: dict) -> "Action":
        return cls(kind=doc["kind"], arg=doc.get("arg", ""), symbol=doc.get("symbol", ""))


@dataclass(frozen=True)
class Observation:
    kind: str  # action kind on success, NOT_FOUND on a miss, DONE on termination
    payload: str
    budget_remaining: int

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload, "budget_remaining": self.budget_remaining}


class Codebase:
    """Read-only view of one generated tree, keyed by tree-relative path."""

    def __init__(self, root: str, files: dict[str, str]):
        self.root = root
        self.files = dict(sorted(files.items()))
        self._dirs: set[str] = set()
        for path in self.files:
            parts = path.split("/")
            for depth in range(1, len(parts)):
                self._dirs.add("/".join(parts[:depth]))

    @classmethod
    def from_rendered(cls, rendered: RenderedCodebase) -> "Codebase":
        return cls(rendered.root, rendered.files)

    @classmethod
    def from_dir(cls, tree_dir: str | Path) -> "Codebase":
        tree = Path(tree_dir)
        files: dict[str, str] = {}
        for path in sorted(tree.rglob("*")):
            if path.is_dir() or "__pycache__" in path.parts:
                continue
            files[path.relative_to(tree).as_posix()] = path.read_text(encoding="utf-8")
        return cls(tree.name, files)

    def content_hash(self) -> str:
        digest = hashlib.sha256()
        for path, text in self.files.items():
            digest.update(path.encode("utf-8"))
            digest.update(b"\x00")
            digest.update(text.encode("utf-8"))
            digest.update(b"\x00")
        return digest.hexdigest()

    def has_file(self, path: str) -> bool:
        return path in self.files

    def has_dir(self, path: str) -> bool:
        return path == "" or path in self._dirs

    def directories(self) -> list[str]:
        return sorted(self._dirs)

    def read(self, path: str) -> str:
        return self.files[path]

    def list_dir(self, directory: str) -> list[str]:
        """Immediate children of ``directory``: file names, dir names with '/'."""
        prefix = f"{directory}/" if directory else ""
        names: set[str] = set()
        for path in self.files:
            if not path.startswith(prefix):
                continue
            rest = path[len(prefix):]
            if "/" in rest:
                names.add(rest.split("/", 1)[0] + "/")
            else:
                names.add(rest)
        return sorted(names)


def normalize_path(path: str) -> str:
    path = path.strip().replace("\\", "/")
    while path.startswith("./"):
        path = path[2:]
    return path.strip("/").strip()


def search(codebase: Codebase, query: str) -> list[tuple[str, int]]:
    """Case-sensitive literal substring match; (path, 1-based line) pairs.

    Queries spanning multiple lines never match: the scan is per line.
    """
    hits: list[tuple[str, int]] = []
    for path, text in codebase.files.items():
        for lineno, line in enumerate(text.splitlines(), start=1):
            if query in line:
                hits.append((path, lineno))
    return hits


def inspect(codebase: Codebase, file: str, symbol: str) -> str | None:
    """Signature line(s) plus docstring of a top-level def/class; no body.

    Returns None when the symbol is not a top-level function or class of
    the file (nested symbols are deliberately not inspectable).
    """
    try:
        tree = ast.parse(codebase.read(file))
    except (KeyError, SyntaxError):
        return None
    lines = codebase.read(file).splitlines()
    for node in tree.body:
        if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            continue
        if node.name != symbol:
            continue
        body_start = node.body[0].lineno
        header_end = body_start - 1 if body_start > node.lineno else node.lineno
        header = "\n".join(lines[node.lineno - 1:header_end]).rstrip()
        docstring = ast.get_docstring(node)
        if docstring:
            return f"{header}\n\n{docstring}"
        return header
    return None


@dataclass
class Session:
    """Budgeted exploration state over one codebase (single-owner)."""

    codebase: Codebase
    budget: int = DEFAULT_BUDGET
    probe_interval: int = DEFAULT_PROBE_INTERVAL
    actions_taken: int = 0
    invalid_actions: int = 0
    terminated: bool = False
    opened: set[str] = field(default_factory=set)
    log: list[tuple[Action, Observation]] = field(default_factory=list)
    probed_counts: set[int] = field(default_factory=set)

    @property
    def budget_remaining(self) -> int:
        return self.budget - self.actions_taken

    def opened_count(self) -> int:
        return len(self.opened)


def probe_due(session: Session) -> bool:
    """True when a scheduled belief probe is owed at the current count."""
    n = session.actions_taken
    if n <= 0 or n % session.probe_interval != 0:
        return False
    return n not in session.probed_counts


def record_probe(session: Session) -> None:
    session.probed_counts.add(session.actions_taken)


def step(session: Session, action: Action) -> Observation:
    """Apply one action; returns the observation with post-action budget."""
    if session.terminated:
        raise SessionError("session already terminated")
    if action.kind == DONE:
        obs = Observation(DONE, "session terminated", session.budget_remaining)
        session.terminated = True
        session.log.append((action, obs))
        return obs
    if action.kind not in COSTED_KINDS:
        raise SessionError(f"unknown action kind {action.kind!r}")
    if session.budget_remaining <= 0:
        raise SessionError("budget exhausted; only DONE is accepted")

    session.actions_taken += 1
    remaining = session.budget_remaining

    if action.kind == INVALID:
        session.invalid_actions += 1
        obs = Observation(NOT_FOUND, f"NOT_FOUND: unrecognized action {action.arg!r}", remaining)
    elif action.kind == LIST:
        target = normalize_path(action.arg)
        if session.codebase.has_dir(target):
            obs = Observation(LIST, "\n".join(session.codebase.list_dir(target)), remaining)
        else:
            obs = Observation(NOT_FOUND, f"NOT_FOUND: no directory {action.arg!r}", remaining)
    elif action.kind == OPEN:
        target = normalize_path(action.arg)
        if session.codebase.has_file(target):
            session.opened.add(target)
            obs = Observation(OPEN, session.codebase.read(target), remaining)
        else:
            obs = Observation(NOT_FOUND, f"NOT_FOUND: no file {action.arg!r}", remaining)
    elif action.kind == SEARCH:
        if not action.arg:
            obs = Observation(NOT_FOUND, "NOT_FOUND: empty search query", remaining)
        else:
            hits = search(session.codebase, action.arg)
            obs = Observation(SEARCH, "\n".join(f"{path}:{line}" for path, line in hits), remaining)
    else:  # INSPECT
        target = normalize_path(action.arg)
        if not session.codebase.has_file(target):
            obs = Observation(NOT_FOUND, f"NOT_FOUND: no file {action.arg!r}", remaining)
        else:
            text = inspect(session.codebase, target, action.symbol)
            if text is None:
                obs = Observation(
                    NOT_FOUND,
                    f"NOT_FOUND: no top-level symbol {action.symbol!r} in {action.arg!r}",
                    remaining,
                )
            else:
                obs = Observation(INSPECT, text, remaining)

    session.log.append((action, obs))
    return obs
