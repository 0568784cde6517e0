"""Corpus certification: runtime probe plus static architecture checks.

Each corpus is probed in a separate interpreter process started in an
isolated working directory with bytecode writing disabled, so checking
neither leaks modules across corpora nor touches the corpus on disk.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

PROBE_TIMEOUT_SECONDS = 60


@dataclass
class CheckFailure:
    check: str
    message: str

    def to_dict(self) -> dict:
        return {"check": self.check, "message": self.message}


@dataclass
class CheckResult:
    seed: int
    passed: bool = False
    stages_loaded: int = 0
    failures: list[CheckFailure] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "stages_loaded": self.stages_loaded,
            "failures": [f.to_dict() for f in self.failures],
        }


def tree_hash(tree: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(tree.rglob("*")):
        if path.is_dir() or "__pycache__" in path.parts:
            continue
        digest.update(path.relative_to(tree).as_posix().encode("utf-8"))
        digest.update(b"\x00")
        digest.update(path.read_bytes())
        digest.update(b"\x00")
    return digest.hexdigest()


def locate_tree(corpus_dir: Path) -> Path:
    trees = [p for p in corpus_dir.iterdir() if p.is_dir() and p.name != "__pycache__"]
    if len(trees) != 1:
        raise FileNotFoundError(
            f"{corpus_dir} must contain exactly one corpus tree, found {len(trees)}"
        )
    return trees[0]


def read_seed(corpus_dir: Path) -> int:
    manifest_path = corpus_dir / "ground_truth.json"
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
        return int(doc["manifest"]["seed"])
    except (OSError, ValueError, KeyError):
        return -1


def static_stage_isolation(tree: Path) -> list[CheckFailure]:
    """No stage file may import another stage file (static scan)."""
    failures = []
    root = tree.name
    pattern = re.compile(rf"^\s*(?:from|import)\s+{re.escape(root)}\.stages\.")
    stages_dir = tree / "stages"
    if not stages_dir.is_dir():
        return [CheckFailure("stage-isolation", "corpus has no stages/ directory")]
    for path in sorted(stages_dir.glob("mod_*.py")):
        for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if pattern.match(line):
                failures.append(CheckFailure(
                    "stage-isolation",
                    f"{path.relative_to(tree)}:{number} imports a sibling stage",
                ))
    return failures


def _run_probe(tree: Path) -> dict:
    env = dict(os.environ)
    env["PYTHONDONTWRITEBYTECODE"] = "1"
    with tempfile.TemporaryDirectory(prefix="corpus-probe-") as workdir:
        proc = subprocess.run(
            [sys.executable, "-m", "corpus_checker.probe", str(tree)],
            capture_output=True, text=True, cwd=workdir, env=env,
            timeout=PROBE_TIMEOUT_SECONDS,
        )
    if proc.returncode != 0 or not proc.stdout.strip():
        return {"error": f"probe process failed (rc={proc.returncode}): "
                         f"{proc.stderr.strip()[-300:]}"}
    try:
        return json.loads(proc.stdout)
    except ValueError:
        return {"error": f"probe emitted invalid JSON: {proc.stdout[:200]!r}"}


def check_corpus(corpus_dir: str | Path) -> CheckResult:
    """Certify one corpus directory (tree plus sibling ground_truth.json)."""
    corpus_path = Path(corpus_dir)
    result = CheckResult(seed=read_seed(corpus_path))
    try:
        tree = locate_tree(corpus_path)
    except FileNotFoundError as err:
        result.failures.append(CheckFailure("layout", str(err)))
        return result

    before = tree_hash(tree)
    probe = _run_probe(tree)
    result.stages_loaded = int(probe.get("stages_loaded", 0))

    if probe.get("error"):
        step = probe.get("failed_step", "probe")
        result.failures.append(CheckFailure(step or "probe", probe["error"]))
    else:
        if not probe.get("imported"):
            result.failures.append(CheckFailure("import-package", "package root failed to import"))
        if not probe.get("registry_ok"):
            result.failures.append(CheckFailure(
                "registry-load",
                f"registry loaded {probe.get('stages_loaded')} of "
                f"{probe.get('config_stages')} configured stages",
            ))
        if not probe.get("pipeline_ran") or not probe.get("records_out"):
            result.failures.append(CheckFailure(
                "pipeline-run",
                f"end-to-end run produced {probe.get('records_out', 0)} records",
            ))
        if not probe.get("smoke_ok"):
            result.failures.append(CheckFailure("smoke-tests", "planted test suite failed"))

    result.failures.extend(static_stage_isolation(tree))

    after = tree_hash(tree)
    if after != before:
        result.failures.append(CheckFailure("read-only", "corpus tree changed during checking"))

    result.passed = not result.failures
    return result
