"""Deterministic generator for pipeline-architecture benchmark codebases.

``generate(seed, complexity)`` renders a small but runnable Python
package (stages wired through a config-driven registry, adapters,
middleware, utilities, legacy distractors, a smoke test) together with
the matching :class:`~archprobe.worldmodel.GroundTruth`.  Everything is
derived from one seeded plan, so the rendered import statements, call
sites, config entries, and orchestrator chain realize exactly the
edges recorded in the ground truth.

Anti-triviality properties of the output:

* stage files carry neutral ``mod_<letter>.py`` names, with the
  letter-to-behavior mapping shuffled per seed;
* the registry loads stages, adapters, and middleware with importlib
  from names listed in ``pipeline_config.json`` -- no static import of
  any stage module exists anywhere in the tree;
* ``legacy/`` holds distractor modules with no incoming references
  from live code;
* every stage implements the shared abstract base class.
"""

from __future__ import annotations

import json
import random
import textwrap
from dataclasses import dataclass, field
from pathlib import Path
from string import Template

from .worldmodel import (
    Constraint,
    ConstraintType,
    DepEdge,
    EdgeType,
    Evidence,
    GroundTruth,
    Manifest,
    ModuleSpec,
    validate_ground_truth,
)

DOMAINS = ("data-etl", "log-processing", "text-processing")
COMPLEXITIES = ("medium",)

ROOT_NAMES = {
    "data-etl": "data_etl",
    "log-processing": "log_processor",
    "text-processing": "text_processor",
}

SUB_PACKAGES = ("stages", "adapters", "middleware", "utils", "legacy")

IMPORTS_FRACTION_BOUNDS = (0.60, 0.72)
CONSTRAINT_COUNT_BOUNDS = (15, 16)
MODULE_COUNT_BOUNDS = (24, 32)


class GenerationError(ValueError):
    """Unknown label or an internally inconsistent generation plan."""


@dataclass
class RenderedCodebase:
    """A generated tree: root package name, file texts, ground truth."""

    root: str
    files: dict[str, str]
    ground_truth: GroundTruth

    def file_paths(self) -> list[str]:
        return sorted(self.files)


# ---------------------------------------------------------------------------
# Stage library
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StageDef:
    key: str
    purpose: str
    core: str  # process() body at 8-space indent, without the final return
    options: tuple[tuple[str, object], ...] = ()
    needs_json: bool = False


def _stage(key, purpose, core, options=(), needs_json=False):
    return StageDef(key=key, purpose=purpose, core=core, options=tuple(options), needs_json=needs_json)


_VALIDATE_CORE = """\
        required = list(self.options.get("required", ["id", "text"]))
        batch = [record for record in batch if require_fields(record, required)]
"""

_SANITIZE_CORE = """\
        required = list(self.options.get("required", ["id", "text"]))
        batch = [record for record in batch if require_fields(record, required)]
        for record in batch:
            text = str(record.data.get("text", ""))
            record.data["text"] = "".join(ch for ch in text if ch.isprintable())
"""

STAGE_LIB: dict[str, tuple[StageDef, ...]] = {
    "data-etl": (
        _stage("validate", "Drops records that are missing required fields.",
               _VALIDATE_CORE, options=(("required", ["id", "text"]),)),
        _stage("normalize", "Collapses whitespace and lowercases record text.", """\
        for record in batch:
            text = str(record.data.get("text", ""))
            record.data["text"] = " ".join(text.split()).lower()
"""),
        _stage("dedupe", "Removes records whose id was already seen in the batch.", """\
        seen = set()
        kept = []
        for record in batch:
            key = str(record.data.get("id", ""))
            if key in seen:
                continue
            seen.add(key)
            kept.append(record)
        batch = kept
"""),
        _stage("enrich", "Adds derived length metadata to each record.", """\
        for record in batch:
            record.data["length"] = len(str(record.data.get("text", "")))
"""),
        _stage("aggregate", "Annotates each record with the running batch total.", """\
        total = sum(len(str(record.data.get("text", ""))) for record in batch)
        for record in batch:
            record.data["batch_total"] = total
"""),
        _stage("partition", "Assigns records to round-robin buckets.", """\
        buckets = int(self.options.get("buckets", 2))
        for index, record in enumerate(batch):
            record.data["bucket"] = index % buckets
""", options=(("buckets", 3),)),
        _stage("encode", "Serializes record text into a JSON blob field.", """\
        for record in batch:
            record.data["blob"] = json.dumps(record.data.get("text", ""))
""", needs_json=True),
        _stage("export", "Marks records as exported for downstream consumers.", """\
        for record in batch:
            record.tags.append("exported")
"""),
    ),
    "log-processing": (
        _stage("sanitize", "Drops malformed entries and strips unprintable characters.",
               _SANITIZE_CORE, options=(("required", ["id", "text"]),)),
        _stage("parse", "Splits raw log text into whitespace-delimited fields.", """\
        for record in batch:
            record.data["fields"] = str(record.data.get("text", "")).split()
"""),
        _stage("filter", "Keeps only entries whose text contains the configured needle.", """\
        needle = str(self.options.get("needle", ""))
        batch = [record for record in batch if needle in str(record.data.get("text", ""))]
""", options=(("needle", ""),)),
        _stage("mask", "Masks digit runs so identifiers never leak downstream.", """\
        for record in batch:
            text = str(record.data.get("text", ""))
            record.data["text"] = "".join("#" if ch.isdigit() else ch for ch in text)
"""),
        _stage("correlate", "Links each entry to the id of the entry preceding it.", """\
        previous = None
        for record in batch:
            record.data["prev_id"] = previous
            previous = str(record.data.get("id", ""))
"""),
        _stage("window", "Keeps only the trailing window of the batch.", """\
        size = int(self.options.get("window", 8))
        batch = batch[-size:]
""", options=(("window", 8),)),
        _stage("rank", "Orders entries by text length and records their rank.", """\
        batch = sorted(batch, key=lambda record: len(str(record.data.get("text", ""))), reverse=True)
        for position, record in enumerate(batch):
            record.data["rank"] = position
"""),
        _stage("archive", "Tags entries as archived at the end of the run.", """\
        for record in batch:
            record.tags.append("archived")
"""),
    ),
    "text-processing": (
        _stage("validate", "Drops documents that are missing required fields.",
               _VALIDATE_CORE, options=(("required", ["id", "text"]),)),
        _stage("tokenize", "Splits document text into a token list.", """\
        for record in batch:
            record.data["tokens"] = str(record.data.get("text", "")).split()
"""),
        _stage("fold", "Casefolds document text for comparison stability.", """\
        for record in batch:
            record.data["text"] = str(record.data.get("text", "")).casefold()
"""),
        _stage("stem", "Applies a crude suffix-stripping stemmer to tokens.", """\
        for record in batch:
            tokens = record.data.get("tokens") or str(record.data.get("text", "")).split()
            record.data["tokens"] = [t[:-3] if t.endswith("ing") else t for t in tokens]
"""),
        _stage("tag", "Labels documents short or long against a length limit.", """\
        limit = int(self.options.get("short_limit", 24))
        for record in batch:
            label = "short" if len(str(record.data.get("text", ""))) <= limit else "long"
            record.tags.append(label)
""", options=(("short_limit", 24),)),
        _stage("score", "Scores documents by token count.", """\
        for record in batch:
            tokens = record.data.get("tokens") or str(record.data.get("text", "")).split()
            record.data["score"] = len(tokens)
"""),
        _stage("summarize", "Builds a five-token summary for each document.", """\
        for record in batch:
            tokens = record.data.get("tokens") or str(record.data.get("text", "")).split()
            record.data["summary"] = " ".join(tokens[:5])
"""),
        _stage("index", "Derives a stable index key from id and text length.", """\
        for record in batch:
            record.data["index_key"] = f"{record.data.get('id', '')}-{len(str(record.data.get('text', '')))}"
"""),
    ),
}

_PLAIN_GUARD = """\
        batch = [record for record in batch if require_fields(record, ["id"])]
"""

_STRICT_GUARD = """\
        kept = []
        for record in batch:
            try:
                require_fields(record, ["id"], strict=True)
            except StageError:
                continue
            kept.append(record)
        batch = kept
"""


# ---------------------------------------------------------------------------
# Plan
# ---------------------------------------------------------------------------

@dataclass
class CorpusPlan:
    seed: int
    domain: str
    complexity: str
    root: str
    version: str
    stage_defs: list[StageDef]           # pipeline (semantic) order
    stage_mods: list[str]                # module names, same order
    adapter_mods: list[str]              # [cache, split]
    middleware_mods: list[str]           # [logging, retry]
    wrapped: dict[str, str]              # stage module -> adapter module
    helper_callers: list[int]            # pipeline positions calling helpers
    strict_callers: list[int]            # subset using the strict/except form
    util_files: list[str]
    legacy_files: list[str]
    options: dict[str, dict]
    call_hints: dict[tuple[str, str], bool]
    flow_hints: dict[tuple[str, str], bool]
    imports: list[tuple[str, str]] = field(default_factory=list)
    calls: list[tuple[str, str]] = field(default_factory=list)
    interface_calls: list[str] = field(default_factory=list)  # srcs calling through the ABC
    flows: list[tuple[str, str]] = field(default_factory=list)
    wires: list[tuple[str, str]] = field(default_factory=list)

    def stage_path(self, mod: str) -> str:
        return f"stages/{mod}.py"


def _build_plan(seed: int, complexity: str, domain: str | None) -> CorpusPlan:
    if complexity not in COMPLEXITIES:
        raise GenerationError(f"unknown complexity {complexity!r}; expected one of {COMPLEXITIES}")
    rng = random.Random(seed)
    if domain is None:
        domain = rng.choice(DOMAINS)
    elif domain not in DOMAINS:
        raise GenerationError(f"unknown domain {domain!r}; expected one of {DOMAINS}")

    pool = STAGE_LIB[domain]
    stage_count = rng.randint(6, 8)
    extra_indices = sorted(rng.sample(range(1, len(pool)), stage_count - 1))
    stage_defs = [pool[0]] + [pool[i] for i in extra_indices]

    letters = [chr(ord("a") + i) for i in range(stage_count + 4)]
    stage_letters = letters[:stage_count]
    adapter_letters = letters[stage_count:stage_count + 2]
    middleware_letters = letters[stage_count + 2:stage_count + 4]

    stage_mods = [f"mod_{x}" for x in rng.sample(stage_letters, stage_count)]
    adapter_mods = [f"mod_{x}" for x in rng.sample(adapter_letters, 2)]
    middleware_mods = [f"mod_{x}" for x in rng.sample(middleware_letters, 2)]

    wrapped_positions = sorted(rng.sample(range(stage_count), 2))
    wrapped = {
        stage_mods[wrapped_positions[0]]: adapter_mods[0],
        stage_mods[wrapped_positions[1]]: adapter_mods[1],
    }

    helper_extra = sorted(rng.sample(range(1, stage_count), stage_count - 3))
    helper_callers = [0] + helper_extra
    strict_callers = sorted(rng.sample(helper_extra, 2 if stage_count == 6 else 3))

    options: dict[str, dict] = {}
    for position, sdef in enumerate(stage_defs):
        opts = dict(sdef.options)
        if "buckets" in opts:
            opts["buckets"] = rng.randint(2, 4)
        if "window" in opts:
            opts["window"] = rng.randint(6, 9)
        if "short_limit" in opts:
            opts["short_limit"] = rng.randint(18, 30)
        if opts:
            options[stage_mods[position]] = opts

    util_files = ["helpers.py", "formatters.py", "converters.py", "defaults.py"]
    legacy_files = ["old_pipeline.py", "compat.py", "deprecated_hooks.py", "retired_flags.py",
                    "archive/snapshots.py"]

    version = f"1.{rng.randint(0, 6)}.{rng.randint(0, 9)}"

    plan = CorpusPlan(
        seed=seed,
        domain=domain,
        complexity=complexity,
        root=ROOT_NAMES[domain],
        version=version,
        stage_defs=stage_defs,
        stage_mods=stage_mods,
        adapter_mods=adapter_mods,
        middleware_mods=middleware_mods,
        wrapped=wrapped,
        helper_callers=helper_callers,
        strict_callers=strict_callers,
        util_files=util_files,
        legacy_files=legacy_files,
        options=options,
        call_hints={},
        flow_hints={},
    )
    _plan_edges(plan)

    # Hint coin per narratable call edge (interface delegations included),
    # then per data-flow edge; the draws stay in one fixed order so trees
    # are byte-stable per seed.
    for edge in plan.calls:
        plan.call_hints[edge] = rng.random() < 0.5
    for src in plan.interface_calls:
        plan.call_hints[(src, "base.py")] = rng.random() < 0.5
    for edge in plan.flows:
        plan.flow_hints[edge] = rng.random() < 0.5
    return plan


def _plan_edges(plan: CorpusPlan) -> None:
    """Derive the full typed edge plan from the architecture choices."""
    imports: list[tuple[str, str]] = []
    calls: list[tuple[str, str]] = []

    def imp(src, dst):
        imports.append((src, dst))

    def call(src, dst):
        calls.append((src, dst))

    imp("base.py", "models.py")
    imp("config.py", "exceptions.py")
    call("config.py", "exceptions.py")
    for dst in ("config.py", "base.py", "exceptions.py"):
        imp("registry.py", dst)
    call("registry.py", "exceptions.py")
    for dst in ("registry.py", "config.py", "base.py", "models.py", "exceptions.py"):
        imp("runner.py", dst)
    for dst in ("registry.py", "config.py", "models.py"):
        call("runner.py", dst)
    for dst in ("runner.py", "config.py", "utils/formatters.py", "exceptions.py"):
        imp("cli.py", dst)
    for dst in ("runner.py", "config.py", "utils/formatters.py"):
        call("cli.py", dst)

    for position, mod in enumerate(plan.stage_mods):
        src = plan.stage_path(mod)
        imp(src, "base.py")
        imp(src, "models.py")
        if position in plan.helper_callers:
            imp(src, "utils/helpers.py")
            call(src, "utils/helpers.py")
        if position in plan.strict_callers:
            imp(src, "exceptions.py")

    for mod in plan.adapter_mods:
        src = f"adapters/{mod}.py"
        imp(src, "base.py")
        imp(src, "exceptions.py")
        imp(src, "models.py")

    logging_mod, retry_mod = plan.middleware_mods
    imp(f"middleware/{logging_mod}.py", "base.py")
    imp(f"middleware/{logging_mod}.py", "models.py")
    imp(f"middleware/{logging_mod}.py", "utils/formatters.py")
    call(f"middleware/{logging_mod}.py", "utils/formatters.py")
    imp(f"middleware/{retry_mod}.py", "base.py")
    imp(f"middleware/{retry_mod}.py", "models.py")
    imp(f"middleware/{retry_mod}.py", "exceptions.py")

    imp("utils/helpers.py", "exceptions.py")
    call("utils/helpers.py", "exceptions.py")
    imp("utils/helpers.py", "models.py")
    imp("utils/formatters.py", "exceptions.py")
    imp("utils/formatters.py", "models.py")
    imp("utils/converters.py", "models.py")

    imp("legacy/old_pipeline.py", "legacy/compat.py")
    imp("legacy/old_pipeline.py", "models.py")
    imp("legacy/old_pipeline.py", "base.py")
    imp("legacy/compat.py", "exceptions.py")
    imp("legacy/compat.py", "models.py")
    imp("legacy/deprecated_hooks.py", "models.py")
    imp("legacy/deprecated_hooks.py", "utils/converters.py")

    for dst in ("registry.py", "config.py", "runner.py", "base.py", "exceptions.py", "models.py"):
        imp("test_smoke.py", dst)
    for dst in ("registry.py", "config.py", "runner.py"):
        call("test_smoke.py", dst)

    plan.imports = imports
    plan.calls = calls
    plan.interface_calls = [
        "runner.py",
        f"adapters/{plan.adapter_mods[0]}.py",
        f"adapters/{plan.adapter_mods[1]}.py",
        f"middleware/{logging_mod}.py",
        f"middleware/{retry_mod}.py",
    ]
    plan.flows = [
        (plan.stage_path(a), plan.stage_path(b))
        for a, b in zip(plan.stage_mods, plan.stage_mods[1:])
    ]
    plan.wires = (
        [("registry.py", plan.stage_path(mod)) for mod in plan.stage_mods]
        + [("registry.py", f"middleware/{mod}.py") for mod in plan.middleware_mods]
        + [("registry.py", f"adapters/{mod}.py") for mod in plan.adapter_mods]
        # The adapter mapping in the config document binds each adapter to
        # the stage it wraps; the connection exists only through config.
        + [(f"adapters/{adapter}.py", plan.stage_path(stage))
           for stage, adapter in sorted(plan.wrapped.items(),
                                        key=lambda kv: plan.stage_mods.index(kv[0]))]
    )


# ---------------------------------------------------------------------------
# Renderers
# ---------------------------------------------------------------------------

def _class_name(key: str, suffix: str) -> str:
    return key.capitalize() + suffix


def _doc(*paragraphs: str) -> str:
    wrapped = [textwrap.fill(p, width=72) for p in paragraphs if p]
    body = "\n\n".join(wrapped)
    return f'"""{body}\n"""\n'


def _render_init(plan: CorpusPlan) -> str:
    label = plan.domain.replace("-", " ")
    return _doc(f"Configuration-wired {label} pipeline.") + f'\n__version__ = "{plan.version}"\n'


def _render_models(plan: CorpusPlan) -> str:
    return _doc("Shared record types flowing through the pipeline.") + '''
from dataclasses import dataclass, field


@dataclass
class Record:
    """One unit of work; stages mutate ``data`` and append ``tags``."""

    data: dict
    tags: list = field(default_factory=list)


@dataclass
class PipelineResult:
    """Final batch plus the number of stages that ran."""

    records: list
    stage_count: int


def make_sample_records(count: int = 4) -> list[Record]:
    """Build a small deterministic batch for smoke runs."""
    return [
        Record(data={"id": f"r{index}", "text": f"sample payload {index} for the pipeline"})
        for index in range(count)
    ]
'''


def _render_exceptions(plan: CorpusPlan) -> str:
    return _doc("Error hierarchy; every pipeline error derives from PipelineError.") + '''

class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class StageError(PipelineError):
    """A stage rejected its input or failed mid-batch."""


class ConfigError(PipelineError):
    """pipeline_config.json is missing or malformed."""


class RegistryError(PipelineError):
    """Dynamic loading of a configured component failed."""
'''


def _render_base(plan: CorpusPlan) -> str:
    return Template(_doc(
        "Abstract interface implemented by every processing stage.",
        "Concrete stages are driven only through this interface; "
        "orchestration code never touches stage internals.",
    ) + '''
from abc import ABC, abstractmethod

from ${root}.models import Record


class StageBase(ABC):
    """Common contract for pipeline stages."""

    def __init__(self, options=None):
        self.options = dict(options or {})

    @property
    def name(self) -> str:
        return type(self).__name__

    @abstractmethod
    def process(self, batch: list[Record]) -> list[Record]:
        """Transform one batch and return the outgoing batch."""
''').substitute(root=plan.root)


def _render_config(plan: CorpusPlan) -> str:
    return Template(_doc("Loader for the pipeline configuration document.") + '''
import json
from pathlib import Path

from ${root}.exceptions import ConfigError

_DEFAULT_PATH = Path(__file__).resolve().parent / "pipeline_config.json"


class PipelineConfig:
    """Parsed view of pipeline_config.json."""

    def __init__(self, raw: dict):
        self.pipeline = str(raw.get("pipeline", ""))
        self.stages = list(raw.get("stages", []))
        self.options = dict(raw.get("options", {}))
        self.middleware = list(raw.get("middleware", []))
        self.adapters = dict(raw.get("adapters", {}))


def load_config(path=None) -> PipelineConfig:
    """Read and validate the configuration document."""
    target = Path(path) if path is not None else _DEFAULT_PATH
    try:
        raw = json.loads(target.read_text(encoding="utf-8"))
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read pipeline config: {err}") from err
    if not isinstance(raw, dict) or not isinstance(raw.get("stages"), list):
        raise ConfigError("pipeline config must declare a stages list")
    return PipelineConfig(raw)
''').substitute(root=plan.root)


def _render_registry(plan: CorpusPlan) -> str:
    return Template(_doc(
        "Runtime registry that assembles the pipeline.",
        "Stage, middleware, and adapter modules are looked up by name "
        "with importlib; nothing here imports them statically, so the "
        "wiring lives entirely in pipeline_config.json and pipelines "
        "can be reordered without code changes.",
    ) + '''
import importlib

from ${root}.base import StageBase
from ${root}.config import PipelineConfig
from ${root}.exceptions import RegistryError

_PKG = __name__.rsplit(".", 1)[0]


class StageRegistry:
    """Builds the running stage chain from a PipelineConfig."""

    def __init__(self, config: PipelineConfig):
        self.config = config

    def _load(self, group: str, name: str) -> type:
        module = importlib.import_module(f"{_PKG}.{group}.{name}")
        for value in vars(module).values():
            if isinstance(value, type) and issubclass(value, StageBase) and value is not StageBase:
                return value
        raise RegistryError(f"no StageBase subclass found in {group}.{name}")

    def build_pipeline(self) -> list[StageBase]:
        stages = []
        for name in self.config.stages:
            stage = self._load("stages", name)(self.config.options.get(name, {}))
            adapter_name = self.config.adapters.get(name)
            if adapter_name is not None:
                stage = self._load("adapters", adapter_name)(stage)
            stages.append(stage)
        for name in self.config.middleware:
            wrapper = self._load("middleware", name)
            stages = [wrapper(stage) for stage in stages]
        return stages
''').substitute(root=plan.root)


def _render_runner(plan: CorpusPlan) -> str:
    flow_lines = []
    for (src, dst), hinted in plan.flow_hints.items():
        if hinted:
            a = src.removesuffix(".py").replace("/", ".")
            b = dst.removesuffix(".py").replace("/", ".")
            flow_lines.append(f"Output from {a} flows into {b}.")
    hints = " ".join(flow_lines)
    return Template(_doc(
        "Pipeline orchestrator.",
        "Builds the configured stage chain and folds each batch through "
        "it: the output of one stage is the input of the next, in the "
        "order declared in pipeline_config.json.  Records pass the "
        "validation stage before any downstream stage sees them.  The "
        "input batch is handed to the first configured stage.",
        hints,
    ) + '''
from ${root}.base import StageBase
from ${root}.config import PipelineConfig, load_config
from ${root}.exceptions import StageError
from ${root}.models import PipelineResult, Record, make_sample_records
from ${root}.registry import StageRegistry


def run_pipeline(records=None, config_path=None, strict=True) -> PipelineResult:
    """Run every configured stage over the batch and return the result."""
    config: PipelineConfig = load_config(config_path)
    stages: list[StageBase] = StageRegistry(config).build_pipeline()
    batch: list[Record] = list(records) if records is not None else make_sample_records()
    for stage in stages:
        try:
            batch = stage.process(batch)
        except StageError:
            if strict:
                raise
            batch = []
    return PipelineResult(records=batch, stage_count=len(stages))
''').substitute(root=plan.root)


def _render_cli(plan: CorpusPlan) -> str:
    hints = []
    if plan.call_hints.get(("cli.py", "runner.py")):
        hints.append("Hands pipeline execution to runner.run_pipeline.")
    if plan.call_hints.get(("cli.py", "utils/formatters.py")):
        hints.append("Output formatting is delegated to utils.formatters.")
    return Template(_doc("Command line front end for pipeline runs.", " ".join(hints)) + '''
import argparse
import sys

from ${root}.config import load_config
from ${root}.exceptions import PipelineError
from ${root}.runner import run_pipeline
from ${root}.utils.formatters import format_summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Run the configured pipeline.")
    parser.add_argument("--config", default=None, help="path to pipeline_config.json")
    parser.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        result = run_pipeline(config_path=args.config)
    except PipelineError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if not args.quiet:
        print(f"[{config.pipeline}] " + format_summary(result))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
''').substitute(root=plan.root)


def _render_stage(plan: CorpusPlan, position: int) -> str:
    sdef = plan.stage_defs[position]
    mod = plan.stage_mods[position]
    cls = _class_name(sdef.key, "Stage")
    src = plan.stage_path(mod)

    is_validator = position == 0
    is_helper = position in plan.helper_callers
    is_strict = position in plan.strict_callers

    hint = ""
    if is_helper and plan.call_hints.get((src, "utils/helpers.py")):
        hint = "Field checks are delegated to utils.helpers."

    imports = [f"from {plan.root}.base import StageBase"]
    if is_strict:
        imports.insert(0, f"from {plan.root}.exceptions import StageError")
    imports.append(f"from {plan.root}.models import Record")
    if is_helper:
        imports.append(f"from {plan.root}.utils.helpers import require_fields")
    imports.sort(key=lambda line: line.split(" import ")[0])
    if sdef.needs_json:
        imports = ["import json", ""] + imports

    body = ""
    if is_helper and not is_validator:
        body += _STRICT_GUARD if is_strict else _PLAIN_GUARD
    body += sdef.core
    body += "        return batch\n"

    return (
        _doc(f"{cls}: {sdef.purpose}", hint)
        + "\n" + "\n".join(imports) + "\n\n\n"
        + f"class {cls}(StageBase):\n"
        + f'    """{sdef.purpose}"""\n\n'
        + "    def process(self, batch: list[Record]) -> list[Record]:\n"
        + body
    )


def _render_adapter(plan: CorpusPlan, which: int) -> str:
    mod = plan.adapter_mods[which]
    src = f"adapters/{mod}.py"
    hint = ""
    if plan.call_hints.get((src, "base.py")):
        hint = "Delegates the remaining work to the wrapped stage through StageBase.process."
    header = _doc(
        "Adapter wrapping one configured stage with extra behavior.",
        "Adapters hold their inner stage behind the StageBase interface "
        "and never reach into stage internals.",
        hint,
    )
    common = Template('''
from ${root}.base import StageBase
from ${root}.exceptions import StageError
from ${root}.models import Record

''').substitute(root=plan.root)
    if which == 0:
        body = '''
class CachingAdapter(StageBase):
    """Skips records whose id already passed through this adapter."""

    def __init__(self, inner: StageBase):
        self.inner = inner
        self.options = {}
        self._seen = set()

    def process(self, batch: list[Record]) -> list[Record]:
        fresh = [r for r in batch if str(r.data.get("id", "")) not in self._seen]
        for record in fresh:
            self._seen.add(str(record.data.get("id", "")))
        try:
            return self.inner.process(fresh)
        except StageError:
            return []
'''
    else:
        body = '''
class BatchSplitAdapter(StageBase):
    """Feeds the wrapped stage in half-batch chunks."""

    def __init__(self, inner: StageBase):
        self.inner = inner
        self.options = {}

    def process(self, batch: list[Record]) -> list[Record]:
        size = max(1, len(batch) // 2)
        merged = []
        for start in range(0, len(batch), size):
            chunk = batch[start:start + size]
            try:
                merged.extend(self.inner.process(chunk))
            except StageError:
                continue
        return merged
'''
    return header + common + body


def _render_middleware(plan: CorpusPlan, which: int) -> str:
    mod = plan.middleware_mods[which]
    src = f"middleware/{mod}.py"
    if which == 0:
        hint = ""
        if plan.call_hints.get((src, "utils/formatters.py")):
            hint = "Log lines are rendered by utils.formatters."
        return Template(_doc(
            "Logging middleware wrapped around every stage.",
            "Middleware adds cross-cutting behavior without modifying "
            "the stages themselves.",
            hint,
        ) + '''
from ${root}.base import StageBase
from ${root}.models import Record
from ${root}.utils.formatters import format_record


class LoggingMiddleware(StageBase):
    """Records a line per processed batch."""

    def __init__(self, inner: StageBase):
        self.inner = inner
        self.options = {}
        self.lines = []

    def process(self, batch: list[Record]) -> list[Record]:
        if batch:
            self.lines.append(format_record(batch[0]))
        out = self.inner.process(batch)
        self.lines.append(f"{type(self.inner).__name__}: {len(batch)} -> {len(out)}")
        return out
''').substitute(root=plan.root)
    return Template(_doc(
        "Retry middleware wrapped around every stage.",
        "Middleware adds cross-cutting behavior without modifying the "
        "stages themselves.",
    ) + '''
from ${root}.base import StageBase
from ${root}.exceptions import StageError
from ${root}.models import Record


class RetryMiddleware(StageBase):
    """Retries a failing stage once before giving up."""

    def __init__(self, inner: StageBase):
        self.inner = inner
        self.options = {}

    def process(self, batch: list[Record]) -> list[Record]:
        attempts = 2
        for attempt in range(attempts):
            try:
                return self.inner.process(batch)
            except StageError:
                if attempt == attempts - 1:
                    raise
        return batch
''').substitute(root=plan.root)


def _render_helpers(plan: CorpusPlan) -> str:
    return Template(_doc("Small record utilities shared by the processing stages.") + '''
from ${root}.exceptions import StageError
from ${root}.models import Record


def require_fields(record: Record, names: list, strict: bool = False) -> bool:
    """True when every named field is present; raise in strict mode."""
    missing = [name for name in names if name not in record.data]
    if missing and strict:
        raise StageError(f"record missing fields: {', '.join(missing)}")
    return not missing


def collapse_spaces(text: str) -> str:
    return " ".join(text.split())


def stable_key(record: Record, names: list) -> str:
    return "|".join(str(record.data.get(name, "")) for name in names)


def chunked(items: list, size: int) -> list:
    size = max(1, size)
    return [items[start:start + size] for start in range(0, len(items), size)]
''').substitute(root=plan.root)


def _render_formatters(plan: CorpusPlan) -> str:
    return Template(_doc("Human-readable rendering of records and results.") + '''
from ${root}.exceptions import PipelineError
from ${root}.models import PipelineResult, Record


def format_record(record: Record) -> str:
    keys = ",".join(sorted(record.data))
    return f"<record id={record.data.get('id', '?')} keys={keys}>"


def format_summary(result: PipelineResult) -> str:
    return f"{len(result.records)} records through {result.stage_count} stages"


def format_failure(err: PipelineError) -> str:
    return f"pipeline error: {err}"
''').substitute(root=plan.root)


def _render_defaults(plan: CorpusPlan) -> str:
    label = plan.domain.replace("-", " ")
    return _doc(f"Tunable limits for {label} deployments.") + '''
BATCH_LIMIT = 500
RETRY_ATTEMPTS = 2
STRICT_MODE = True

LIMITS = {
    "batch": BATCH_LIMIT,
    "retries": RETRY_ATTEMPTS,
}
'''


def _render_retired_flags(plan: CorpusPlan) -> str:
    return _doc("Feature flags for the retired pipeline; all permanently off.") + '''
USE_LEGACY_ORDERING = False
EMIT_LEGACY_METRICS = False
KEEP_RAW_PAYLOADS = False

ALL_FLAGS = (
    USE_LEGACY_ORDERING,
    EMIT_LEGACY_METRICS,
    KEEP_RAW_PAYLOADS,
)
'''


def _render_snapshots(plan: CorpusPlan) -> str:
    return _doc("Frozen output snapshots captured before the registry rewrite.") + '''
SNAPSHOT_IDS = ("2021-03-14", "2021-06-02", "2021-09-17")

ROW_COUNTS = {
    "2021-03-14": 118,
    "2021-06-02": 97,
    "2021-09-17": 142,
}
'''


def _render_converters(plan: CorpusPlan) -> str:
    return Template(_doc("Conversions between records and plain dictionaries.") + '''
from ${root}.models import Record


def to_plain_dicts(records: list) -> list:
    return [dict(record.data) for record in records]


def field_names(records: list) -> list:
    names = []
    for record in records:
        for key in record.data:
            if key not in names:
                names.append(key)
    return names
''').substitute(root=plan.root)


def _render_old_pipeline(plan: CorpusPlan) -> str:
    return Template(_doc(
        "Retired pipeline entry point kept for rollback only.",
        "Legacy modules take no part in the active pipeline; nothing in "
        "the live flow imports them.",
    ) + '''
from ${root}.base import StageBase
from ${root}.legacy.compat import LEGACY_SCHEMA
from ${root}.models import Record


class LegacyPassthroughStage(StageBase):
    """Pre-registry stage shape retained for comparison."""

    def process(self, batch: list[Record]) -> list[Record]:
        return batch


def run_legacy(records: list) -> list:
    columns = list(LEGACY_SCHEMA)
    return [record for record in records if all(name in record.data for name in columns)]
''').substitute(root=plan.root)


def _render_compat(plan: CorpusPlan) -> str:
    return Template(_doc("Compatibility shims for the retired pipeline.") + '''
from ${root}.exceptions import PipelineError
from ${root}.models import Record

LEGACY_SCHEMA = ("id", "text", "origin")


def is_pipeline_failure(err: object) -> bool:
    return isinstance(err, PipelineError)


def coerce_legacy(record: Record) -> Record:
    for name in LEGACY_SCHEMA:
        record.data.setdefault(name, "")
    return record
''').substitute(root=plan.root)


def _render_hooks(plan: CorpusPlan) -> str:
    return Template(_doc("Deprecated export hooks; scheduled for deletion.") + '''
from ${root}.models import Record
from ${root}.utils.converters import to_plain_dicts

DISABLED = True


def legacy_export(records: list, converter=to_plain_dicts) -> list:
    if DISABLED:
        return []
    return [dict(row) for row in converter(records)]
''').substitute(root=plan.root)


def _render_sub_init(label: str) -> str:
    return _doc(label)


def _render_config_json(plan: CorpusPlan) -> str:
    adapters = {stage: adapter for stage, adapter in sorted(plan.wrapped.items(),
                key=lambda kv: plan.stage_mods.index(kv[0]))}
    doc = {
        "pipeline": plan.domain,
        "stages": list(plan.stage_mods),
        "options": {mod: plan.options[mod] for mod in plan.stage_mods if mod in plan.options},
        "middleware": list(plan.middleware_mods),
        "adapters": adapters,
    }
    return json.dumps(doc, indent=2) + "\n"


def _render_test_smoke(plan: CorpusPlan) -> str:
    validator_cls = _class_name(plan.stage_defs[0].key, "Stage")
    return Template(_doc(
        "Smoke and architecture checks for the generated pipeline.",
        "Stages must not import each other; records move between stages "
        "only through the orchestrator, and stages execute in exactly "
        "the order listed in pipeline_config.json.",
    ) + '''
import importlib
import re
from pathlib import Path

from ${root} import exceptions
from ${root}.base import StageBase
from ${root}.config import load_config
from ${root}.models import Record
from ${root}.registry import StageRegistry
from ${root}.runner import run_pipeline

_ROOT_DIR = Path(__file__).resolve().parent
_STAGE_IMPORT = re.compile(r"^\\s*(?:from|import)\\s+${root}\\.stages\\.")


def _unwrap(stage):
    while hasattr(stage, "inner"):
        stage = stage.inner
    return stage


def test_stage_isolation():
    for path in sorted((_ROOT_DIR / "stages").glob("mod_*.py")):
        for line in path.read_text(encoding="utf-8").splitlines():
            assert not _STAGE_IMPORT.match(line), f"{path.name} imports a sibling stage"


def test_registry_loads_all_stages():
    config = load_config()
    pipeline = StageRegistry(config).build_pipeline()
    assert len(pipeline) == len(config.stages)


def test_loaded_stages_subclass_base():
    config = load_config()
    pipeline = StageRegistry(config).build_pipeline()
    assert all(isinstance(stage, StageBase) for stage in pipeline)


def test_stage_order_matches_config():
    config = load_config()
    pipeline = StageRegistry(config).build_pipeline()
    leaves = [type(_unwrap(stage)).__module__.rsplit(".", 1)[-1] for stage in pipeline]
    assert leaves == list(config.stages)


def test_validation_runs_first():
    config = load_config()
    pipeline = StageRegistry(config).build_pipeline()
    assert type(_unwrap(pipeline[0])).__name__ == "${validator_cls}"


def test_pipeline_end_to_end():
    result = run_pipeline()
    assert result.stage_count == len(load_config().stages)
    assert isinstance(result.records, list)
    assert all(isinstance(record, Record) for record in result.records)
    assert result.records, "pipeline dropped every record"


def test_one_stage_class_per_module():
    config = load_config()
    for name in config.stages:
        module = importlib.import_module(f"${root}.stages.{name}")
        classes = [
            value for value in vars(module).values()
            if isinstance(value, type) and issubclass(value, StageBase) and value is not StageBase
        ]
        assert len(classes) == 1, f"{name} must define exactly one stage class"


def test_errors_derive_from_pipeline_error():
    for name in ("StageError", "ConfigError", "RegistryError"):
        assert issubclass(getattr(exceptions, name), exceptions.PipelineError)


def run_all() -> int:
    checks = [
        test_stage_isolation,
        test_registry_loads_all_stages,
        test_loaded_stages_subclass_base,
        test_stage_order_matches_config,
        test_validation_runs_first,
        test_pipeline_end_to_end,
        test_one_stage_class_per_module,
        test_errors_derive_from_pipeline_error,
    ]
    for check in checks:
        check()
    return len(checks)


if __name__ == "__main__":
    print(f"{run_all()} checks passed")
''').substitute(root=plan.root, validator_cls=validator_cls)


# ---------------------------------------------------------------------------
# Ground truth assembly
# ---------------------------------------------------------------------------

_INIT_LABELS = {
    "stages": "Processing stages; loaded dynamically by the registry.",
    "adapters": "Stage adapters; loaded dynamically by the registry.",
    "middleware": "Cross-cutting middleware; loaded dynamically by the registry.",
    "utils": "Shared utility helpers.",
    "legacy": "Retired modules kept for rollback.",
}


def _module_specs(plan: CorpusPlan) -> list[ModuleSpec]:
    label = plan.domain.replace("-", " ")
    specs = [
        ModuleSpec("__init__.py", "infrastructure", f"Package marker for the {label} pipeline.",
                   (("__version__", "str"),)),
        ModuleSpec("models.py", "infrastructure", "Defines the record and result types shared by all stages.",
                   (("Record", "class Record"), ("PipelineResult", "class PipelineResult"),
                    ("make_sample_records", "def make_sample_records(count: int = 4) -> list[Record]"))),
        ModuleSpec("base.py", "infrastructure", "Declares the abstract stage interface every stage implements.",
                   (("StageBase", "class StageBase(ABC)"),)),
        ModuleSpec("config.py", "infrastructure", "Loads and validates pipeline_config.json.",
                   (("PipelineConfig", "class PipelineConfig"),
                    ("load_config", "def load_config(path=None) -> PipelineConfig"))),
        ModuleSpec("exceptions.py", "infrastructure", "Error hierarchy rooted at PipelineError.",
                   (("PipelineError", "class PipelineError(Exception)"),
                    ("StageError", "class StageError(PipelineError)"),
                    ("ConfigError", "class ConfigError(PipelineError)"),
                    ("RegistryError", "class RegistryError(PipelineError)"))),
        ModuleSpec("registry.py", "infrastructure",
                   "Dynamically loads configured stages, adapters, and middleware.",
                   (("StageRegistry", "class StageRegistry"),)),
        ModuleSpec("runner.py", "orchestrator", "Folds record batches through the configured stage chain.",
                   (("run_pipeline", "def run_pipeline(records=None, config_path=None, strict=True) -> PipelineResult"),)),
        ModuleSpec("cli.py", "orchestrator", "Command line entry point for pipeline runs.",
                   (("build_parser", "def build_parser() -> argparse.ArgumentParser"),
                    ("main", "def main(argv=None) -> int"))),
        ModuleSpec("pipeline_config.json", "config-data",
                   "Declares stage order, options, middleware, and adapter wiring.", ()),
        ModuleSpec("test_smoke.py", "test",
                   "Smoke checks for registry wiring, stage order, and stage boundaries.",
                   (("run_all", "def run_all() -> int"),)),
    ]
    for position, mod in enumerate(plan.stage_mods):
        sdef = plan.stage_defs[position]
        cls = _class_name(sdef.key, "Stage")
        specs.append(ModuleSpec(plan.stage_path(mod), "stage", sdef.purpose,
                                ((cls, f"class {cls}(StageBase)"),)))
    adapter_classes = ("CachingAdapter", "BatchSplitAdapter")
    adapter_purposes = (
        "Adapter that skips records already processed once.",
        "Adapter that feeds its stage in half-batch chunks.",
    )
    for which, mod in enumerate(plan.adapter_mods):
        specs.append(ModuleSpec(f"adapters/{mod}.py", "adapter", adapter_purposes[which],
                                ((adapter_classes[which], f"class {adapter_classes[which]}(StageBase)"),)))
    middleware_classes = ("LoggingMiddleware", "RetryMiddleware")
    middleware_purposes = (
        "Middleware that logs one line per processed batch.",
        "Middleware that retries a failing stage once.",
    )
    for which, mod in enumerate(plan.middleware_mods):
        specs.append(ModuleSpec(f"middleware/{mod}.py", "middleware", middleware_purposes[which],
                                ((middleware_classes[which], f"class {middleware_classes[which]}(StageBase)"),)))
    util_exports = {
        "helpers.py": (("require_fields", "def require_fields(record, names, strict=False) -> bool"),
                       ("collapse_spaces", "def collapse_spaces(text: str) -> str"),
                       ("stable_key", "def stable_key(record, names) -> str"),
                       ("chunked", "def chunked(items, size) -> list")),
        "formatters.py": (("format_record", "def format_record(record) -> str"),
                          ("format_summary", "def format_summary(result) -> str"),
                          ("format_failure", "def format_failure(err) -> str")),
        "converters.py": (("to_plain_dicts", "def to_plain_dicts(records) -> list"),
                          ("field_names", "def field_names(records) -> list")),
        "defaults.py": (("LIMITS", "dict"),),
    }
    util_purposes = {
        "helpers.py": "Small record utilities shared by the processing stages.",
        "formatters.py": "Human-readable rendering of records and results.",
        "converters.py": "Conversions between records and plain dictionaries.",
        "defaults.py": "Tunable deployment limits (currently unreferenced).",
    }
    for name in plan.util_files:
        specs.append(ModuleSpec(f"utils/{name}", "utility", util_purposes[name], util_exports[name]))
    legacy_exports = {
        "old_pipeline.py": (("LegacyPassthroughStage", "class LegacyPassthroughStage(StageBase)"),
                            ("run_legacy", "def run_legacy(records) -> list")),
        "compat.py": (("LEGACY_SCHEMA", "tuple"),
                      ("is_pipeline_failure", "def is_pipeline_failure(err) -> bool"),
                      ("coerce_legacy", "def coerce_legacy(record) -> Record")),
        "deprecated_hooks.py": (("legacy_export", "def legacy_export(records, converter=...) -> list"),),
        "retired_flags.py": (("ALL_FLAGS", "tuple"),),
        "archive/snapshots.py": (("SNAPSHOT_IDS", "tuple"),),
    }
    legacy_purposes = {
        "old_pipeline.py": "Retired pipeline entry point kept for rollback only.",
        "compat.py": "Compatibility shims for the retired pipeline.",
        "deprecated_hooks.py": "Deprecated export hooks; scheduled for deletion.",
        "retired_flags.py": "Feature flags for the retired pipeline; all off.",
        "archive/snapshots.py": "Frozen pre-rewrite output snapshots.",
    }
    for name in plan.legacy_files:
        specs.append(ModuleSpec(f"legacy/{name}", "distractor", legacy_purposes[name], legacy_exports[name]))
    return sorted(specs, key=lambda m: m.path)


def _constraints(plan: CorpusPlan) -> list[Constraint]:
    smoke = "test_smoke.py"
    validator_path = plan.stage_path(plan.stage_mods[0])
    first_path = validator_path
    sink_path = plan.stage_path(plan.stage_mods[-1])
    adapter_path = f"adapters/{plan.adapter_mods[0]}.py"
    distractor_path = "legacy/old_pipeline.py"

    def ev(*pairs: tuple[str, str]) -> tuple[Evidence, ...]:
        return tuple(Evidence(kind, locator) for kind, locator in pairs)

    out: list[Constraint] = []
    for src, dst in plan.flows[: min(len(plan.flows), 6)]:
        out.append(Constraint(
            ConstraintType.BOUNDARY, src, dst, "",
            "must not import the downstream stage; records move between stages only through the orchestrator",
            ev(("test", f"{smoke}::test_stage_isolation"), ("structure", src)),
        ))
    out.append(Constraint(
        ConstraintType.DATAFLOW, validator_path, sink_path, "",
        "records must pass validation before reaching the final stage",
        ev(("test", f"{smoke}::test_validation_runs_first"), ("doc", "runner.py")),
    ))
    out.append(Constraint(
        ConstraintType.DATAFLOW, "runner.py", first_path, "",
        "the orchestrator feeds the input batch to the first configured stage",
        ev(("structure", "runner.py"), ("doc", "runner.py")),
    ))
    out.append(Constraint(
        ConstraintType.DATAFLOW, "", "", "",
        "stages execute in exactly the order listed in pipeline_config.json",
        ev(("test", f"{smoke}::test_stage_order_matches_config"), ("structure", "registry.py")),
    ))
    out.append(Constraint(
        ConstraintType.INTERFACE, "runner.py", "", "StageBase",
        "the orchestrator invokes stages only through the StageBase interface",
        ev(("structure", "runner.py"), ("doc", "base.py")),
    ))
    out.append(Constraint(
        ConstraintType.INTERFACE, adapter_path, "", "StageBase",
        "adapters wrap stages and access them only through the StageBase interface",
        ev(("doc", adapter_path), ("structure", adapter_path)),
    ))
    out.append(Constraint(
        ConstraintType.INTERFACE, "registry.py", "", "StageBase",
        "every dynamically loaded component must subclass StageBase",
        ev(("test", f"{smoke}::test_loaded_stages_subclass_base"), ("structure", "registry.py")),
    ))
    out.append(Constraint(
        ConstraintType.INVARIANT, "", "", "",
        "every stage module defines exactly one StageBase subclass",
        ev(("test", f"{smoke}::test_one_stage_class_per_module"), ("structure", "stages")),
    ))
    out.append(Constraint(
        ConstraintType.INVARIANT, "", "exceptions.py", "PipelineError",
        "every raised pipeline error derives from PipelineError",
        ev(("test", f"{smoke}::test_errors_derive_from_pipeline_error"), ("structure", "exceptions.py")),
    ))
    out.append(Constraint(
        ConstraintType.PURPOSE, "registry.py", "pipeline_config.json", "importlib",
        "stage wiring lives in configuration so pipelines can be reordered without code changes",
        ev(("doc", "registry.py"),),
    ))
    out.append(Constraint(
        ConstraintType.PURPOSE, distractor_path, "", "",
        "legacy modules are retained for rollback only and take no part in the active pipeline",
        ev(("doc", distractor_path),),
    ))
    return out


def _ground_truth(plan: CorpusPlan) -> GroundTruth:
    edges = (
        [DepEdge(src, dst, EdgeType.IMPORTS) for src, dst in plan.imports]
        + [DepEdge(src, dst, EdgeType.CALLS_API) for src, dst in plan.calls]
        + [DepEdge(src, "base.py", EdgeType.CALLS_API) for src in plan.interface_calls]
        + [DepEdge(src, dst, EdgeType.DATA_FLOWS_TO) for src, dst in plan.flows]
        + [DepEdge(src, dst, EdgeType.REGISTRY_WIRES) for src, dst in plan.wires]
    )
    edges.sort(key=lambda e: (e.src, e.dst, e.type.value))
    gt = GroundTruth(
        manifest=Manifest(seed=plan.seed, domain=plan.domain, complexity=plan.complexity),
        modules=_module_specs(plan),
        edges=edges,
        constraints=_constraints(plan),
    )
    validate_ground_truth(gt)
    return gt


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def _render_files(plan: CorpusPlan) -> dict[str, str]:
    files: dict[str, str] = {
        "__init__.py": _render_init(plan),
        "models.py": _render_models(plan),
        "exceptions.py": _render_exceptions(plan),
        "base.py": _render_base(plan),
        "config.py": _render_config(plan),
        "registry.py": _render_registry(plan),
        "runner.py": _render_runner(plan),
        "cli.py": _render_cli(plan),
        "pipeline_config.json": _render_config_json(plan),
        "test_smoke.py": _render_test_smoke(plan),
    }
    for sub in SUB_PACKAGES:
        files[f"{sub}/__init__.py"] = _render_sub_init(_INIT_LABELS[sub])
    files["legacy/archive/__init__.py"] = _render_sub_init("Archived outputs of the retired pipeline.")
    for position, mod in enumerate(plan.stage_mods):
        files[plan.stage_path(mod)] = _render_stage(plan, position)
    for which, mod in enumerate(plan.adapter_mods):
        files[f"adapters/{mod}.py"] = _render_adapter(plan, which)
    for which, mod in enumerate(plan.middleware_mods):
        files[f"middleware/{mod}.py"] = _render_middleware(plan, which)
    renderers = {
        "helpers.py": _render_helpers,
        "formatters.py": _render_formatters,
        "converters.py": _render_converters,
        "defaults.py": _render_defaults,
    }
    for name in plan.util_files:
        files[f"utils/{name}"] = renderers[name](plan)
    legacy_renderers = {
        "old_pipeline.py": _render_old_pipeline,
        "compat.py": _render_compat,
        "deprecated_hooks.py": _render_hooks,
        "retired_flags.py": _render_retired_flags,
        "archive/snapshots.py": _render_snapshots,
    }
    for name in plan.legacy_files:
        files[f"legacy/{name}"] = legacy_renderers[name](plan)
    return dict(sorted(files.items()))


def _check_statistics(plan: CorpusPlan, gt: GroundTruth) -> None:
    total = len(gt.edges)
    imports = len(gt.edges_of_type(EdgeType.IMPORTS))
    fraction = imports / total if total else 0.0
    lo, hi = IMPORTS_FRACTION_BOUNDS
    if not lo <= fraction <= hi:
        raise GenerationError(f"seed {plan.seed}: imports fraction {fraction:.3f} outside [{lo}, {hi}]")
    c_lo, c_hi = CONSTRAINT_COUNT_BOUNDS
    if not c_lo <= len(gt.constraints) <= c_hi:
        raise GenerationError(f"seed {plan.seed}: {len(gt.constraints)} constraints outside [{c_lo}, {c_hi}]")
    m_lo, m_hi = MODULE_COUNT_BOUNDS
    if not m_lo <= len(gt.modules) <= m_hi:
        raise GenerationError(f"seed {plan.seed}: {len(gt.modules)} modules outside [{m_lo}, {m_hi}]")


def generate(seed: int, complexity: str = "medium", domain: str | None = None) -> RenderedCodebase:
    """Generate one codebase; a pure function of (seed, complexity, domain)."""
    plan = _build_plan(seed, complexity, domain)
    files = _render_files(plan)
    gt = _ground_truth(plan)
    for module in gt.modules:
        if module.path not in files:
            raise GenerationError(f"module {module.path} missing from rendered tree")
    _check_statistics(plan, gt)
    return RenderedCodebase(root=plan.root, files=files, ground_truth=gt)


def statistics(codebase: RenderedCodebase) -> dict:
    """Per-codebase generation statistics (counts and edge-type mix)."""
    gt = codebase.ground_truth
    counts = {name: len(gt.edges_of_type(name)) for name in (e.value for e in EdgeType)}
    total = len(gt.edges)
    sub_packages = sorted({p.split("/", 1)[0] for p in codebase.files if "/" in p})
    return {
        "seed": gt.manifest.seed,
        "domain": gt.manifest.domain,
        "complexity": gt.manifest.complexity,
        "modules": len(gt.modules),
        "sub_packages": len(sub_packages),
        "edges_total": total,
        "edges": counts,
        "imports_fraction": round(counts["IMPORTS"] / total, 4) if total else 0.0,
        "constraints": len(gt.constraints),
    }


def write_codebase(codebase: RenderedCodebase, out_dir: str | Path) -> Path:
    """Write the tree under ``out_dir/<root>/`` plus a sibling ground_truth.json."""
    from .worldmodel import save_ground_truth

    out = Path(out_dir)
    tree = out / codebase.root
    tree.mkdir(parents=True, exist_ok=True)
    for rel, text in codebase.files.items():
        target = tree / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    save_ground_truth(codebase.ground_truth, out / "ground_truth.json")
    return tree
