"""Child-process runtime probe: imports and drives one corpus tree.

Runs in its own interpreter so every corpus gets a fresh module
namespace; results go to stdout as one JSON document.  Exceptions are
captured into the result, never propagated as a crash.
"""

from __future__ import annotations

import importlib
import json
import sys
import traceback
from pathlib import Path


def run_probe(tree: Path) -> dict:
    result: dict = {
        "imported": False,
        "config_stages": 0,
        "stages_loaded": 0,
        "registry_ok": False,
        "pipeline_ran": False,
        "records_out": 0,
        "smoke_checks": 0,
        "smoke_ok": False,
        "error": "",
        "failed_step": "",
    }
    sys.path.insert(0, str(tree.parent))
    root = tree.name
    step = "import-package"
    try:
        importlib.import_module(root)
        result["imported"] = True

        step = "registry-load"
        config_mod = importlib.import_module(f"{root}.config")
        registry_mod = importlib.import_module(f"{root}.registry")
        config = config_mod.load_config()
        result["config_stages"] = len(config.stages)
        pipeline = registry_mod.StageRegistry(config).build_pipeline()
        result["stages_loaded"] = len(pipeline)
        result["registry_ok"] = result["stages_loaded"] == result["config_stages"] > 0

        step = "pipeline-run"
        runner_mod = importlib.import_module(f"{root}.runner")
        outcome = runner_mod.run_pipeline()
        result["pipeline_ran"] = True
        result["records_out"] = len(outcome.records)

        step = "smoke-tests"
        smoke_mod = importlib.import_module(f"{root}.test_smoke")
        result["smoke_checks"] = smoke_mod.run_all()
        result["smoke_ok"] = True
    except BaseException as err:  # reported upward, never crashes the probe
        result["failed_step"] = step
        result["error"] = f"{type(err).__name__}: {err}"
        result["trace"] = traceback.format_exc().splitlines()[-3:]
    return result


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print(json.dumps({"error": "usage: probe <tree-dir>"}))
        return 2
    print(json.dumps(run_probe(Path(argv[0]).resolve())))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
