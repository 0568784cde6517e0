"""``check_corpus <dir> --json``: certify one corpus directory.

Exit code mirrors the result: 0 when every check passed, 1 when any
failed, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checker import check_corpus


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="check_corpus",
                                     description="Certify a generated corpus at runtime.")
    parser.add_argument("corpus_dir", help="directory holding the tree and ground_truth.json")
    parser.add_argument("--json", action="store_true", dest="as_json",
                        help="emit the CheckResult as one JSON document")
    args = parser.parse_args(argv)

    corpus_dir = Path(args.corpus_dir)
    if not corpus_dir.is_dir():
        print(f"error: {corpus_dir} is not a directory", file=sys.stderr)
        return 2

    result = check_corpus(corpus_dir)
    if args.as_json:
        print(json.dumps(result.to_dict()))
    else:
        status = "ok" if result.passed else "FAILED"
        print(f"seed {result.seed}: {status} ({result.stages_loaded} stages loaded)")
        for failure in result.failures:
            print(f"  {failure.check}: {failure.message}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
