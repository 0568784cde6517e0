"""corpus_checker: executes generated corpora in their native runtime.

Certifies that a benchmark corpus is genuinely runnable architecture:
the package imports, the registry dynamically loads every configured
stage, the orchestrator runs end to end, the planted tests pass, and
no stage statically imports a sibling stage.  The corpus is never
modified (verified by tree hash).
"""

from .checker import CheckResult, check_corpus, tree_hash

__all__ = ["CheckResult", "check_corpus", "tree_hash"]
