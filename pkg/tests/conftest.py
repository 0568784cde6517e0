from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from archprobe.codegen import generate
from archprobe.environment import Codebase


@pytest.fixture(scope="session")
def seed42():
    return generate(42)


@pytest.fixture(scope="session")
def seed42_codebase(seed42):
    return Codebase.from_rendered(seed42)


@pytest.fixture(scope="session")
def canonical_corpora():
    """The three benchmark seeds used in aggregate comparisons."""
    return {seed: generate(seed) for seed in (42, 123, 999)}
