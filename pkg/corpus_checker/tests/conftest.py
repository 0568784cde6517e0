from __future__ import annotations

import shutil
import subprocess
import sys
from pathlib import Path

import pytest

# These tests exercise the installed checker against corpora produced by
# the generator CLI; without either package they cannot run at all.
pytest.importorskip("corpus_checker", reason="corpus-checker is not installed")
pytest.importorskip("archprobe", reason="the generator package is not installed")


def generate_corpora(seeds: list[int], out_dir: Path) -> None:
    """Build fixture corpora through the generator's public CLI only."""
    executable = shutil.which("archprobe")
    if executable is not None:
        command = [executable]
    else:
        command = [sys.executable, "-m", "archprobe.cli"]
    command += ["generate", "--seeds", *[str(s) for s in seeds], "--out", str(out_dir)]
    proc = subprocess.run(command, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"corpus generation failed: {proc.stderr}")


@pytest.fixture(scope="session")
def corpus_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    generate_corpora(list(range(1, 11)), out)
    return out


@pytest.fixture()
def seed42_corpus(tmp_path):
    generate_corpora([42], tmp_path)
    return tmp_path / "seed_42"
