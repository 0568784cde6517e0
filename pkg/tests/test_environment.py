from __future__ import annotations

import pytest

from archprobe.environment import (
    DONE,
    LIST,
    NOT_FOUND,
    OPEN,
    Action,
    Codebase,
    Session,
    SessionError,
    inspect,
    probe_due,
    record_probe,
    search,
    step,
)

from oracles import ref_grep


@pytest.fixture
def session(seed42_codebase):
    return Session(seed42_codebase, budget=20, probe_interval=3)


def test_open_returns_full_text_and_costs_one(session):
    obs = step(session, Action(OPEN, "registry.py"))
    assert obs.kind == OPEN
    assert obs.payload == session.codebase.read("registry.py")
    assert obs.budget_remaining == 19
    assert "registry.py" in session.opened


def test_done_costs_nothing_and_terminates(session):
    for _ in range(13):
        step(session, Action(LIST, ""))
    assert session.budget_remaining == 7
    obs = step(session, Action(DONE))
    assert obs.budget_remaining == 7
    assert session.terminated


def test_list_returns_names_only_without_recursion(session):
    obs = step(session, Action(LIST, ""))
    entries = obs.payload.splitlines()
    assert "registry.py" in entries
    assert "stages/" in entries
    assert not any("/" in e and not e.endswith("/") for e in entries)
    nested = step(session, Action(LIST, "legacy"))
    assert "archive/" in nested.payload.splitlines()


def test_search_returns_locations_never_content(session):
    obs = step(session, Action(SEARCH := "SEARCH", "StageBase") if False else Action("SEARCH", "StageBase"))
    lines = obs.payload.splitlines()
    assert lines, "corpus must mention StageBase somewhere"
    for line in lines:
        path, _, number = line.rpartition(":")
        assert path in session.codebase.files
        assert number.isdigit()


def test_search_matches_grep_reference(seed42_codebase):
    for query in ("import", "StageBase", "def process", "zz-no-such-text"):
        expected = ref_grep(seed42_codebase.files, query)
        assert search(seed42_codebase, query) == expected


def test_search_orders_multiple_hits_within_a_file():
    codebase = Codebase("tiny", {"one.py": "x = 1\nneedle\ny\nneedle near needle\n"})
    assert search(codebase, "needle") == [("one.py", 2), ("one.py", 4)]


def test_empty_search_query_is_a_wasted_action(session):
    obs = step(session, Action("SEARCH", ""))
    assert obs.kind == NOT_FOUND
    assert obs.budget_remaining == 19


def test_not_found_costs_one_action(session):
    obs = step(session, Action(OPEN, "nope/missing.py"))
    assert obs.kind == NOT_FOUND
    assert obs.budget_remaining == 19
    assert session.actions_taken == 1


def test_action_after_termination_is_a_usage_error(session):
    step(session, Action(DONE))
    with pytest.raises(SessionError):
        step(session, Action(OPEN, "cli.py"))


def test_exhausted_budget_accepts_only_done(seed42_codebase):
    session = Session(seed42_codebase, budget=2, probe_interval=3)
    step(session, Action(OPEN, "cli.py"))
    step(session, Action(OPEN, "runner.py"))
    with pytest.raises(SessionError):
        step(session, Action(OPEN, "base.py"))
    obs = step(session, Action(DONE))
    assert obs.kind == DONE


def test_probe_due_schedule(session):
    assert not probe_due(session)  # zero actions taken
    for _ in range(3):
        step(session, Action(LIST, ""))
    assert probe_due(session)
    before = session.budget_remaining
    record_probe(session)
    assert session.budget_remaining == before  # probing is free
    assert not probe_due(session)  # no double probe at one count
    step(session, Action(LIST, ""))
    assert not probe_due(session)  # 4 % 3 != 0


@pytest.mark.parametrize("budget,interval", [(20, 3), (10, 3), (9, 2), (7, 7)])
def test_probe_count_is_floor_of_actions_over_interval(seed42_codebase, budget, interval):
    session = Session(seed42_codebase, budget=budget, probe_interval=interval)
    probes = 0
    while session.budget_remaining > 0:
        step(session, Action(LIST, ""))
        if probe_due(session):
            record_probe(session)
            probes += 1
    assert probes == session.actions_taken // interval


def test_inspect_class_returns_header_and_docstring_no_body(seed42_codebase):
    text = inspect(seed42_codebase, "base.py", "StageBase")
    assert text is not None
    assert text.startswith("class StageBase")
    assert "Common contract" in text
    assert "def __init__" not in text
    assert "self.options" not in text


def test_inspect_function_without_docstring_is_header_only(seed42_codebase):
    text = inspect(seed42_codebase, "utils/formatters.py", "format_record")
    assert text == "def format_record(record: Record) -> str:"


def test_inspect_nested_symbol_is_not_found(seed42_codebase, session):
    assert inspect(seed42_codebase, "base.py", "process") is None
    obs = step(session, Action("INSPECT", "base.py", "process"))
    assert obs.kind == NOT_FOUND
    assert obs.budget_remaining == 19


def test_inspect_non_python_file_is_not_found(session):
    obs = step(session, Action("INSPECT", "pipeline_config.json", "stages"))
    assert obs.kind == NOT_FOUND


def test_replay_of_action_sequence_is_byte_identical(seed42_codebase):
    script = [
        Action(LIST, ""), Action(OPEN, "registry.py"), Action("SEARCH", "import"),
        Action("INSPECT", "base.py", "StageBase"), Action(OPEN, "missing.py"),
        Action(OPEN, "registry.py"),  # re-opening costs again
        Action(DONE),
    ]

    def run():
        session = Session(seed42_codebase, budget=20, probe_interval=3)
        return [step(session, action) for action in script]

    first = run()
    second = run()
    assert [(o.kind, o.payload, o.budget_remaining) for o in first] == \
           [(o.kind, o.payload, o.budget_remaining) for o in second]
    # re-opening the same file consumed budget both times
    assert first[-1].budget_remaining == 20 - 6


def test_codebase_from_dir_matches_rendered(tmp_path, seed42):
    from archprobe.codegen import write_codebase

    tree = write_codebase(seed42, tmp_path)
    loaded = Codebase.from_dir(tree)
    assert loaded.files == seed42.files
    assert loaded.content_hash() == Codebase.from_rendered(seed42).content_hash()
