"""Explore a corpus under a hard action budget.

Five actions exist: LIST, OPEN, SEARCH, INSPECT (each costs 1) and DONE
(free).  Misses return NOT_FOUND and still cost an action.  Every
``probe_interval`` costed actions a belief probe comes due; probing is
free, so measurement never competes with exploration.
"""

from archprobe import Action, Codebase, Session, generate, probe_due, step

codebase = Codebase.from_rendered(generate(seed=42))
session = Session(codebase, budget=20, probe_interval=3)

for action in [
    Action("LIST", ""),
    Action("OPEN", "pipeline_config.json"),
    Action("OPEN", "registry.py"),
    Action("SEARCH", "StageBase"),
    Action("INSPECT", "base.py", "StageBase"),
    Action("OPEN", "stages/zzz.py"),        # a miss: NOT_FOUND, still costs 1
]:
    obs = step(session, action)
    preview = obs.payload.splitlines()[0] if obs.payload else ""
    print(f"{action.render():<38} -> {obs.kind:<10} budget {obs.budget_remaining:>2}  {preview[:50]}")
    if probe_due(session):
        print(f"{'':38}    ** probe due at action {session.actions_taken} (free) **")

print(f"\nopened files: {sorted(session.opened)}")
print(f"actions taken: {session.actions_taken} of {session.budget}")
