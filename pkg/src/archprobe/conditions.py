"""Run-condition drivers: active exploration plus the three passive
information-delivery conditions used for gap decomposition.

All four drivers produce the same :class:`~archprobe.trajectory.Trajectory`
shape.  Scheduled probes fire every ``probe_interval`` costed actions
and never touch the budget; one additional cost-free terminal probe at
session end supplies the final map (so even an agent that stops
immediately, like the oracle, externalizes a belief).
"""

from __future__ import annotations

from .agents import AgentPolicy
from .belief import CognitiveMap, ParseReport, ProbeParseError, parse_probe
from .environment import (
    DONE,
    Action,
    Codebase,
    Observation,
    Session,
    probe_due,
    record_probe,
    step,
)
from .llm import TRACK_NO_PROBE, TRACK_SCRATCHPAD
from .trajectory import ProbeRecord, StepRecord, Trajectory, payload_digest
from .worldmodel import GroundTruth, connectivity_rank

CONDITION_ACTIVE = "active"
CONDITION_PASSIVE_FULL = "passive_full"
CONDITION_PASSIVE_ORACLE = "passive_oracle"
CONDITION_PASSIVE_REPLAY = "passive_replay"
CONDITIONS = (CONDITION_ACTIVE, CONDITION_PASSIVE_FULL,
              CONDITION_PASSIVE_ORACLE, CONDITION_PASSIVE_REPLAY)

PRESENT_ALL = "PRESENT_ALL"


class ConditionError(RuntimeError):
    """A condition was invoked with inputs it must refuse."""


def _probe_record(agent: AgentPolicy, session: Session) -> ProbeRecord:
    raw = agent.on_probe(session)
    try:
        cmap, report = parse_probe(raw, probe_step=session.actions_taken)
    except ProbeParseError:
        cmap = CognitiveMap(probe_step=session.actions_taken)
        report = ParseReport(success=False)
    return ProbeRecord(
        step=session.actions_taken,
        opens=session.opened_count(),
        raw_text=raw,
        cognitive_map=cmap,
        parse_report=report,
    )


def _new_trajectory(run_id: str, agent: AgentPolicy, condition: str, mode: str,
                    seed: int, session: Session, prompt_version: str = "") -> Trajectory:
    return Trajectory(
        run_id=run_id,
        agent=agent.name,
        condition=condition,
        tracking_mode=mode,
        seed=seed,
        budget=session.budget,
        probe_interval=session.probe_interval,
        codebase_root=session.codebase.root,
        codebase_hash=session.codebase.content_hash(),
        prompt_version=prompt_version,
    )


def _record_step(traj: Trajectory, action: Action, obs: Observation) -> None:
    traj.steps.append(StepRecord(
        index=len(traj.steps) + 1,
        action=action,
        obs_kind=obs.kind,
        obs_digest=payload_digest(obs.payload),
        budget_remaining=obs.budget_remaining,
    ))


def _maybe_probe(traj: Trajectory, agent: AgentPolicy, session: Session, mode: str) -> None:
    if mode == TRACK_NO_PROBE:
        return
    if probe_due(session):
        record_probe(session)
        before = session.budget_remaining
        traj.probes.append(_probe_record(agent, session))
        assert session.budget_remaining == before, "a probe consumed budget"


def run_active(agent: AgentPolicy, codebase: Codebase, *, budget: int = 20,
               probe_interval: int = 3, mode: str = TRACK_SCRATCHPAD,
               seed: int = 0, run_id: str = "active-run",
               prompt_version: str = "") -> Trajectory:
    """The agent drives its own exploration under the budget."""
    session = Session(codebase, budget=budget, probe_interval=probe_interval)
    agent.begin(session)
    traj = _new_trajectory(run_id, agent, CONDITION_ACTIVE, mode, seed, session, prompt_version)
    while not session.terminated:
        _maybe_probe(traj, agent, session, mode)
        if session.budget_remaining <= 0:
            action = Action(DONE)
        else:
            action = agent.next_action(session)
        obs = step(session, action)
        agent.observe(action, obs)
        _record_step(traj, action, obs)
    traj.final = _probe_record(agent, session)
    traj.invalid_actions = session.invalid_actions
    return traj


def run_passive_full(agent: AgentPolicy, codebase: Codebase, *, budget: int = 20,
                     probe_interval: int = 3, mode: str = TRACK_SCRATCHPAD,
                     seed: int = 0, run_id: str = "passive-full-run",
                     prompt_version: str = "") -> Trajectory:
    """Every file is presented at once; the agent is probed exactly once."""
    session = Session(codebase, budget=budget, probe_interval=probe_interval)
    agent.begin(session)
    traj = _new_trajectory(run_id, agent, CONDITION_PASSIVE_FULL, mode, seed, session, prompt_version)
    dump = "\n\n".join(f"### FILE: {path}\n{text}" for path, text in sorted(codebase.files.items()))
    observe_all = getattr(agent, "observe_all", None)
    if observe_all is not None:
        observe_all(codebase.files)
    else:  # pragma: no cover - every shipped agent defines observe_all or observe
        for path, text in sorted(codebase.files.items()):
            agent.observe(Action("OPEN", path), Observation("OPEN", text, budget))
    traj.steps.append(StepRecord(
        index=1,
        action=Action(PRESENT_ALL),
        obs_kind=PRESENT_ALL,
        obs_digest=payload_digest(dump),
        budget_remaining=budget,
    ))
    probe = _probe_record(agent, session)
    traj.probes.append(probe)
    traj.final = probe
    return traj


def run_passive_oracle(agent: AgentPolicy, codebase: Codebase, gt: GroundTruth, *,
                       budget: int = 20, probe_interval: int = 3,
                       mode: str = TRACK_SCRATCHPAD, seed: int = 0,
                       run_id: str = "passive-oracle-run",
                       prompt_version: str = "") -> Trajectory:
    """Top-budget files by ground-truth connectivity, one per step."""
    session = Session(codebase, budget=budget, probe_interval=probe_interval)
    agent.begin(session)
    traj = _new_trajectory(run_id, agent, CONDITION_PASSIVE_ORACLE, mode, seed, session, prompt_version)
    ranked = [path for path in connectivity_rank(gt) if codebase.has_file(path)][:budget]
    for path in ranked:
        _maybe_probe(traj, agent, session, mode)
        action = Action("OPEN", path)
        obs = step(session, action)
        agent.observe(action, obs)
        _record_step(traj, action, obs)
    _maybe_probe(traj, agent, session, mode)
    traj.final = _probe_record(agent, session)
    return traj


def run_passive_replay(agent: AgentPolicy, codebase: Codebase, source: Trajectory, *,
                       probe_interval: int = 3, mode: str = TRACK_SCRATCHPAD,
                       seed: int = 0, run_id: str = "passive-replay-run",
                       prompt_version: str = "") -> Trajectory:
    """Replays a recorded observation trace verbatim; no agent decisions.

    Refuses trajectories recorded on a different codebase, and verifies
    each regenerated observation against the recorded digest so replay
    fidelity is checked on every step.
    """
    if source.codebase_hash != codebase.content_hash():
        raise ConditionError(
            f"replay source {source.run_id!r} was recorded on codebase "
            f"{source.codebase_hash[:12]}..., not this one"
        )
    replayable = [rec for rec in source.steps if rec.action.kind != DONE]
    if any(rec.action.kind == PRESENT_ALL for rec in replayable):
        raise ConditionError("passive-full trajectories cannot be replayed step-wise")
    session = Session(codebase, budget=source.budget, probe_interval=probe_interval)
    agent.begin(session)
    traj = _new_trajectory(run_id, agent, CONDITION_PASSIVE_REPLAY, mode, seed, session, prompt_version)
    for rec in replayable:
        _maybe_probe(traj, agent, session, mode)
        obs = step(session, rec.action)
        if payload_digest(obs.payload) != rec.obs_digest:
            raise ConditionError(
                f"replay diverged at step {rec.index}: observation digest mismatch"
            )
        agent.observe(rec.action, obs)
        _record_step(traj, rec.action, obs)
    _maybe_probe(traj, agent, session, mode)
    traj.final = _probe_record(agent, session)
    traj.invalid_actions = session.invalid_actions
    return traj


def run_condition(agent: AgentPolicy, codebase: Codebase, condition: str, *,
                  gt: GroundTruth | None = None, source: Trajectory | None = None,
                  budget: int = 20, probe_interval: int = 3,
                  mode: str = TRACK_SCRATCHPAD, seed: int = 0,
                  run_id: str = "run", prompt_version: str = "") -> Trajectory:
    """Dispatch to one of the four condition drivers."""
    common = dict(budget=budget, probe_interval=probe_interval, mode=mode,
                  seed=seed, run_id=run_id, prompt_version=prompt_version)
    if condition == CONDITION_ACTIVE:
        return run_active(agent, codebase, **common)
    if condition == CONDITION_PASSIVE_FULL:
        return run_passive_full(agent, codebase, **common)
    if condition == CONDITION_PASSIVE_ORACLE:
        if gt is None:
            raise ConditionError("passive-oracle requires the ground truth for file ranking")
        return run_passive_oracle(agent, codebase, gt, **common)
    if condition == CONDITION_PASSIVE_REPLAY:
        if source is None:
            raise ConditionError("passive-replay requires a source trajectory")
        common.pop("budget")
        return run_passive_replay(agent, codebase, source, **common)
    raise ConditionError(f"unknown condition {condition!r}")
