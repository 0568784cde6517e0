"""Trajectory records: the persisted trace of one exploration run.

Trajectories are stored as line-delimited JSON (one record per line) so
runs stream to disk append-only.  Observation payloads are stored as
SHA-256 digests; together with the corpus they reconstruct the full
observation sequence exactly, which is what passive replay relies on.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .belief import CognitiveMap, ParseReport, cognitive_map_from_dict
from .environment import Action


def payload_digest(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class StepRecord:
    index: int
    action: Action
    obs_kind: str
    obs_digest: str
    budget_remaining: int

    def to_dict(self) -> dict:
        return {
            "kind": "step",
            "index": self.index,
            "action": self.action.to_dict(),
            "obs_kind": self.obs_kind,
            "obs_digest": self.obs_digest,
            "budget_remaining": self.budget_remaining,
        }


@dataclass
class ProbeRecord:
    step: int                 # costed actions taken when the probe fired
    opens: int                # distinct files opened at that point
    raw_text: str
    cognitive_map: CognitiveMap
    parse_report: ParseReport

    def to_dict(self, kind: str = "probe") -> dict:
        return {
            "kind": kind,
            "step": self.step,
            "opens": self.opens,
            "raw": self.raw_text,
            "map": self.cognitive_map.to_dict(),
            "report": {
                "repairs": list(self.parse_report.repairs),
                "dropped": list(self.parse_report.dropped),
                "success": self.parse_report.success,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProbeRecord":
        report = ParseReport(
            repairs=list(doc["report"]["repairs"]),
            dropped=list(doc["report"]["dropped"]),
            success=bool(doc["report"]["success"]),
        )
        return cls(
            step=int(doc["step"]),
            opens=int(doc["opens"]),
            raw_text=doc["raw"],
            cognitive_map=cognitive_map_from_dict(doc["map"], probe_step=int(doc["step"])),
            parse_report=report,
        )


@dataclass
class Trajectory:
    run_id: str
    agent: str
    condition: str
    tracking_mode: str
    seed: int
    budget: int
    probe_interval: int
    codebase_root: str
    codebase_hash: str
    prompt_version: str = ""
    steps: list[StepRecord] = field(default_factory=list)
    probes: list[ProbeRecord] = field(default_factory=list)
    final: ProbeRecord | None = None
    invalid_actions: int = 0
    failed: bool = False
    failure: str = ""

    def final_map(self) -> CognitiveMap:
        if self.final is not None:
            return self.final.cognitive_map
        if self.probes:
            return self.probes[-1].cognitive_map
        return CognitiveMap()

    def files_opened(self) -> int:
        if self.final is not None:
            return self.final.opens
        if self.probes:
            return self.probes[-1].opens
        return 0

    def header_dict(self) -> dict:
        return {
            "kind": "header",
            "run_id": self.run_id,
            "agent": self.agent,
            "condition": self.condition,
            "tracking_mode": self.tracking_mode,
            "seed": self.seed,
            "budget": self.budget,
            "probe_interval": self.probe_interval,
            "codebase_root": self.codebase_root,
            "codebase_hash": self.codebase_hash,
            "prompt_version": self.prompt_version,
            "invalid_actions": self.invalid_actions,
        }


def save_trajectory(traj: Trajectory, path: str | Path) -> None:
    lines = [json.dumps(traj.header_dict())]
    lines += [json.dumps(step.to_dict()) for step in traj.steps]
    lines += [json.dumps(probe.to_dict()) for probe in traj.probes]
    if traj.final is not None:
        lines.append(json.dumps(traj.final.to_dict(kind="final")))
    if traj.failed:
        lines.append(json.dumps({"kind": "failure", "message": traj.failure}))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_trajectory(path: str | Path) -> Trajectory:
    lines = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    header = json.loads(lines[0])
    if header.get("kind") != "header":
        raise ValueError(f"{path}: first record is not a trajectory header")
    traj = Trajectory(
        run_id=header["run_id"],
        agent=header["agent"],
        condition=header["condition"],
        tracking_mode=header["tracking_mode"],
        seed=int(header["seed"]),
        budget=int(header["budget"]),
        probe_interval=int(header["probe_interval"]),
        codebase_root=header["codebase_root"],
        codebase_hash=header["codebase_hash"],
        prompt_version=header.get("prompt_version", ""),
        invalid_actions=int(header.get("invalid_actions", 0)),
    )
    for line in lines[1:]:
        doc = json.loads(line)
        kind = doc.get("kind")
        if kind == "step":
            traj.steps.append(StepRecord(
                index=int(doc["index"]),
                action=Action.from_dict(doc["action"]),
                obs_kind=doc["obs_kind"],
                obs_digest=doc["obs_digest"],
                budget_remaining=int(doc["budget_remaining"]),
            ))
        elif kind == "probe":
            traj.probes.append(ProbeRecord.from_dict(doc))
        elif kind == "final":
            traj.final = ProbeRecord.from_dict(doc)
        elif kind == "failure":
            traj.failed = True
            traj.failure = doc.get("message", "")
        else:
            raise ValueError(f"{path}: unknown trajectory record kind {kind!r}")
    return traj
