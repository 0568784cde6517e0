"""Wire up the LLM agent without a network: inject a transport.

The agent speaks a generic chat-completions shape, so any callable
returning ``{"choices": [{"message": {"content": ...}}]}`` can stand in
for a provider.  This demo scripts a tiny exploration, then shows the
probe-tracking modes' effect on what the agent gets to see of its own
prior beliefs.
"""

import os

from archprobe import Codebase, dep_score, extract_edges, generate, run_active
from archprobe.llm import LlmAgent, ProviderConfig

os.environ.setdefault("DEMO_PROVIDER_KEY", "sk-demo-offline")

provider = ProviderConfig(
    name="offline-demo",
    base_url="https://example.invalid/v1",
    model="scripted-model",
    api_key_env="DEMO_PROVIDER_KEY",
    rate_limit_per_min=100000,
)

PROBE_REPLY = (
    '{"components": [{"path": "registry.py", "status": "observed",'
    ' "purpose": "loads stages from config", "exports": [],'
    ' "edges": [{"dst": "config.py", "type": "IMPORTS", "confidence": 0.9}]}],'
    ' "invariants": [], "unexplored": ["stages/"]}'
)

script = iter([
    "LIST()",
    "OPEN(pipeline_config.json)",
    "OPEN(registry.py)",
    PROBE_REPLY,        # the scheduled probe after three actions
    "DONE()",
    PROBE_REPLY,        # the terminal probe
])


def scripted_transport(url, headers, payload):
    reply = next(script)
    print(f"  request {len(payload['messages']):>2} messages -> reply {reply.split('(')[0][:20]!r}")
    return {"choices": [{"message": {"content": reply}}]}


rendered = generate(seed=42)
agent = LlmAgent(provider, tracking_mode="scratchpad", transport=scripted_transport,
                 sleeper=lambda _s: None)
traj = run_active(agent, Codebase.from_rendered(rendered), budget=20, probe_interval=3)

gt = rendered.ground_truth
score = dep_score(extract_edges(traj.final_map()), gt)
print(f"\nrequests made: {agent.request_count} "
      f"(bound: budget + budget // interval + 1 = {20 + 20 // 3 + 1})")
print(f"probes recorded: {len(traj.probes)} scheduled + 1 terminal")
print(f"final dep F1 of the scripted belief: {score.f1:.3f}")
print("\ntracking modes: scratchpad retains probe JSON in context,")
print("probe_only strips it after collection, no_probe skips scheduled")
print("probes entirely and relies on the single terminal probe.")
