"""Belief stability across probes: catching collapse and recency bias.

Because probing yields a time-series of maps, probe-to-probe diffs
reveal dynamics a final snapshot hides: an agent that loses previously
correct edges between probes is collapsing its own belief state even
if its final score looks plausible.
"""

from archprobe import Codebase, dep_score, diff_maps, extract_edges, generate, run_active
from archprobe.agents import make_baseline
from archprobe.belief import CognitiveMap

rendered = generate(seed=42)
gt = rendered.ground_truth

traj = run_active(make_baseline("config-aware", gt=gt), Codebase.from_rendered(rendered),
                  budget=20, probe_interval=3)
chain = list(traj.probes) + [traj.final]
print("step  dep F1   lost  gained  (scanning baseline: growth is monotone)")
for prev, nxt in zip(chain, chain[1:]):
    delta = diff_maps(prev.cognitive_map, nxt.cognitive_map, gt)
    f1 = dep_score(extract_edges(nxt.cognitive_map), gt).f1
    print(f"{nxt.step:>4}  {f1:>6.3f} {delta['lost_correct_edges']:>6} {delta['gained_correct_edges']:>7}")

# The collapse signature: a later map that forgets what an earlier map
# knew shows up as a large lost-correct-edge count in a single probe.
rich = chain[-1].cognitive_map
collapsed = CognitiveMap(components=rich.components[:1])
delta = diff_maps(rich, collapsed, gt)
print(f"\nsimulated collapse: lost {delta['lost_correct_edges']} correct edges "
      f"and {delta['lost_components']} components in one probe")
