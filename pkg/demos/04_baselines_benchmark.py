"""Run the four rule-based baselines and compare their maps.

The oracle emits the ground truth directly (upper bound); config-aware
reads config/registry files first and recovers every registry wire;
random opens uniformly; BFS follows import chains and therefore never
reaches the registry-wired stages.
"""

from archprobe import Codebase, dep_score, extract_edges, generate, recall_by_type, run_active
from archprobe.agents import make_baseline

SEEDS = (42, 123, 999)

rows = []
for name in ("oracle", "config-aware", "random", "bfs-import"):
    f1s, wires, opened = [], [], []
    for seed in SEEDS:
        rendered = generate(seed)
        gt = rendered.ground_truth
        agent = make_baseline(name, gt=gt, seed=seed)
        traj = run_active(agent, Codebase.from_rendered(rendered), budget=20, probe_interval=3)
        edges = extract_edges(traj.final_map())
        f1s.append(dep_score(edges, gt).f1)
        wires.append(recall_by_type(edges, gt)["REGISTRY_WIRES"]["recall"])
        opened.append(traj.files_opened())
    mean = lambda xs: sum(xs) / len(xs)
    half = lambda xs: (max(xs) - min(xs)) / 2
    rows.append((name, mean(f1s), half(f1s), mean(wires), mean(opened)))

print(f"{'method':<14} {'dep F1':>14} {'wires recall':>13} {'files':>6}")
for name, f1, hr, wire_recall, files in rows:
    print(f"{name:<14} {f1:>8.3f}±{hr:.3f} {wire_recall:>13.2f} {files:>6.1f}")

print("\nimport-following alone cannot see a third of the edges: the")
print("registry wires and data flows leave no import trace at all.")
