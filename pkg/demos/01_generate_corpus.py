"""Generate a benchmark corpus and look at what was planted.

Every corpus is a runnable Python package with a known architecture:
stages wired through a config-driven registry, adapters, middleware,
utility modules, and legacy distractors.  The matching ground truth
(typed dependency edges plus architectural constraints) is derived from
the same plan that rendered the files.
"""

from archprobe import generate, statistics, write_codebase

rendered = generate(seed=42)
print(f"root package: {rendered.root}")
print(f"files: {len(rendered.files)}")

stats = statistics(rendered)
print(f"\nmodules={stats['modules']}  sub-packages={stats['sub_packages']}  "
      f"constraints={stats['constraints']}")
for edge_type, count in stats["edges"].items():
    print(f"  {edge_type:<15} {count:>3}  ({100 * count / stats['edges_total']:.0f}%)")

# The registry wires stages dynamically: the config lists neutral module
# names, and no import statement anywhere names a stage module.
print("\npipeline_config.json:")
print(rendered.files["pipeline_config.json"])

print("one stage file, neutral name and all:")
stage_path = next(m.path for m in rendered.ground_truth.modules if m.role == "stage")
print(f"--- {stage_path} ---")
print(rendered.files[stage_path])

# Write the tree plus its sibling ground_truth.json to disk.
tree = write_codebase(rendered, "demo_out/seed_42")
print(f"written to {tree}")
