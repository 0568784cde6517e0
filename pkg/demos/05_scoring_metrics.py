"""Scoring walkthrough: edge matching rules, invariant matching, ECE.

Dependency edges match on exact (source, target, type) equality, so
directory-level targets and symbol-qualified targets earn nothing
against file-level ground truth.  Invariants match on their canonical
(type, src, dst, via) form, strictly or relaxed.
"""

from archprobe import dep_score, ece, generate, inv_score_relaxed, inv_score_strict

gt = generate(seed=42).ground_truth

# The granularity traps: same relationships, wrong shapes.
some_wire = next(e for e in gt.edges if e.type.value == "REGISTRY_WIRES")
exact = {(some_wire.src, some_wire.dst, "REGISTRY_WIRES")}
directory_level = {(some_wire.src, some_wire.dst.rsplit("/", 1)[0] + "/", "REGISTRY_WIRES")}
symbol_qualified = {(some_wire.src, some_wire.dst + "::StageClass", "REGISTRY_WIRES")}

for label, pred in (("file-level", exact), ("directory-level", directory_level),
                    ("symbol-qualified", symbol_qualified)):
    score = dep_score(pred, gt)
    print(f"{label:<17} tp={score.tp}  precision={score.precision:.2f}")

# Invariants: strict wants the exact four fields; relaxed strips
# directory prefixes and treats empty ground-truth fields as wildcards.
boundary = next(c for c in gt.constraints if c.type.value == "BOUNDARY")
print(f"\nplanted constraint: {boundary.tuple4()}")
prefixed = [("BOUNDARY", "pipeline/" + boundary.src, boundary.dst, "")]
print("strict  on prefixed paths:", inv_score_strict(prefixed, [boundary]).tp)
print("relaxed on prefixed paths:", inv_score_relaxed(prefixed, [boundary]).tp)

# Calibration: every predicted edge contributes (confidence, correct).
items = [(0.9, True), (0.9, True), (0.9, False), (0.5, True), (0.1, False)]
print(f"\nECE over {len(items)} predictions: {ece(items):.3f}")
print("perfect calibration scores 0; confident wrongness scores high.")
