"""Repair-parse messy probe responses into cognitive maps.

Model output rarely arrives as clean JSON.  The parser applies a fixed,
closed repair sequence (fences, balanced-brace extraction, trailing
commas, single quotes, verbal confidences, field defaults) and logs
every rule it used, so the same text always produces the same map and
the same repair trail.
"""

from archprobe import parse_probe
from archprobe.belief import ProbeParseError

messy = """Sure! Here is my current architectural belief:

```json
{'components': [
   {'path': 'Registry.py', 'status': 'observed', 'purpose': 'loads stages',
    'exports': [], 'edges': [
       {'dst': 'config.py', 'type': 'IMPORTS', 'confidence': 'high'},
       {'dst': 'stages/mod_a.py', 'type': 'REGISTRY_WIRES', 'confidence': 0.8},
    ]},
 ],
 'invariants': [{'type': 'BOUNDARY', 'pattern': 'stages never import stages'}],
 'unexplored': ['legacy/']}
```
Happy to refine this as I read more."""

cmap, report = parse_probe(messy)
print("repairs applied:", report.repairs)
print("dropped fragments:", report.dropped)
for comp in cmap.components:
    print(f"\n{comp.path} [{comp.status}]")
    for dst, edge_type, confidence in comp.edges:
        print(f"  -> {dst}  {edge_type}  confidence={confidence}")
for inv in cmap.invariants:
    print(f"\ninvariant: {inv.tuple5()}")

# Deterministic: parsing the same text twice is bit-identical.
again, report2 = parse_probe(messy)
assert again.to_json() == cmap.to_json() and report2.repairs == report.repairs
print("\nre-parse is bit-identical")

# Text with no balanced JSON object raises a typed error, never a crash.
try:
    parse_probe("I have not formed a belief yet.")
except ProbeParseError as err:
    print(f"unparseable text -> {type(err).__name__}")
