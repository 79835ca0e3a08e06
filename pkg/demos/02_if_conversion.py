"""Find if-conversion candidates, explain why others are rejected, and apply
a bitmask of convert/keep decisions."""

from predicator import kernels
from predicator.ifconv import apply_bitmask, check_legality, module_candidates
from predicator.ir import Br, analyze_cfg, print_module

k = kernels.load("nested")
m = k.module
f = m.functions[0]
cfg = analyze_cfg(f)

print("every branch in @nested:")
for b in f.blocks:
    if isinstance(b.terminator, Br):
        leg = check_legality(f, b.label, cfg, {"a": 256})
        verdict = "candidate" if leg.legal else "rejected: " + ", ".join(leg.reasons)
        print(f"  {b.label:6} {verdict}")

cands = module_candidates(m)
print("\ncandidates (inner branches come first):")
for c in cands:
    print(f"  #{c.index} {c.site} {c.shape:15} head={c.head} join={c.join}")

converted, report = apply_bitmask(m, "10")
print("\napply report:\n" + report.to_csv())
print(print_module(converted))
