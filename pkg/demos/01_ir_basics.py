"""Parse, validate, analyze and run a small program.

The IR is a tiny SSA language: every value is a 64-bit integer, blocks end
in br/jmp/ret and joins are expressed with phi nodes.
"""

from predicator import kernels
from predicator.ir import Inputs, analyze_cfg, branch_sites, interpret, validate_module

k = kernels.load("abs")
print(k.source)

m = k.module
print("diagnostics:", validate_module(m) or "none")

f = m.functions[0]
cfg = analyze_cfg(f)
print("immediate dominators:", cfg.idom)
print("dominator-tree post-order:", cfg.postorder)
print("branch sites:", branch_sites(m))

# the interpreter returns the value, final memory, a dynamic trace and the
# branch outcome stream that the simulator replays
for x in (-5, 7):
    r = interpret(m, "abs", Inputs({"x": x}))
    print(f"\nabs({x}) = {r.value} in {r.steps} steps, branches {r.branches}")
    for e in r.trace:
        print(f"  {e.block:6} #{e.index} {e.opcode:9} {e.values}")
