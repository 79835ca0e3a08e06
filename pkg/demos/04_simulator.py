"""How branch prediction and the misprediction penalty shape cycle counts,
and why converting an unpredictable branch pays off."""

from predicator import kernels
from predicator.ifconv import apply_bitmask
from predicator.sim import MachineModel, simulate, speedup

k = kernels.load("sortcmp")
m = k.module
converted, _ = apply_bitmask(m, "1")

print("predictor      branch    select   speedup")
for pred in ("twobit", "always_taken", "oracle"):
    mm = MachineModel(predictor=pred)
    a, b = simulate(m, "sortcmp", k.inputs, mm), simulate(converted, "sortcmp", k.inputs, mm)
    print(f"{pred:12} {a.cycles:8} {b.cycles:9} {float(speedup(a, b)):9.3f}")

print("\npenalty sweep (twobit): converting wins once mispredictions cost enough")
for penalty in (0, 7, 14, 28):
    mm = MachineModel(mispredict_penalty=penalty)
    a, b = simulate(m, "sortcmp", k.inputs, mm), simulate(converted, "sortcmp", k.inputs, mm)
    print(f"  penalty {penalty:2}: {a.cycles:6} vs {b.cycles:6} cycles, "
          f"{a.mispredictions} mispredictions removed")
