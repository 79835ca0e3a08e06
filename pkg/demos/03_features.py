"""The eleven static features that describe each candidate, raw and
normalized to [0, 1] across the program."""

from predicator import kernels
from predicator.features import FEATURE_NAMES, fmt6
from predicator.sim import MachineModel
from predicator.tuner import Program

mm = MachineModel()
for name in ("statemach", "sortcmp"):
    p = Program.build(kernels.load(name).module, mm)
    print(f"== {name}: {len(p)} candidate(s), baseline decisions "
          f"{''.join('1' if b else '0' for b in p.baseline_bits(mm))}")
    for c, fv, nv in zip(p.candidates, p.features, p.normalized):
        print(f"  candidate {c.index} ({c.shape} at {c.head})")
        for feat, raw, norm in zip(FEATURE_NAMES, fv.as_tuple(), nv):
            print(f"    {feat:16} {fmt6(raw):>12}  ->  {fmt6(norm)}")
