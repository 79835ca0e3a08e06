"""The full loop: features feed a shared network, its outputs form a bitmask,
the bitmask drives if-conversion and simulated speedup over the static
heuristic is the fitness.  The exhaustive oracle checks the answer."""

from predicator import kernels
from predicator.neat import NeatConfig
from predicator.report import emit_report
from predicator.sim import MachineModel
from predicator.tuner import Program, Workload, exhaustive_search, tune

mm = MachineModel()
for name in ("statemach", "sortcmp"):
    k = kernels.load(name)
    p = Program.build(k.module, mm)
    ws = [Workload(name, k.inputs)]
    oracle = exhaustive_search(p, ws, mm)
    result = tune(p, ws, NeatConfig(), mm, seed=7)
    print(f"== {name}")
    print(f"  exhaustive table: {[(b, round(s, 4)) for b, s in oracle.table]}")
    print(f"  oracle best {oracle.optimal_bitmask} at {oracle.optimal_speedup:.4f}")
    print(f"  tuned best  {result.best_bitmask} at {result.best_fitness:.4f}")
    for h in result.history[:5]:
        print(f"    gen {h.generation}: best {h.best_fitness:.4f} species {h.species_count}")
    print(emit_report(result)["summary.csv"])
