"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest,
which repeats the lines in its terminal summary.
"""

from __future__ import annotations

import io
import random
import sys
import tempfile
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from conftest import outcome  # noqa: E402

from predicator import kernels  # noqa: E402
from predicator.cli import main as cli_main  # noqa: E402
from predicator.features import extract_features  # noqa: E402
from predicator.ifconv import apply_bitmask, module_candidates  # noqa: E402
from predicator.ir import InterpreterError, analyze_cfg, interpret  # noqa: E402
from predicator.neat import NeatConfig, check_population  # noqa: E402
from predicator.sim import MachineModel, simulate  # noqa: E402
from predicator.tuner import Program, Workload, exhaustive_search, tune  # noqa: E402

MM = MachineModel()
RESULTS: dict[int, tuple[bool, str]] = {}
TITLES = {
    1: "semantic preservation",
    2: "all-zeros identity",
    3: "oracle convergence",
    4: "speedup existence on sortcmp",
    5: "NEAT structural invariants",
    6: "feature invariants",
    7: "simulator sanity",
    8: "reproducible tune bundles",
}
TUNE_SEEDS = (1, 2, 3, 4, 5)


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n} ({TITLES[n]}): {detail}", flush=True)
    assert ok, detail


def program(k):
    return Program.build(k.module, MM), [Workload(k.name, k.inputs)]


def safe_workloads(k, rng, count):
    out = []
    while len(out) < count:
        i = k.random_inputs(rng)
        try:
            interpret(k.module, k.name, i)
        except InterpreterError:
            continue
        out.append(i)
    return out


def test_semantic_preservation():
    start, checked, mismatches, traps = time.perf_counter(), 0, [], 0
    for k in kernels.all_kernels():
        m = k.module
        rng = random.Random(f"acceptance-1-{k.name}")
        cands = module_candidates(m)
        workloads = [k.random_inputs(rng) for _ in range(10)]
        expected = [outcome(m, k.name, w) for w in workloads]
        traps += sum(e[0] == "trap" for e in expected)
        converted = {}
        for _ in range(100):
            bits = tuple(rng.random() < 0.5 for _ in cands)
            if bits not in converted:
                m2 = apply_bitmask(m, bits, cands)[0]
                converted[bits] = [outcome(m2, k.name, w) for w in workloads]
            for w, want, got in zip(workloads, expected, converted[bits]):
                checked += 1
                if got != want:
                    mismatches.append((k.name, bits, w))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 60
    record(1, ok, f"{checked} (bitmask, workload) pairs, {len(mismatches)} mismatches, "
                  f"{traps} trapping workloads, {elapsed:.1f}s (limit 60s)")


def test_identity():
    bad = []
    for k in kernels.all_kernels():
        m = k.module
        m2, rep = apply_bitmask(m, [0] * len(module_candidates(m)))
        if m2 != m or rep.converted or simulate(m2, k.name, k.inputs, MM) != simulate(
                m, k.name, k.inputs, MM):
            bad.append(k.name)
    record(2, not bad, f"{len(kernels.NAMES)} kernels checked, differences: {bad or 'none'}")


def test_oracle_convergence():
    start, lines, ok = time.perf_counter(), [], True
    for k in kernels.all_kernels():
        p, ws = program(k)
        if len(p) > 10:
            continue
        opt = exhaustive_search(p, ws, MM).optimal_speedup
        hits = sum(tune(p, ws, NeatConfig(), MM, s).best_fitness >= 0.95 * opt for s in TUNE_SEEDS)
        ok &= hits >= 4
        lines.append(f"{k.name} {hits}/5 (opt {opt:.4f})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 600
    record(3, ok, "; ".join(lines) + f"; {elapsed:.1f}s (limit 600s)")


def test_sortcmp_speedup():
    p, ws = program(kernels.load("sortcmp"))
    o = exhaustive_search(p, ws, MM)
    r = tune(p, ws, NeatConfig(), MM, 7)
    ok = o.optimal_speedup >= 1.05 and r.best_fitness >= 1.04
    record(4, ok, f"oracle {o.optimal_speedup:.4f} (need >= 1.05, bitmask {o.optimal_bitmask}), "
                  f"tune {r.best_fitness:.4f} (need >= 1.04, bitmask {r.best_bitmask}), "
                  f"baseline bitmask {o.baseline_bitmask}")


def test_neat_invariants():
    cfg = NeatConfig()
    failures, generations = [], 0

    for k in kernels.all_kernels():
        p, ws = program(k)
        seen = []

        def check(pop, species):
            nonlocal generations
            generations += 1
            if pop.generation == 0 and any(g.hidden_count for g in pop.genomes):
                failures.append(f"{k.name}: hidden nodes in the initial population")
            try:
                check_population(pop, species, cfg)
            except ValueError as e:
                failures.append(f"{k.name} generation {pop.generation}: {e}")
            seen.append(pop.generation)

        tune(p, ws, cfg, MM, 11, on_generation=check)
        if seen != list(range(cfg.generations)):
            failures.append(f"{k.name}: generations {seen[:3]}...")
    record(5, not failures, f"{generations} generations checked, "
                            f"violations: {failures[:3] or 'none'}")


def test_feature_invariants():
    bad, count = [], 0
    for k in kernels.all_kernels():
        m = k.module
        mems = {d.name: d.length for d in m.memories}
        for c in module_candidates(m):
            f = m.function(c.function)
            cfg = analyze_cfg(f)
            fv = extract_features(f, c, MM, cfg, mems)
            count += 1
            if not (fv.min_cp == min(fv.true_cp, fv.false_cp) and fv.slack_sum >= 0
                    and fv.unexploited_ilp * fv.merged_cp == fv.merged_latency
                    and fv == extract_features(f, c, MM, analyze_cfg(f), mems)):
                bad.append(f"{k.name}:{c.site}")
    record(6, not bad, f"{count} candidates checked, violations: {bad or 'none'}")


def test_simulator_sanity():
    problems, runs = [], 0
    for k in kernels.all_kernels():
        m = k.module
        rng = random.Random(f"acceptance-7-{k.name}")
        for w in [k.inputs] + safe_workloads(k, rng, 5):
            runs += 1
            two = simulate(m, k.name, w, MM)
            orc = simulate(m, k.name, w, MM.with_(predictor="oracle"))
            if orc.cycles > two.cycles:
                problems.append(f"{k.name}: oracle {orc.cycles} > twobit {two.cycles}")
            cyc = [simulate(m, k.name, w, MM.with_(mispredict_penalty=q)).cycles
                   for q in (0, 7, 14, 28)]
            if cyc != sorted(cyc):
                problems.append(f"{k.name}: cycles {cyc} not monotone in penalty")
    a = kernels.load("abs")
    full, _ = apply_bitmask(a.module, [1] * len(module_candidates(a.module)))
    zero_branches = all(simulate(full, "abs", w, MM).branches == 0
                        for w in [a.inputs] + safe_workloads(a, random.Random(7), 5))
    if not zero_branches:
        problems.append("converted abs still executes branches")
    record(7, not problems, f"{runs} (kernel, workload) runs, converted abs branch-free: "
                            f"{zero_branches}, problems: {problems[:3] or 'none'}")


def test_reproducible_bundles():
    diffs, compared = [], 0
    with tempfile.TemporaryDirectory() as tmp:
        for name in ("sortcmp", "statemach"):
            dirs = []
            for run in ("a", "b"):
                out = Path(tmp) / name / run
                argv = ["tune", str(kernels.path(f"{name}.ir")), "--inputs",
                        str(kernels.path(f"{name}.in")), "--machine",
                        str(kernels.path("default.cfg")), "--seed", "7", "--out", str(out)]
                if cli_main(argv, io.StringIO()) != 0:
                    diffs.append(f"{name}: tune exited non-zero")
                dirs.append(out)
            files = sorted(p.name for p in dirs[0].iterdir())
            if files != sorted(p.name for p in dirs[1].iterdir()):
                diffs.append(f"{name}: file sets differ")
            for f in files:
                compared += 1
                if (dirs[0] / f).read_bytes() != (dirs[1] / f).read_bytes():
                    diffs.append(f"{name}/{f}")
    record(8, not diffs, f"{compared} bundle files compared byte for byte, "
                         f"differences: {diffs or 'none'}")


CRITERIA = [
    test_semantic_preservation, test_identity, test_oracle_convergence, test_sortcmp_speedup,
    test_neat_invariants, test_feature_invariants, test_simulator_sanity,
    test_reproducible_bundles,
]


if __name__ == "__main__":
    failed = 0
    for fn in CRITERIA:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
