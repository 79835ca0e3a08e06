"""Feature extraction -> network -> bitmask -> conversion -> simulation loop.

One network is shared by all candidates of a program: each candidate's
normalized feature vector is fed through it independently and the output
is thresholded into that candidate's bit.  Fitness is the geometric-mean
speedup over the module produced by the baseline heuristic.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .features import FeatureVector, NormalizedVector, extract_features, normalize_features
from .ifconv import Candidate, apply_bitmask, baseline_decide, format_bitmask, module_candidates
from .ir import (
    Inputs, InterpreterError, Module, analyze_cfg, interpret, print_module, validate_module,
)
from .neat import (
    Genome, NeatConfig, Population, SpeciesSet, activate, init_population,
    next_generation, speciate,
)
from .sim import MachineModel, SimResult, simulate, speedup

log = logging.getLogger(__name__)

Bits = tuple[bool, ...]


class TuneError(ValueError):
    pass


@dataclass(frozen=True)
class Workload:
    name: str
    inputs: Inputs


@dataclass(frozen=True)
class Program:
    module: Module
    entry: str
    candidates: tuple[Candidate, ...]
    features: tuple[FeatureVector, ...]
    normalized: tuple[NormalizedVector, ...]

    @classmethod
    def build(cls, module: Module, mm: MachineModel, entry: str | None = None) -> Program:
        diags = validate_module(module)
        if diags:
            raise TuneError("module does not validate:\n" + "\n".join(map(str, diags)))
        entry = entry or module.functions[0].name
        module.function(entry)
        cands = module_candidates(module)
        mems = {d.name: d.length for d in module.memories}
        cfgs = {f.name: analyze_cfg(f) for f in module.functions}
        fvs = tuple(extract_features(module.function(c.function), c, mm, cfgs[c.function], mems)
                    for c in cands)
        norm = tuple(normalize_features(fvs)) if fvs else ()
        return cls(module, entry, tuple(cands), fvs, norm)

    def __len__(self) -> int:
        return len(self.candidates)

    def baseline_bits(self, mm: MachineModel) -> Bits:
        return tuple(baseline_decide(fv, mm) for fv in self.features)


def genome_bitmask(g: Genome, nv: Sequence[NormalizedVector], threshold: float = 0.5) -> Bits:
    """Bit ``i`` is set iff the network output on candidate ``i`` is >= threshold."""
    return tuple(activate(g, [float(x) for x in v]) >= threshold for v in nv)


def geometric_mean(xs: Sequence[Fraction]) -> float:
    return math.prod(float(x) for x in xs) ** (1.0 / len(xs))


class Evaluator:
    """Bitmask -> fitness with a per-bitmask simulation cache."""

    def __init__(self, program: Program, workloads: Sequence[Workload], mm: MachineModel):
        if not workloads:
            raise TuneError("at least one workload is required")
        self.program = program
        self.workloads = tuple(workloads)
        self.mm = mm
        self.baseline_bits = program.baseline_bits(mm)
        self.diagnostics: list[str] = []
        self._cache: dict[Bits, tuple[float, tuple[SimResult, ...] | None]] = {}
        for w in self.workloads:
            try:
                interpret(program.module, program.entry, w.inputs)
            except InterpreterError as e:
                raise TuneError(f"workload {w.name!r} fails on the original module: {e}") from e
        base_module, _ = apply_bitmask(program.module, self.baseline_bits, program.candidates)
        self.baseline_module = base_module
        try:
            self.baseline = tuple(simulate(base_module, program.entry, w.inputs, mm)
                                  for w in self.workloads)
        except InterpreterError as e:
            raise TuneError(f"baseline run failed: {e}") from e

    def convert(self, bits: Bits) -> Module:
        return apply_bitmask(self.program.module, bits, self.program.candidates)[0]

    def sims(self, bits: Bits) -> tuple[SimResult, ...] | None:
        return self._lookup(tuple(bits))[1]

    def fitness(self, bits: Sequence[bool]) -> float:
        return self._lookup(tuple(bool(b) for b in bits))[0]

    def speedups(self, bits: Bits) -> list[Fraction]:
        sims = self.sims(bits)
        return [speedup(b, s) for b, s in zip(self.baseline, sims)] if sims else []

    @property
    def evaluations(self) -> int:
        return len(self._cache)

    def _lookup(self, bits: Bits):
        hit = self._cache.get(bits)
        if hit is not None:
            return hit
        module = self.convert(bits)
        try:
            sims = tuple(simulate(module, self.program.entry, w.inputs, self.mm)
                         for w in self.workloads)
        except InterpreterError as e:
            msg = f"bitmask {format_bitmask(bits)}: {e}"
            log.error("simulation failed, fitness 0: %s", msg)
            self.diagnostics.append(msg)
            hit = (0.0, None)
        else:
            hit = (geometric_mean([speedup(b, s) for b, s in zip(self.baseline, sims)]), sims)
        self._cache[bits] = hit
        return hit


def evaluate_genome(g: Genome, p: Program, ws: Sequence[Workload], mm: MachineModel,
                    evaluator: Evaluator | None = None) -> float:
    ev = evaluator or Evaluator(p, ws, mm)
    return ev.fitness(genome_bitmask(g, p.normalized))


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    species_count: int
    best_bitmask: str
    generation_best: float


@dataclass
class TuneResult:
    best_genome: Genome
    best_bitmask: str
    best_fitness: float
    history: list[GenerationStats]
    baseline_cycles: dict[str, int]
    baseline_bitmask: str
    converted_text: str
    candidates: int
    notes: list[str] = field(default_factory=list)


def tune(p: Program, ws: Sequence[Workload], ncfg: NeatConfig, mm: MachineModel, seed: int,
         on_generation: Callable[[Population, SpeciesSet], None] | None = None,
         evaluator: Evaluator | None = None) -> TuneResult:
    """Evolve a network whose bitmask maximizes speedup over the baseline.

    ``on_generation`` is called after each generation is evaluated and
    speciated, before breeding.
    """
    if len(p) == 0:
        raise TuneError("nothing to tune: the program has no if-conversion candidates")
    ev = evaluator or Evaluator(p, ws, mm)
    rng = random.Random(seed)
    pop = init_population(ncfg, rng, inputs=len(p.normalized[0]))
    best_genome, best_bits, best_fit = None, None, -math.inf
    history = []
    for gen in range(ncfg.generations):
        masks = [genome_bitmask(g, p.normalized, ncfg.output_threshold) for g in pop.genomes]
        fits = [ev.fitness(m) for m in masks]
        if ev.diagnostics:
            raise TuneError("workload trapped under a converted module: " + ev.diagnostics[0])
        species = speciate(pop, ncfg)
        k = max(range(len(fits)), key=lambda i: (fits[i], -i))
        if fits[k] > best_fit:
            best_fit, best_bits, best_genome = fits[k], masks[k], pop.genomes[k].copy()
            best_genome.fitness = best_fit
        history.append(GenerationStats(gen, best_fit, sum(fits) / len(fits), len(species),
                                       format_bitmask(best_bits), fits[k]))
        log.debug("generation %d: best %.6f mean %.6f species %d", gen, best_fit,
                  history[-1].mean_fitness, len(species))
        if on_generation is not None:
            on_generation(pop, species)
        if gen + 1 < ncfg.generations:
            pop = next_generation(pop, species, fits, ncfg, rng)
    return TuneResult(
        best_genome=best_genome,
        best_bitmask=format_bitmask(best_bits),
        best_fitness=best_fit,
        history=history,
        baseline_cycles={w.name: s.cycles for w, s in zip(ev.workloads, ev.baseline)},
        baseline_bitmask=format_bitmask(ev.baseline_bits),
        converted_text=print_module(ev.convert(best_bits)),
        candidates=len(p),
        notes=list(pop.notes),
    )


@dataclass
class OracleResult:
    optimal_bitmask: str
    optimal_speedup: float
    table: list[tuple[str, float]] | None
    candidates: int
    baseline_bitmask: str = ""


def exhaustive_search(p: Program, ws: Sequence[Workload], mm: MachineModel, limit: int = 20,
                      table_cutoff: int = 12, evaluator: Evaluator | None = None) -> OracleResult:
    """Simulate all ``2**n`` bitmasks and return the best.

    Bitmasks are enumerated in ascending binary order reading bit 0 as the
    most significant digit.  Ties go to fewer conversions, then the lower
    binary value.
    """
    n = len(p)
    if n > limit:
        raise TuneError(f"exhaustive search refused: {n} candidates exceeds the limit of {limit}")
    ev = evaluator or Evaluator(p, ws, mm)
    table = [] if n <= table_cutoff else None
    best_bits, best_fit = None, -math.inf
    for v in range(1 << n):
        text = format(v, f"0{n}b") if n else ""
        bits = tuple(ch == "1" for ch in text)
        fit = ev.fitness(bits)
        if table is not None:
            table.append((text, fit))
        if fit > best_fit or (fit == best_fit and text.count("1") < best_bits.count("1")):
            best_bits, best_fit = text, fit
    return OracleResult(best_bits, best_fit, table, n, format_bitmask(ev.baseline_bits))
