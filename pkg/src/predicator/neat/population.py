"""Populations, speciation and reproduction."""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field, fields
from typing import Sequence

from .genome import (
    ConnGene, Genome, NodeGene, check_genome, compatibility_distance, crossover, reaches,
)


@dataclass(frozen=True)
class NeatConfig:
    population_size: int = 30
    generations: int = 50
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 0.4
    compatibility_threshold: float = 3.0
    small_genome: int = 20
    weight_mutate_rate: float = 0.8
    weight_sigma: float = 0.5
    weight_reset_rate: float = 0.1
    weight_reset_range: float = 2.0
    weight_init_range: float = 1.0
    add_connection_rate: float = 0.05
    add_node_rate: float = 0.03
    crossover_rate: float = 0.75
    disable_inherit_rate: float = 0.75
    survival_threshold: float = 0.5
    elitism: int = 1
    stagnation: int = 15
    output_threshold: float = 0.5

    def __post_init__(self):
        for name in ("weight_mutate_rate", "weight_reset_rate", "add_connection_rate",
                     "add_node_rate", "crossover_rate", "disable_inherit_rate",
                     "survival_threshold"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in fields(self))


def parse_neat_config(text: str) -> NeatConfig:
    types = {f.name: f.type for f in fields(NeatConfig)}
    kw = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"(\w+)\s*=\s*(\S+)", line)
        if m is None or m.group(1) not in types:
            raise ValueError(f"line {lineno}: unknown or malformed setting {line!r}")
        key, value = m.groups()
        kw[key] = int(value) if types[key] == "int" else float(value)
    return NeatConfig(**kw)


class InnovationTracker:
    """Global historical markings.

    A ``(src, dst)`` pair always maps to the same innovation number, and
    splitting a given connection innovation yields the same hidden node id
    unless the genome already holds that node.
    """

    def __init__(self, next_innovation: int = 1, next_node: int = 0):
        self.next_innovation = next_innovation
        self.next_node = next_node
        self.edges: dict[tuple[int, int], int] = {}
        self.splits: dict[int, int] = {}

    def innovation(self, src: int, dst: int) -> int:
        key = (src, dst)
        if key not in self.edges:
            self.edges[key] = self.next_innovation
            self.next_innovation += 1
        return self.edges[key]

    def split_node(self, innovation: int, existing: set[int]) -> int:
        node = self.splits.get(innovation)
        if node is None or node in existing:
            node = self.next_node
            self.next_node += 1
            self.splits.setdefault(innovation, node)
        return node


@dataclass
class Species:
    id: int
    representative: Genome
    members: list[int] = field(default_factory=list)
    best_fitness: float = -math.inf
    last_improved: int = 0


@dataclass
class Population:
    generation: int
    genomes: list[Genome]
    tracker: InnovationTracker
    species: list[Species] = field(default_factory=list)
    next_species_id: int = 1
    notes: list[str] = field(default_factory=list)


SpeciesSet = list[Species]


def init_population(cfg: NeatConfig, rng: random.Random, inputs: int = 11,
                    outputs: int = 1) -> Population:
    """Minimal genomes: every input and the bias wired straight to each output.

    Node ids are inputs ``0..inputs-1``, bias ``inputs``, then outputs.
    """
    tracker = InnovationTracker()
    nodes = [NodeGene(i, "input") for i in range(inputs)]
    nodes.append(NodeGene(inputs, "bias"))
    out_ids = list(range(inputs + 1, inputs + 1 + outputs))
    nodes += [NodeGene(o, "output") for o in out_ids]
    tracker.next_node = inputs + 1 + outputs
    edges = [(s, o) for o in out_ids for s in range(inputs + 1)]
    for s, o in edges:
        tracker.innovation(s, o)
    r = cfg.weight_init_range
    genomes = []
    for _ in range(cfg.population_size):
        conns = [ConnGene(tracker.innovation(s, o), s, o, rng.uniform(-r, r)) for s, o in edges]
        genomes.append(Genome([NodeGene(n.id, n.role) for n in nodes], conns))
    return Population(0, genomes, tracker)


def speciate(p: Population, cfg: NeatConfig) -> SpeciesSet:
    """Assign every genome to the first compatible species.

    Representatives from the previous generation are compared against in
    species order; a genome matching none founds a new species.  Empty
    species are dropped and each survivor's representative becomes its
    first member.
    """
    species = [Species(s.id, s.representative, [], s.best_fitness, s.last_improved)
               for s in p.species]
    for i, g in enumerate(p.genomes):
        for s in species:
            d = compatibility_distance(g, s.representative, cfg.c1, cfg.c2, cfg.c3, cfg.small_genome)
            if d <= cfg.compatibility_threshold:
                s.members.append(i)
                break
        else:
            species.append(Species(p.next_species_id, g, [i], last_improved=p.generation))
            p.next_species_id += 1
    species = [s for s in species if s.members]
    for s in species:
        s.representative = p.genomes[s.members[0]]
    p.species = species
    return species


def mutate_weights(g: Genome, cfg: NeatConfig, rng: random.Random) -> None:
    r = cfg.weight_reset_range
    for c in g.conns:
        if rng.random() < cfg.weight_reset_rate:
            c.weight = rng.uniform(-r, r)
        else:
            c.weight += rng.gauss(0.0, cfg.weight_sigma)


def mutate_add_connection(g: Genome, tracker: InnovationTracker, rng: random.Random,
                          weight_range: float = 1.0) -> ConnGene | None:
    """Insert a random new edge that keeps the network acyclic."""
    sources = g.ids("input", "bias", "hidden")
    targets = g.ids("hidden", "output")
    existing = {(c.src, c.dst) for c in g.conns}
    options = [(s, t) for s in sources for t in targets
               if s != t and (s, t) not in existing and not reaches(g, t, s)]
    if not options:
        return None
    s, t = rng.choice(options)
    conn = ConnGene(tracker.innovation(s, t), s, t, rng.uniform(-weight_range, weight_range))
    g.conns.append(conn)
    g.conns.sort(key=lambda c: c.innovation)
    return conn


def mutate_add_node(g: Genome, tracker: InnovationTracker, rng: random.Random) -> int | None:
    """Split a random enabled connection ``a->b`` into ``a->h->b``."""
    enabled = [c for c in g.conns if c.enabled]
    if not enabled:
        return None
    old = rng.choice(enabled)
    return split_connection(g, old, tracker)


def split_connection(g: Genome, old: ConnGene, tracker: InnovationTracker) -> int:
    old.enabled = False
    h = tracker.split_node(old.innovation, {n.id for n in g.nodes})
    g.nodes.append(NodeGene(h, "hidden"))
    g.conns.append(ConnGene(tracker.innovation(old.src, h), old.src, h, 1.0))
    g.conns.append(ConnGene(tracker.innovation(h, old.dst), h, old.dst, old.weight))
    g.conns.sort(key=lambda c: c.innovation)
    return h


def mutate(g: Genome, cfg: NeatConfig, tracker: InnovationTracker, rng: random.Random) -> None:
    if rng.random() < cfg.weight_mutate_rate:
        mutate_weights(g, cfg, rng)
    if rng.random() < cfg.add_connection_rate:
        mutate_add_connection(g, tracker, rng, cfg.weight_init_range)
    if rng.random() < cfg.add_node_rate:
        mutate_add_node(g, tracker, rng)


def _quotas(scores: Sequence[float], total: int, must_have: int | None) -> list[int]:
    """Split ``total`` slots in proportion to ``scores`` (largest remainder)."""
    s = sum(scores)
    raw = [total * x / s for x in scores] if s > 0 else [total / len(scores)] * len(scores)
    q = [int(math.floor(x)) for x in raw]
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - q[i]), i))
    for i in order[: total - sum(q)]:
        q[i] += 1
    if must_have is not None and q[must_have] == 0:
        donor = max(range(len(q)), key=lambda i: (q[i], -i))
        q[donor] -= 1
        q[must_have] += 1
    return q


def _offspring(parents: list[Genome], n: int, cfg: NeatConfig, tracker: InnovationTracker,
               rng: random.Random) -> list[Genome]:
    out = []
    for _ in range(n):
        if len(parents) >= 2 and rng.random() < cfg.crossover_rate:
            a, b = rng.sample(range(len(parents)), 2)
            pa, pb = parents[min(a, b)], parents[max(a, b)]
            child = crossover(pa, pb, rng, cfg.disable_inherit_rate)
        else:
            child = rng.choice(parents).copy()
            child.fitness = None
        mutate(child, cfg, tracker, rng)
        out.append(child)
    return out


def next_generation(p: Population, species: SpeciesSet, fitnesses: Sequence[float],
                    cfg: NeatConfig, rng: random.Random) -> Population:
    """Breed the next population from speciated, evaluated genomes.

    Offspring quotas follow each species' mean fitness (explicit fitness
    sharing); each species keeps its best member unchanged; stagnant species
    are retired unless they hold the global best.  If every species is
    stagnant the population restarts from the two best genomes.
    """
    if len(fitnesses) != len(p.genomes):
        raise ValueError("one fitness per genome is required")
    for g, f in zip(p.genomes, fitnesses):
        g.fitness = float(f)
    best_idx = max(range(len(p.genomes)), key=lambda i: (p.genomes[i].fitness, -i))

    for s in species:
        top = max(p.genomes[i].fitness for i in s.members)
        if top > s.best_fitness:
            s.best_fitness = top
            s.last_improved = p.generation
    fresh = [p.generation - s.last_improved < cfg.stagnation for s in species]
    alive = [] if not any(fresh) else [
        s for s, ok in zip(species, fresh) if ok or best_idx in s.members]

    tracker = p.tracker
    size = cfg.population_size
    notes = list(p.notes)
    new: list[Genome] = []
    if not alive:
        ranked = sorted(range(len(p.genomes)), key=lambda i: (-p.genomes[i].fitness, i))[:2]
        parents = [p.genomes[i] for i in ranked]
        new = [g.copy() for g in parents]
        new += _offspring(parents, size - len(new), cfg, tracker, rng)
        notes.append(f"generation {p.generation}: all species stagnant, restarted from two best")
        kept: list[Species] = []
    else:
        scores = [sum(p.genomes[i].fitness for i in s.members) / len(s.members) for s in alive]
        must = next(k for k, s in enumerate(alive) if best_idx in s.members) \
            if any(best_idx in s.members for s in alive) else None
        quotas = _quotas(scores, size, must)
        for s, q in zip(alive, quotas):
            if q == 0:
                continue
            ranked = sorted(s.members, key=lambda i: (-p.genomes[i].fitness, i))
            elites = [p.genomes[i].copy() for i in ranked[: min(cfg.elitism, q)]]
            cut = max(1, math.ceil(cfg.survival_threshold * len(ranked)))
            parents = [p.genomes[i] for i in ranked[:cut]]
            new += elites
            new += _offspring(parents, q - len(elites), cfg, tracker, rng)
        kept = alive
    for g in new:
        g.fitness = None
    return Population(p.generation + 1, new, tracker, kept, p.next_species_id, notes)


def check_population(p: Population, species: SpeciesSet | None, cfg: NeatConfig) -> None:
    """Raise ``ValueError`` if ``p`` (and its speciation) breaks an invariant.

    Checks population size, every genome's structure, global consistency of
    innovation numbers and, when ``species`` is given, that it partitions
    the population.
    """
    if len(p.genomes) != cfg.population_size:
        raise ValueError(f"population has {len(p.genomes)} genomes, expected "
                         f"{cfg.population_size}")
    by_number = {v: k for k, v in p.tracker.edges.items()}
    for i, g in enumerate(p.genomes):
        try:
            check_genome(g)
        except ValueError as e:
            raise ValueError(f"genome {i}: {e}") from None
        for c in g.conns:
            if by_number.get(c.innovation) != (c.src, c.dst):
                raise ValueError(f"genome {i}: innovation {c.innovation} does not denote "
                                 f"{c.src}->{c.dst}")
    if species is not None:
        members = sorted(i for s in species for i in s.members)
        if members != list(range(len(p.genomes))):
            raise ValueError("species do not partition the population")
