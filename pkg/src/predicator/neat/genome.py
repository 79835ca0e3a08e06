"""Genome encoding, feed-forward activation and genetic operators."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Sequence

ROLES = ("input", "bias", "output", "hidden")
SIGMOID_SLOPE = 4.9


@dataclass
class NodeGene:
    id: int
    role: str


@dataclass
class ConnGene:
    innovation: int
    src: int
    dst: int
    weight: float
    enabled: bool = True

    def copy(self) -> ConnGene:
        return ConnGene(self.innovation, self.src, self.dst, self.weight, self.enabled)


@dataclass
class Genome:
    nodes: list[NodeGene]
    conns: list[ConnGene]
    fitness: float | None = field(default=None, compare=False)

    def copy(self) -> Genome:
        return Genome([NodeGene(n.id, n.role) for n in self.nodes],
                      [c.copy() for c in self.conns], self.fitness)

    def role(self, node: int) -> str:
        for n in self.nodes:
            if n.id == node:
                return n.role
        raise KeyError(node)

    def ids(self, *roles: str) -> list[int]:
        return [n.id for n in self.nodes if n.role in roles]

    @property
    def hidden_count(self) -> int:
        return sum(n.role == "hidden" for n in self.nodes)

    def by_innovation(self) -> dict[int, ConnGene]:
        return {c.innovation: c for c in self.conns}

    def has_edge(self, src: int, dst: int) -> bool:
        return any(c.src == src and c.dst == dst for c in self.conns)

    def is_acyclic(self) -> bool:
        graph: dict[int, set[int]] = {n.id: set() for n in self.nodes}
        for c in self.conns:
            graph[c.dst].add(c.src)
        try:
            tuple(TopologicalSorter(graph).static_order())
        except CycleError:
            return False
        return True

    def to_text(self) -> str:
        lines = [f"node {n.id} {n.role}" for n in self.nodes]
        lines += [f"conn {c.innovation} {c.src} {c.dst} {c.weight!r} {int(c.enabled)}"
                  for c in self.conns]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Genome:
        nodes, conns = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            parts = raw.split()
            if not parts:
                continue
            try:
                if parts[0] == "node" and len(parts) == 3 and parts[2] in ROLES:
                    nodes.append(NodeGene(int(parts[1]), parts[2]))
                    continue
                if parts[0] == "conn" and len(parts) == 6 and parts[5] in ("0", "1"):
                    conns.append(ConnGene(int(parts[1]), int(parts[2]), int(parts[3]),
                                          float(parts[4]), parts[5] == "1"))
                    continue
            except ValueError:
                pass
            raise ValueError(f"line {lineno}: malformed genome line {raw!r}")
        g = cls(nodes, conns)
        check_genome(g)
        return g


def check_genome(g: Genome) -> None:
    """Raise ``ValueError`` if ``g`` breaks a structural invariant."""
    ids = [n.id for n in g.nodes]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate node id")
    innovs = [c.innovation for c in g.conns]
    if len(set(innovs)) != len(innovs):
        raise ValueError("duplicate innovation number")
    roles = {n.id: n.role for n in g.nodes}
    for c in g.conns:
        if c.src not in roles or c.dst not in roles:
            raise ValueError(f"connection {c.innovation} references a missing node")
        if roles[c.dst] in ("input", "bias"):
            raise ValueError(f"connection {c.innovation} feeds an input or bias node")
    if not g.is_acyclic():
        raise ValueError("network contains a cycle")


def sigmoid(s: float) -> float:
    z = -SIGMOID_SLOPE * s
    if z > 700:
        return 0.0
    return 1.0 / (1.0 + math.exp(z))


def activate(g: Genome, x: Sequence[float]) -> float:
    """Feed-forward output of ``g`` for input vector ``x``; bias is 1.0."""
    inputs = g.ids("input")
    if len(x) != len(inputs):
        raise ValueError(f"expected {len(inputs)} inputs, got {len(x)}")
    value: dict[int, float] = dict(zip(inputs, map(float, x)))
    for b in g.ids("bias"):
        value[b] = 1.0
    incoming: dict[int, list[ConnGene]] = {n.id: [] for n in g.nodes}
    for c in g.conns:
        if c.enabled:
            incoming[c.dst].append(c)
    graph = {n: {c.src for c in cs} for n, cs in incoming.items()}
    try:
        order = list(TopologicalSorter(graph).static_order())
    except CycleError:
        raise ValueError("cannot activate a cyclic network") from None
    for n in order:
        if n in value:
            continue
        value[n] = sigmoid(sum(value[c.src] * c.weight for c in incoming[n]))
    return value[g.ids("output")[0]]


def compatibility_distance(g1: Genome, g2: Genome, c1: float = 1.0, c2: float = 1.0,
                           c3: float = 0.4, small_genome: int = 20) -> float:
    """``(c1*E + c2*D)/N + c3*mean|dw|`` over innovation-aligned genes."""
    a, b = g1.by_innovation(), g2.by_innovation()
    if not a and not b:
        return 0.0
    max_a, max_b = max(a, default=0), max(b, default=0)
    cutoff = min(max_a, max_b)
    excess = disjoint = 0
    for k in a.keys() ^ b.keys():
        if k > cutoff:
            excess += 1
        else:
            disjoint += 1
    matching = a.keys() & b.keys()
    wbar = (sum(abs(a[k].weight - b[k].weight) for k in matching) / len(matching)
            if matching else 0.0)
    n = 1 if len(a) < small_genome and len(b) < small_genome else max(len(a), len(b))
    return (c1 * excess + c2 * disjoint) / n + c3 * wbar


def crossover(fitter: Genome, other: Genome, rng: random.Random,
              disable_prob: float = 0.75) -> Genome:
    """Child of two parents; structure follows ``fitter``."""
    theirs = other.by_innovation()
    conns = []
    for c in fitter.conns:
        o = theirs.get(c.innovation)
        if o is None:
            child = c.copy()
        else:
            child = (c if rng.random() < 0.5 else o).copy()
            if not c.enabled or not o.enabled:
                child.enabled = not (rng.random() < disable_prob)
            else:
                child.enabled = True
        conns.append(child)
    return Genome([NodeGene(n.id, n.role) for n in fitter.nodes], conns)


def reaches(g: Genome, start: int, goal: int) -> bool:
    """True if a directed path of connection genes leads from start to goal."""
    out: dict[int, list[int]] = {}
    for c in g.conns:
        out.setdefault(c.src, []).append(c.dst)
    stack, seen = [start], set()
    while stack:
        n = stack.pop()
        if n == goal:
            return True
        if n not in seen:
            seen.add(n)
            stack.extend(out.get(n, ()))
    return False
