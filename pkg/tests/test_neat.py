import math
import random

import pytest

from predicator.neat import (
    ConnGene, Genome, InnovationTracker, NeatConfig, NodeGene, Population, activate,
    check_genome, check_population, compatibility_distance, crossover, init_population,
    mutate_add_connection, mutate_add_node, next_generation, parse_neat_config, sigmoid,
    speciate, split_connection,
)


def pop(n=30, seed=0, **kw):
    cfg = NeatConfig(population_size=n, **kw)
    return cfg, init_population(cfg, random.Random(seed))


def genome_with(innovations, weight=0.5):
    nodes = [NodeGene(0, "input"), NodeGene(1, "bias"), NodeGene(2, "output")]
    return Genome(nodes, [ConnGene(k, 0, 2, weight) for k in innovations])


class TestInit:
    def test_shape(self):
        cfg, p = pop()
        assert len(p.genomes) == 30
        for g in p.genomes:
            assert len(g.nodes) == 13 and len(g.conns) == 12 and g.hidden_count == 0
            assert all(c.enabled and -1 <= c.weight <= 1 for c in g.conns)
            assert [c.innovation for c in g.conns] == list(range(1, 13))
        check_population(p, None, cfg)

    def test_node_ids(self):
        _, p = pop(2)
        g = p.genomes[0]
        assert g.ids("input") == list(range(11)) and g.ids("bias") == [11] and g.ids("output") == [12]

    def test_deterministic(self):
        assert pop(seed=3)[1].genomes == pop(seed=3)[1].genomes
        assert pop(seed=3)[1].genomes != pop(seed=4)[1].genomes


class TestActivate:
    def test_zero_weights(self):
        _, p = pop(2)
        g = p.genomes[0]
        for c in g.conns:
            c.weight = 0.0
        assert activate(g, [0.3] * 11) == 0.5

    def test_bias_only(self):
        g = Genome([NodeGene(0, "input"), NodeGene(1, "bias"), NodeGene(2, "output")],
                   [ConnGene(1, 1, 2, 0.8)])
        assert activate(g, [0.9]) == sigmoid(0.8)
        g.conns[0].weight = 1000.0
        assert activate(g, [0.0]) == pytest.approx(1.0)

    def test_zero_inputs_use_bias(self):
        _, p = pop(2)
        g = p.genomes[0]
        w_bias = next(c.weight for c in g.conns if c.src == 11)
        assert activate(g, [0.0] * 11) == sigmoid(w_bias)

    def test_slope(self):
        assert sigmoid(1.0) == 1 / (1 + math.exp(-4.9))
        assert sigmoid(-1000) == 0.0

    def test_hidden_node(self):
        g = Genome([NodeGene(0, "input"), NodeGene(1, "bias"), NodeGene(2, "output")],
                   [ConnGene(1, 0, 2, 0.7)])
        h = split_connection(g, g.conns[0], InnovationTracker(2, 3))
        assert activate(g, [1.0]) == sigmoid(0.7 * sigmoid(1.0))
        assert h == 3

    def test_wrong_arity(self):
        _, p = pop(2)
        with pytest.raises(ValueError):
            activate(p.genomes[0], [0.0] * 3)

    def test_monotone_in_weight(self):
        _, p = pop(2)
        g = p.genomes[0]
        x = [0.5] * 11
        lo = activate(g, x)
        g.conns[0].weight += 0.1
        assert activate(g, x) > lo


class TestDistance:
    def test_identical(self):
        g = genome_with([1, 2, 3])
        assert compatibility_distance(g, g) == 0.0

    def test_excess_and_disjoint(self):
        g1, g2 = genome_with([1, 2, 3]), genome_with([1, 2, 4, 5])
        assert compatibility_distance(g1, g2) == 3.0
        assert compatibility_distance(g2, g1) == 3.0

    def test_weight_term(self):
        assert compatibility_distance(genome_with([1, 2], 0.0), genome_with([1, 2], 1.0)) == pytest.approx(0.4)

    def test_large_genomes_normalize(self):
        g1, g2 = genome_with(range(1, 26)), genome_with(range(1, 21))
        assert compatibility_distance(g1, g2) == pytest.approx(5 / 25)


class TestSpeciate:
    def test_identical_population(self):
        cfg, p = pop()
        for g in p.genomes:
            g.conns = [c.copy() for c in p.genomes[0].conns]
        assert len(speciate(p, cfg)) == 1

    def test_two_clusters(self):
        cfg, p = pop(10)
        for i, g in enumerate(p.genomes):
            for c in g.conns:
                c.weight = 0.0 if i < 5 else 10.0
        species = speciate(p, cfg)
        assert [s.members for s in species] == [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]]

    def test_zero_threshold(self):
        cfg, p = pop(8, compatibility_threshold=0.0)
        assert len(speciate(p, cfg)) == 8

    def test_partition_and_carry_over(self):
        cfg, p = pop()
        species = speciate(p, cfg)
        check_population(p, species, cfg)
        ids = [s.id for s in species]
        q = next_generation(p, species, [1.0] * 30, cfg, random.Random(0))
        again = speciate(q, cfg)
        assert {s.id for s in again} & set(ids)


class TestMutation:
    def test_add_node_rule(self):
        g = Genome([NodeGene(0, "input"), NodeGene(1, "bias"), NodeGene(2, "output")],
                   [ConnGene(1, 0, 2, 0.7)])
        tr = InnovationTracker(2, 3)
        tr.innovation(0, 2)
        h = split_connection(g, g.conns[0], tr)
        old, a_h, h_b = sorted(g.conns, key=lambda c: c.innovation)
        assert not old.enabled
        assert (a_h.src, a_h.dst, a_h.weight, a_h.enabled) == (0, h, 1.0, True)
        assert (h_b.src, h_b.dst, h_b.weight, h_b.enabled) == (h, 2, 0.7, True)

    def test_shared_innovations(self):
        cfg, p = pop(2)
        g1, g2 = p.genomes
        tr = p.tracker
        c1 = mutate_add_connection(g1, tr, random.Random(0))
        assert c1 is None  # fully connected, no hidden nodes
        h1 = mutate_add_node(g1, tr, random.Random(5))
        h2 = mutate_add_node(g2, tr, random.Random(5))
        assert h1 == h2
        assert {c.innovation for c in g1.conns} == {c.innovation for c in g2.conns}
        check_population(p, None, cfg)

    def test_add_connection_keeps_acyclic(self):
        cfg, p = pop(2)
        g, tr, rng = p.genomes[0], p.tracker, random.Random(1)
        for _ in range(6):
            mutate_add_node(g, tr, rng)
        for _ in range(40):
            mutate_add_connection(g, tr, rng)
        check_genome(g)
        assert g.is_acyclic()


class TestCrossover:
    def test_structure_from_fitter(self):
        a, b = genome_with([1, 2, 3, 6]), genome_with([1, 2, 4, 5])
        child = crossover(a, b, random.Random(0))
        assert [c.innovation for c in child.conns] == [1, 2, 3, 6]

    def test_disable_inheritance(self):
        a, b = genome_with([1]), genome_with([1])
        b.conns[0].enabled = False
        rng = random.Random(0)
        disabled = sum(not crossover(a, b, rng, 0.75).conns[0].enabled for _ in range(2000))
        assert 1350 < disabled < 1650


class TestGenerations:
    def test_elite_survives(self):
        cfg, p = pop(10)
        species = speciate(p, cfg)
        assert len(species) == 1
        fits = [1.0] * 10
        fits[3] = 10.0
        elite = p.genomes[3].copy()
        q = next_generation(p, species, fits, cfg, random.Random(0))
        assert elite in q.genomes

    def test_size_constant_and_invariants(self):
        cfg, p = pop(20, add_node_rate=0.3, add_connection_rate=0.3)
        rng = random.Random(2)
        for gen in range(15):
            species = speciate(p, cfg)
            check_population(p, species, cfg)
            fits = [activate(g, [0.5] * 11) for g in p.genomes]
            p = next_generation(p, species, fits, cfg, rng)
            assert p.generation == gen + 1
        assert any(g.hidden_count for g in p.genomes)

    def test_stagnation_restart(self):
        cfg, p = pop(10, stagnation=2)
        rng = random.Random(0)
        for _ in range(5):
            species = speciate(p, cfg)
            p = next_generation(p, species, [1.0] * 10, cfg, rng)
        assert any("stagnant" in n for n in p.notes)
        assert len(p.genomes) == 10

    def test_fitness_count_checked(self):
        cfg, p = pop(4)
        with pytest.raises(ValueError):
            next_generation(p, speciate(p, cfg), [1.0], cfg, random.Random(0))


class TestSerialization:
    def test_round_trip(self):
        _, p = pop(2)
        g = p.genomes[0]
        mutate_add_node(g, p.tracker, random.Random(0))
        g.conns[0].weight = 0.1 + 0.2
        assert Genome.from_text(g.to_text()) == g

    def test_malformed(self):
        with pytest.raises(ValueError, match="line 1"):
            Genome.from_text("conn 1 0 2 abc 1\n")

    def test_config(self):
        cfg = NeatConfig(population_size=12, c3=0.7)
        assert parse_neat_config(cfg.to_text()) == cfg
        with pytest.raises(ValueError):
            parse_neat_config("bogus = 1")
        with pytest.raises(ValueError):
            NeatConfig(crossover_rate=1.5)
        with pytest.raises(ValueError):
            NeatConfig(population_size=1)
