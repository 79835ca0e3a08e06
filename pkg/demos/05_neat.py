"""NEAT on its own: evolve a network that separates points above and below
a diagonal, watching species form and structure grow."""

import random

from predicator.neat import NeatConfig, activate, init_population, next_generation, speciate

rng = random.Random(0)
points = [[rng.random(), rng.random()] for _ in range(40)]
labels = [x + y > 1.0 for x, y in points]


def fitness(g):
    return sum((activate(g, p) >= 0.5) == want for p, want in zip(points, labels)) / len(points)


cfg = NeatConfig(population_size=40, add_node_rate=0.1, add_connection_rate=0.1)
pop = init_population(cfg, rng, inputs=2)
for gen in range(25):
    fits = [fitness(g) for g in pop.genomes]
    species = speciate(pop, cfg)
    hidden = max(g.hidden_count for g in pop.genomes)
    print(f"generation {gen:2}: best {max(fits):.3f} mean {sum(fits) / len(fits):.3f} "
          f"species {len(species)} max hidden nodes {hidden}")
    pop = next_generation(pop, species, fits, cfg, rng)

best = max(pop.genomes, key=fitness)
print("\nbest genome:\n" + best.to_text())
