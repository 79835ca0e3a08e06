"""NeuroEvolution of Augmenting Topologies, feed-forward only."""

from .genome import (
    ConnGene, Genome, NodeGene, activate, check_genome, compatibility_distance,
    crossover, sigmoid,
)
from .population import (
    InnovationTracker, NeatConfig, Population, Species, SpeciesSet, check_population,
    init_population, mutate, mutate_add_connection, mutate_add_node,
    next_generation, parse_neat_config, speciate, split_connection,
)

__all__ = [
    "ConnGene", "Genome", "InnovationTracker", "NeatConfig", "NodeGene", "Population",
    "Species", "SpeciesSet", "activate", "check_genome", "check_population", "compatibility_distance",
    "crossover", "init_population", "mutate", "mutate_add_connection", "mutate_add_node",
    "next_generation", "parse_neat_config", "sigmoid", "speciate", "split_connection",
]
