"""Population management: speciation, stagnation, offspring allocation and the
generational loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..datasets import BinaryView, Dataset, as_arrays
from .config import NeatConfig
from .genome import Genome, compatibility_distance, crossover, mutate, new_genome


@dataclass
class Species:
    key: int
    representative: Genome
    members: list[int] = field(default_factory=list)
    created: int = 0
    best_fitness: float = -math.inf
    stagnation: int = 0
    fitness_history: list[float] = field(default_factory=list)


@dataclass
class Population:
    genomes: list[Genome]
    rng: np.random.Generator
    species: list[Species] = field(default_factory=list)
    generation: int = 0
    next_species_key: int = 0


@dataclass
class EvolutionTrace:
    best_fitness: list[float] = field(default_factory=list)
    mean_fitness: list[float] = field(default_factory=list)
    species_count: list[int] = field(default_factory=list)
    best_nodes: list[int] = field(default_factory=list)
    best_connections: list[int] = field(default_factory=list)
    # (generation, best-so-far genome) recorded whenever the champion changes
    champions: list[tuple[int, Genome]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.best_fitness)

    def best_so_far(self) -> list[float]:
        return list(np.maximum.accumulate(self.best_fitness)) if self.best_fitness else []

    def champion_at(self, generation: int) -> Genome:
        """Best genome seen up to and including ``generation`` (clamped to the last one run)."""
        found = self.champions[0][1]
        for gen, g in self.champions:
            if gen > generation:
                break
            found = g
        return found

    def to_rows(self) -> list[dict]:
        return [
            {
                "generation": i,
                "best_fitness": self.best_fitness[i],
                "mean_fitness": self.mean_fitness[i],
                "species": self.species_count[i],
                "best_nodes": self.best_nodes[i],
                "best_connections": self.best_connections[i],
            }
            for i in range(len(self))
        ]


def _evaluate(genomes: list[Genome], x: np.ndarray, y: np.ndarray) -> None:
    n = len(y)
    for g in genomes:
        if g.fitness is None:
            g.fitness = float(np.count_nonzero(g.predict_batch(x) == y)) / n


def speciate(p: Population, cfg: NeatConfig) -> Population:
    """First-fit assignment against species representatives in creation order."""
    for s in p.species:
        s.members = []
    for idx, g in enumerate(p.genomes):
        for s in p.species:
            if compatibility_distance(s.representative, g, cfg) <= cfg.compatibility_threshold:
                s.members.append(idx)
                break
        else:
            p.species.append(Species(p.next_species_key, g, [idx], created=p.generation))
            p.next_species_key += 1
    p.species = [s for s in p.species if s.members]
    for s in p.species:
        s.representative = p.genomes[s.members[0]]
    return p


def _update_stagnation(p: Population, cfg: NeatConfig) -> None:
    for s in p.species:
        best = max(p.genomes[i].fitness for i in s.members)
        s.fitness_history.append(best)
        if best > s.best_fitness:
            s.best_fitness = best
            s.stagnation = 0
        else:
            s.stagnation += 1
    ranked = sorted(p.species, key=lambda s: -s.best_fitness)
    protected = {id(s) for s in ranked[: cfg.elite_species]}
    p.species = [s for s in p.species if s.stagnation < cfg.max_stagnation or id(s) in protected]


def allocate_offspring(means: list[float], pop_size: int, floor: int = 1) -> list[int]:
    """Split ``pop_size`` over species proportionally to mean fitness.

    Each species first receives ``floor`` slots; the remainder is shared by
    largest-remainder rounding (earlier species win ties).
    """
    n = len(means)
    if not 0 < n <= pop_size:
        raise ValueError(f"cannot share {pop_size} slots over {n} species")
    floor = max(1, min(floor, pop_size // n))
    base = [floor] * n
    rest = pop_size - floor * n
    total = sum(means)
    weights = [m / total for m in means] if total > 0 else [1.0 / n] * n
    quotas = [w * rest for w in weights]
    extra = [math.floor(q) for q in quotas]
    short = rest - sum(extra)
    order = sorted(range(n), key=lambda i: (-(quotas[i] - extra[i]), i))
    for i in order[:short]:
        extra[i] += 1
    return [b + e for b, e in zip(base, extra)]


def _reproduce(p: Population, cfg: NeatConfig) -> list[Genome]:
    rng = p.rng
    species = p.species
    if len(species) > cfg.pop_size:
        species = sorted(species, key=lambda s: -s.best_fitness)[: cfg.pop_size]
    means = [float(np.mean([p.genomes[i].fitness for i in s.members])) for s in species]
    # two slots per species when possible so a singleton species gets one child besides its elite
    counts = allocate_offspring(means, cfg.pop_size, floor=2)
    new = []
    for s, count in zip(species, counts):
        members = sorted(s.members, key=lambda i: (-p.genomes[i].fitness, i))
        elites = min(cfg.elitism, len(members), count)
        new.extend(p.genomes[i] for i in members[:elites])
        pool = members[: max(1, math.ceil(cfg.survival_threshold * len(members)))]
        for _ in range(count - elites):
            a = p.genomes[pool[int(rng.integers(len(pool)))]]
            b = p.genomes[pool[int(rng.integers(len(pool)))]]
            child = crossover(a, b, rng) if a is not b else a.copy()
            new.append(mutate(child, cfg, rng))
    return new


def evolve(
    cfg: NeatConfig,
    data: Dataset | BinaryView,
    generations: int,
    seed: int | np.random.SeedSequence | np.random.Generator,
) -> tuple[Genome, EvolutionTrace]:
    """Run NEAT for up to ``generations`` generations; return the best genome ever
    evaluated and the per-generation trace."""
    if generations < 1:
        raise ValueError("generations must be >= 1")
    x, y = as_arrays(data)
    if len(y) == 0:
        raise ValueError("cannot evolve on empty data")
    if x.shape[1] != cfg.num_inputs:
        raise ValueError(f"data has {x.shape[1]} features but cfg.num_inputs={cfg.num_inputs}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pop = Population([new_genome(cfg, rng) for _ in range(cfg.pop_size)], rng)
    trace = EvolutionTrace()
    best: Genome | None = None

    for gen in range(generations):
        pop.generation = gen
        _evaluate(pop.genomes, x, y)
        fits = [g.fitness for g in pop.genomes]
        top = int(np.argmax(fits))
        if best is None or fits[top] > best.fitness:
            best = pop.genomes[top].copy()
            trace.champions.append((gen, best))
        speciate(pop, cfg)
        trace.best_fitness.append(fits[top])
        trace.mean_fitness.append(float(np.mean(fits)))
        trace.species_count.append(len(pop.species))
        trace.best_nodes.append(pop.genomes[top].num_nodes())
        trace.best_connections.append(pop.genomes[top].num_enabled())
        if best.fitness >= cfg.max_fitness_threshold or gen == generations - 1:
            break
        _update_stagnation(pop, cfg)
        pop.genomes = _reproduce(pop, cfg)
    return best, trace
