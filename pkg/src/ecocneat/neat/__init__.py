from .config import ACTIVATIONS, NeatConfig
from .genome import (
    ConnGene,
    CycleError,
    Genome,
    NodeGene,
    activate,
    compatibility_distance,
    crossover,
    evaluate_fitness,
    mutate,
    new_genome,
)
