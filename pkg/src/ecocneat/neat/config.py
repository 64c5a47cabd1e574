from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

ACTIVATIONS = ("sigmoid", "tanh", "relu", "identity")


@dataclass(frozen=True)
class NeatConfig:
    """NEAT hyperparameters.

    The first block mirrors the configuration used for every experiment
    (population 200, elitism 2, ...). The second block fixes the
    distributions the evolutionary operators draw from.
    """

    num_inputs: int = 1
    num_outputs: int = 2
    pop_size: int = 200
    elitism: int = 2
    initial_connection_prob: float = 0.1
    conn_add_prob: float = 0.8
    node_add_prob: float = 0.7
    conn_delete_prob: float = 0.1
    node_delete_prob: float = 0.1
    weight_mutate_rate: float = 0.8
    bias_mutate_rate: float = 0.7
    activation_mutate_rate: float = 0.3
    survival_threshold: float = 0.2
    max_stagnation: int = 15
    elite_species: int = 3
    compatibility_threshold: float = 2.5
    compatibility_disjoint_coefficient: float = 1.0
    compatibility_weight_coefficient: float = 0.6
    compatibility_normalize: bool = True
    max_fitness_threshold: float = 1.0
    feed_forward: bool = True

    init_stdev: float = 1.0
    mutate_power: float = 0.5
    replace_rate: float = 0.1
    value_bound: float = 30.0
    default_activation: str = "sigmoid"
    activation_options: tuple[str, ...] = ACTIVATIONS

    def __post_init__(self) -> None:
        rates = (
            "initial_connection_prob", "conn_add_prob", "node_add_prob", "conn_delete_prob",
            "node_delete_prob", "weight_mutate_rate", "bias_mutate_rate",
            "activation_mutate_rate", "survival_threshold", "replace_rate",
        )
        for name in rates:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if self.num_outputs < 2:
            raise ValueError("num_outputs must be >= 2")
        if self.num_inputs < 1:
            raise ValueError("num_inputs must be >= 1")
        if self.elitism < 0 or self.elite_species < 0 or self.max_stagnation < 1:
            raise ValueError("elitism/elite_species must be >= 0 and max_stagnation >= 1")
        if not self.feed_forward:
            raise ValueError("only feed-forward networks are supported")
        unknown = set(self.activation_options) - set(ACTIVATIONS)
        if unknown or self.default_activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation(s): {sorted(unknown) or self.default_activation}")

    def with_io(self, num_inputs: int, num_outputs: int) -> "NeatConfig":
        return replace(self, num_inputs=num_inputs, num_outputs=num_outputs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["activation_options"] = list(self.activation_options)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NeatConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown NEAT parameter(s): {sorted(unknown)}")
        d = dict(d)
        if "activation_options" in d:
            d["activation_options"] = tuple(d["activation_options"])
        return cls(**d)
