import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecocneat.neat import (
    ConnGene,
    CycleError,
    Genome,
    NeatConfig,
    NodeGene,
    activate,
    compatibility_distance,
    crossover,
    mutate,
    new_genome,
)
from ecocneat.neat.genome import add_connection, add_node, delete_node, dumps, loads

ACT = {
    "sigmoid": lambda z: 1 / (1 + math.exp(-z)),
    "tanh": math.tanh,
    "relu": lambda z: max(0.0, z),
    "identity": lambda z: z,
}


def reference_probs(g: Genome, x):
    """Recursive evaluation straight from the gene dictionaries."""
    memo = {}

    def value(n):
        if n < g.num_inputs:
            return float(x[n])
        if n not in memo:
            z = g.nodes[n].bias + sum(
                c.weight * value(s) for (s, t), c in g.connections.items() if t == n and c.enabled
            )
            memo[n] = z if g.is_output(n) else ACT[g.nodes[n].activation](z)
        return memo[n]

    z = [value(o) for o in g.output_ids]
    m = max(z)
    e = [math.exp(max(v - m, -30.0)) for v in z]
    return [v / sum(e) for v in e]


def evolved_genome(seed, steps, d=3, o=2):
    cfg = NeatConfig(num_inputs=d, num_outputs=o, initial_connection_prob=0.5, node_add_prob=0.5)
    rng = np.random.default_rng(seed)
    g = new_genome(cfg, rng)
    for _ in range(steps):
        g = mutate(g, cfg, rng)
    return g


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), steps=st.integers(0, 25), outputs=st.integers(2, 4))
def test_activation_matches_recursive_oracle(seed, steps, outputs):
    g = evolved_genome(seed, steps, o=outputs)
    g.check()
    x = np.random.default_rng(seed + 1).normal(size=3)
    np.testing.assert_allclose(activate(g, x), reference_probs(g, x), rtol=1e-9, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), steps=st.integers(1, 40))
def test_mutation_keeps_networks_acyclic_and_bounded(seed, steps):
    g = evolved_genome(seed, steps)
    g.check()
    for c in g.connections.values():
        assert abs(c.weight) <= 30.0
    for n in g.nodes.values():
        assert abs(n.bias) <= 30.0


def test_mutate_returns_fresh_copy():
    cfg = NeatConfig(num_inputs=2, num_outputs=2, initial_connection_prob=1.0)
    rng = np.random.default_rng(0)
    g = new_genome(cfg, rng)
    g.fitness = 0.5
    before = dumps(g)
    child = mutate(g, cfg, rng)
    assert child.fitness is None
    assert dumps(g) == before


def test_batch_and_single_activation_agree():
    g = evolved_genome(7, 30)
    x = np.random.default_rng(0).normal(size=(20, 3))
    batch = g.activate_batch(x)
    for i in range(20):
        np.testing.assert_allclose(batch[i], activate(g, x[i]))
    np.testing.assert_allclose(batch.sum(axis=1), 1.0)
    assert np.all((batch > 0) & (batch < 1))


def test_predict_ties_go_to_lowest_output():
    g = Genome(1, 3, {1: NodeGene(0.5, "sigmoid"), 2: NodeGene(0.5, "sigmoid"), 3: NodeGene(0.1, "sigmoid")})
    assert g.predict_batch(np.zeros((1, 1)))[0] == 0
    g2 = Genome(1, 2, {1: NodeGene(0.0, "sigmoid"), 2: NodeGene(0.0, "sigmoid")})
    assert g2.predict_batch(np.zeros((1, 1)))[0] == 0


def test_add_node_splits_connection():
    cfg = NeatConfig(num_inputs=1, num_outputs=2)
    g = Genome(1, 2, connections={(0, 1): ConnGene(0.7, True)})
    assert add_node(g, cfg, np.random.default_rng(0))
    assert not g.connections[(0, 1)].enabled
    assert g.connections[(0, 3)].weight == 1.0
    assert g.connections[(3, 1)].weight == 0.7
    g.check()


def test_add_connection_rejects_cycles():
    cfg = NeatConfig(num_inputs=1, num_outputs=2)
    g = Genome(1, 2, {1: NodeGene(0, "sigmoid"), 2: NodeGene(0, "sigmoid"), 3: NodeGene(0, "tanh"), 4: NodeGene(0, "tanh")},
               {(0, 3): ConnGene(1, True), (3, 4): ConnGene(1, True), (4, 1): ConnGene(1, True)})
    for seed in range(200):
        h = g.copy()
        add_connection(h, cfg, np.random.default_rng(seed))
        h.check()
        assert (4, 3) not in h.connections


def test_check_detects_cycle():
    g = Genome(1, 2, {1: NodeGene(0, "sigmoid"), 2: NodeGene(0, "sigmoid"), 3: NodeGene(0, "tanh"), 4: NodeGene(0, "tanh")},
               {(3, 4): ConnGene(1, True), (4, 3): ConnGene(1, False)})
    with pytest.raises(CycleError):
        g.check()


def test_delete_node_removes_incident_connections():
    g = evolved_genome(3, 30)
    while g.hidden_ids():
        delete_node(g, np.random.default_rng(0))
        for s, t in g.connections:
            assert s < g.num_inputs or s in g.nodes
            assert t in g.nodes
    g.check()


def test_crossover_takes_fitter_topology():
    a, b = evolved_genome(1, 15), evolved_genome(2, 15)
    a.fitness, b.fitness = 0.3, 0.9
    rng = np.random.default_rng(0)
    child = crossover(a, b, rng)
    assert child.nodes.keys() == b.nodes.keys()
    assert child.connections.keys() == b.connections.keys()
    for k, gene in child.connections.items():
        assert gene in (b.connections[k], a.connections.get(k))
    child.check()
    a.fitness = 0.9
    assert crossover(a, b, rng).connections.keys() == a.connections.keys()
    a.fitness = None
    with pytest.raises(ValueError):
        crossover(a, b, rng)


def test_compatibility_literal_form():
    cfg = NeatConfig(num_inputs=2, num_outputs=2, compatibility_normalize=False)
    a = Genome(2, 2, {2: NodeGene(0.0, "sigmoid"), 3: NodeGene(1.0, "sigmoid")},
               {(0, 2): ConnGene(1.0, True), (1, 3): ConnGene(0.5, True)})
    b = Genome(2, 2, {2: NodeGene(0.5, "tanh"), 3: NodeGene(1.0, "sigmoid"), 4: NodeGene(0.0, "relu")},
               {(0, 2): ConnGene(-1.0, True)})
    # disjoint: node 4, conn (1,3) -> 2; matching diffs: node2 0.5+1, node3 0, conn 2.0 -> mean 3.5/3
    assert compatibility_distance(a, b, cfg) == pytest.approx(1.0 * 2 + 0.6 * 3.5 / 3)


@settings(max_examples=30, deadline=None)
@given(s1=st.integers(0, 500), s2=st.integers(0, 500), norm=st.booleans())
def test_compatibility_is_a_symmetric_premetric(s1, s2, norm):
    cfg = NeatConfig(compatibility_normalize=norm)
    a, b = evolved_genome(s1, 10), evolved_genome(s2, 10)
    assert compatibility_distance(a, a, cfg) == 0
    assert compatibility_distance(a, b, cfg) == pytest.approx(compatibility_distance(b, a, cfg))
    assert compatibility_distance(a, b, cfg) >= 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 5000), steps=st.integers(0, 20))
def test_text_roundtrip(seed, steps):
    g = evolved_genome(seed, steps)
    g.fitness = 0.25
    h = loads(dumps(g))
    assert h == g
    assert h.fitness == 0.25
    x = np.random.default_rng(seed).normal(size=(5, 3))
    np.testing.assert_array_equal(g.activate_batch(x), h.activate_batch(x))


def test_loads_rejects_garbage():
    with pytest.raises(ValueError):
        loads("hello\n")
    with pytest.raises(ValueError):
        loads("ecocneat-genome 1\nio 1 2\nbogus 1\n")


def test_new_genome_density():
    cfg = NeatConfig(num_inputs=64, num_outputs=10)
    g = new_genome(cfg, np.random.default_rng(0))
    # 640 candidate links at 10% density
    assert 40 < len(g.connections) < 90
    assert len(g.nodes) == 10 and not g.hidden_ids()
