"""Genome encoding, feed-forward evaluation and the genetic operators.

Input nodes carry no genes: ids ``0..num_inputs-1`` are implicit. The
``nodes`` map holds the output nodes (ids ``num_inputs..num_inputs+num_outputs-1``)
and any hidden nodes. Connection genes are keyed by ``(source, target)``.
The set of all connection keys, enabled or not, is kept acyclic so that
re-enabling a gene can never introduce a cycle.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..datasets import BinaryView, Dataset, as_arrays
from .config import NeatConfig

# largest logit gap kept before softmax; keeps every probability strictly inside (0, 1)
LOGIT_SPREAD = 30.0


class CycleError(ValueError):
    pass


class NodeGene(NamedTuple):
    bias: float
    activation: str


class ConnGene(NamedTuple):
    weight: float
    enabled: bool


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _relu(z):
    return np.maximum(z, 0.0)


def _identity(z):
    return z


ACTIVATION_FUNCS = {"sigmoid": _sigmoid, "tanh": np.tanh, "relu": _relu, "identity": _identity}


class Genome:
    __slots__ = ("num_inputs", "num_outputs", "nodes", "connections", "fitness", "_plan")

    def __init__(
        self,
        num_inputs: int,
        num_outputs: int,
        nodes: dict[int, NodeGene] | None = None,
        connections: dict[tuple[int, int], ConnGene] | None = None,
        fitness: float | None = None,
    ):
        self.num_inputs = num_inputs
        self.num_outputs = num_outputs
        if nodes is None:
            nodes = {num_inputs + i: NodeGene(0.0, "sigmoid") for i in range(num_outputs)}
        self.nodes = nodes
        self.connections = connections if connections is not None else {}
        self.fitness = fitness
        self._plan = None

    @property
    def output_ids(self) -> range:
        return range(self.num_inputs, self.num_inputs + self.num_outputs)

    def is_input(self, nid: int) -> bool:
        return 0 <= nid < self.num_inputs

    def is_output(self, nid: int) -> bool:
        return self.num_inputs <= nid < self.num_inputs + self.num_outputs

    def hidden_ids(self) -> list[int]:
        first_hidden = self.num_inputs + self.num_outputs
        return [n for n in self.nodes if n >= first_hidden]

    def copy(self) -> "Genome":
        g = Genome(self.num_inputs, self.num_outputs, dict(self.nodes), dict(self.connections), self.fitness)
        g._plan = self._plan
        return g

    def num_nodes(self, include_inputs: bool = True) -> int:
        return len(self.nodes) + (self.num_inputs if include_inputs else 0)

    def num_enabled(self) -> int:
        return sum(1 for c in self.connections.values() if c.enabled)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Genome):
            return NotImplemented
        return (
            self.num_inputs == other.num_inputs
            and self.num_outputs == other.num_outputs
            and self.nodes == other.nodes
            and self.connections == other.connections
            and self.fitness == other.fitness
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"Genome(inputs={self.num_inputs}, outputs={self.num_outputs}, "
            f"hidden={len(self.nodes) - self.num_outputs}, enabled={self.num_enabled()}, fitness={self.fitness})"
        )

    def check(self) -> None:
        """Raise ``ValueError`` if a structural invariant is violated."""
        for o in self.output_ids:
            if o not in self.nodes:
                raise ValueError(f"missing output node {o}")
        for nid in self.nodes:
            if nid < self.num_inputs:
                raise ValueError(f"node gene {nid} collides with an input id")
        for s, t in self.connections:
            if self.is_input(t):
                raise ValueError(f"connection {(s, t)} targets an input")
            if self.is_output(s):
                raise ValueError(f"connection {(s, t)} leaves an output")
            if not self.is_input(s) and s not in self.nodes:
                raise ValueError(f"connection {(s, t)} has unknown source")
            if t not in self.nodes:
                raise ValueError(f"connection {(s, t)} has unknown target")
        _topological_order(self.nodes, self.connections)

    # evaluation -----------------------------------------------------------------

    def _compile(self):
        if self._plan is not None:
            return self._plan
        d = self.num_inputs
        incoming: dict[int, list[tuple[int, float]]] = {}
        # sorted so the summation order, and hence every bit of the output,
        # does not depend on gene insertion history
        for (s, t), c in sorted(self.connections.items()):
            if c.enabled:
                incoming.setdefault(t, []).append((s, c.weight))
        # keep only nodes that can influence an output
        needed: set[int] = set()
        stack = list(self.output_ids)
        while stack:
            n = stack.pop()
            if n in needed:
                continue
            needed.add(n)
            for s, _ in incoming.get(n, ()):
                if s >= d and s not in needed:
                    stack.append(s)
        sub = {(s, t): c for (s, t), c in sorted(self.connections.items()) if c.enabled and t in needed}
        order = _topological_order({n: None for n in sorted(needed)}, sub)
        # outputs last, in id order, so their columns are contiguous
        outs = list(self.output_ids)
        hidden = [n for n in order if not self.is_output(n)]
        seq = hidden + outs
        col = {n: i for i, n in enumerate(seq)}
        used_inputs = sorted({s for (s, t) in sub if s < d})
        in_col = {s: i for i, s in enumerate(used_inputs)}
        w_in = np.zeros((len(used_inputs), len(seq)))
        hidden_terms = []
        for n in seq:
            srcs, ws = [], []
            for s, w in incoming.get(n, ()):
                if s < d:
                    w_in[in_col[s], col[n]] += w
                else:
                    srcs.append(col[s])
                    ws.append(w)
            hidden_terms.append(list(zip(srcs, ws)))
        bias = np.array([self.nodes[n].bias for n in seq])
        acts = [ACTIVATION_FUNCS[self.nodes[n].activation] for n in hidden]
        self._plan = (np.array(used_inputs, dtype=np.intp), w_in, bias, hidden_terms, acts, len(hidden))
        return self._plan

    def logits(self, x: np.ndarray) -> np.ndarray:
        """Output pre-activations for a batch ``x`` of shape (n, num_inputs)."""
        used, w_in, bias, hidden_terms, acts, nh = self._compile()
        n = x.shape[0]
        if used.size:
            # transpose trick yields a column-major result; columns are read one by one below
            z = (w_in.T @ x[:, used].T).T
            z += bias
        else:
            z = np.empty((n, bias.size), order="F")
            z[:] = bias
        if nh:
            vals = np.empty((n, nh), order="F")
            for i in range(nh):
                zi = z[:, i]
                for src, w in hidden_terms[i]:
                    zi += w * vals[:, src]
                vals[:, i] = acts[i](zi)
            for j in range(nh, z.shape[1]):
                zj = z[:, j]
                for src, w in hidden_terms[j]:
                    zj += w * vals[:, src]
        return z[:, nh:]

    def activate_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.num_inputs:
            raise ValueError(f"expected input of width {self.num_inputs}, got shape {x.shape}")
        return softmax(self.logits(x))

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """Argmax class per row, lowest index on ties.

        Softmax is monotone, so the argmax is taken on the logits directly.
        """
        z = self.logits(np.asarray(x, dtype=np.float64))
        if z.shape[1] == 2:
            return (z[:, 1] > z[:, 0]).astype(np.int64)
        return np.argmax(z, axis=1)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    np.maximum(z, -LOGIT_SPREAD, out=z)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _topological_order(nodes, connections) -> list[int]:
    """Kahn ordering of the non-input nodes; raises CycleError on a cycle."""
    indeg = {n: 0 for n in nodes}
    out: dict[int, list[int]] = {}
    for s, t in connections:
        if s in indeg and t in indeg:
            indeg[t] += 1
            out.setdefault(s, []).append(t)
    ready = [n for n, d in indeg.items() if d == 0]
    order = []
    while ready:
        n = ready.pop()
        order.append(n)
        for t in out.get(n, ()):
            indeg[t] -= 1
            if indeg[t] == 0:
                ready.append(t)
    if len(order) != len(indeg):
        raise CycleError("connection graph contains a cycle")
    return order


def activate(g: Genome, x) -> np.ndarray:
    """Class-probability vector for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != g.num_inputs:
        raise ValueError(f"expected {g.num_inputs} features, got shape {x.shape}")
    return g.activate_batch(x[None, :])[0]


def evaluate_fitness(g: Genome, data: Dataset | BinaryView) -> float:
    """Fraction of samples whose argmax prediction matches the label; stored on ``g``."""
    x, y = as_arrays(data)
    if len(y) == 0:
        raise ValueError("cannot evaluate fitness on empty data")
    g.fitness = float(np.count_nonzero(g.predict_batch(x) == y)) / len(y)
    return g.fitness


# construction and variation ---------------------------------------------------------


def _draw(rng: np.random.Generator, cfg: NeatConfig) -> float:
    v = rng.normal(0.0, cfg.init_stdev)
    return float(min(max(v, -cfg.value_bound), cfg.value_bound))


def new_genome(cfg: NeatConfig, rng: np.random.Generator) -> Genome:
    """Minimal network: no hidden nodes, each input->output link present with
    probability ``initial_connection_prob``."""
    d, o = cfg.num_inputs, cfg.num_outputs
    biases = np.clip(rng.normal(0.0, cfg.init_stdev, o), -cfg.value_bound, cfg.value_bound)
    nodes = {d + j: NodeGene(float(biases[j]), cfg.default_activation) for j in range(o)}
    mask = rng.random((d, o)) < cfg.initial_connection_prob
    weights = np.clip(rng.normal(0.0, cfg.init_stdev, (d, o)), -cfg.value_bound, cfg.value_bound)
    conns = {}
    for i, j in zip(*np.nonzero(mask)):
        conns[(int(i), d + int(j))] = ConnGene(float(weights[i, j]), True)
    return Genome(d, o, nodes, conns)


def _creates_cycle(connections, src: int, dst: int) -> bool:
    """True if adding src->dst closes a cycle, i.e. src is reachable from dst."""
    if src == dst:
        return True
    out: dict[int, list[int]] = {}
    for s, t in connections:
        out.setdefault(s, []).append(t)
    seen = {dst}
    stack = [dst]
    while stack:
        n = stack.pop()
        for t in out.get(n, ()):
            if t == src:
                return True
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return False


def _perturb(values: np.ndarray, rate: float, rng: np.random.Generator, cfg: NeatConfig) -> np.ndarray:
    n = values.size
    hit = rng.random(n) < rate
    replace = rng.random(n) < cfg.replace_rate
    noise = rng.normal(0.0, cfg.mutate_power, n)
    fresh = rng.normal(0.0, cfg.init_stdev, n)
    out = np.where(hit & replace, fresh, np.where(hit, values + noise, values))
    return np.clip(out, -cfg.value_bound, cfg.value_bound)


def add_connection(g: Genome, cfg: NeatConfig, rng: np.random.Generator) -> bool:
    hidden = g.hidden_ids()
    n_src = g.num_inputs + len(hidden)
    i = int(rng.integers(n_src))
    src = i if i < g.num_inputs else hidden[i - g.num_inputs]
    targets = hidden + list(g.output_ids)
    dst = targets[int(rng.integers(len(targets)))]
    weight = _draw(rng, cfg)
    if (src, dst) in g.connections or _creates_cycle(g.connections, src, dst):
        return False
    g.connections[(src, dst)] = ConnGene(weight, True)
    return True


def add_node(g: Genome, cfg: NeatConfig, rng: np.random.Generator) -> bool:
    enabled = [k for k, c in g.connections.items() if c.enabled]
    if not enabled:
        return False
    key = enabled[int(rng.integers(len(enabled)))]
    old = g.connections[key]
    new_id = max(g.nodes) + 1
    g.connections[key] = old._replace(enabled=False)
    g.nodes[new_id] = NodeGene(_draw(rng, cfg), cfg.default_activation)
    g.connections[(key[0], new_id)] = ConnGene(1.0, True)
    g.connections[(new_id, key[1])] = ConnGene(old.weight, True)
    return True


def delete_connection(g: Genome, rng: np.random.Generator) -> bool:
    if not g.connections:
        return False
    keys = list(g.connections)
    del g.connections[keys[int(rng.integers(len(keys)))]]
    return True


def delete_node(g: Genome, rng: np.random.Generator) -> bool:
    hidden = g.hidden_ids()
    if not hidden:
        return False
    victim = hidden[int(rng.integers(len(hidden)))]
    del g.nodes[victim]
    for key in [k for k in g.connections if victim in k]:
        del g.connections[key]
    return True


def mutate(g: Genome, cfg: NeatConfig, rng: np.random.Generator) -> Genome:
    """Return a mutated copy of ``g``; inapplicable structural mutations are skipped."""
    child = g.copy()
    child.fitness = None
    child._plan = None
    if rng.random() < cfg.node_add_prob:
        add_node(child, cfg, rng)
    if rng.random() < cfg.conn_add_prob:
        add_connection(child, cfg, rng)
    if rng.random() < cfg.node_delete_prob:
        delete_node(child, rng)
    if rng.random() < cfg.conn_delete_prob:
        delete_connection(child, rng)

    if child.connections:
        keys = list(child.connections)
        old = np.array([child.connections[k].weight for k in keys])
        new = _perturb(old, cfg.weight_mutate_rate, rng, cfg)
        conns = child.connections
        for k, w_old, w in zip(keys, old.tolist(), new.tolist()):
            if w != w_old:
                conns[k] = ConnGene(w, conns[k].enabled)
    keys = list(child.nodes)
    old = np.array([child.nodes[k].bias for k in keys])
    new = _perturb(old, cfg.bias_mutate_rate, rng, cfg)
    redraw = rng.random(len(keys)) < cfg.activation_mutate_rate
    picks = rng.integers(len(cfg.activation_options), size=len(keys))
    for k, b_old, b, r, p in zip(keys, old.tolist(), new.tolist(), redraw.tolist(), picks.tolist()):
        gene = child.nodes[k]
        act = cfg.activation_options[p] if r else gene.activation
        if b != b_old or act != gene.activation:
            child.nodes[k] = NodeGene(b, act)
    return child


def crossover(a: Genome, b: Genome, rng: np.random.Generator) -> Genome:
    """Child with the fitter parent's gene keys; matching genes drawn from either parent.

    Equal fitness favours ``a``. The child inherits the fitter parent's topology,
    which keeps it acyclic.
    """
    if a.fitness is None or b.fitness is None:
        raise ValueError("crossover requires both parents to have a fitness")
    p1, p2 = (a, b) if a.fitness >= b.fitness else (b, a)
    nodes = {}
    for k, gene in p1.nodes.items():
        other = p2.nodes.get(k)
        nodes[k] = gene if other is None or rng.random() < 0.5 else other
    conns = {}
    for k, gene in p1.connections.items():
        other = p2.connections.get(k)
        conns[k] = gene if other is None or rng.random() < 0.5 else other
    return Genome(p1.num_inputs, p1.num_outputs, nodes, conns)


def compatibility_distance(a: Genome, b: Genome, cfg: NeatConfig) -> float:
    """Genetic distance used for speciation.

    Disjoint genes (keys present in only one genome) cost
    ``compatibility_disjoint_coefficient`` each; matching genes cost
    ``compatibility_weight_coefficient`` times their attribute difference
    (``|bias diff| + (activations differ)`` for nodes, ``|weight diff|`` for
    connections). With ``cfg.compatibility_normalize`` the node and connection
    terms are each divided by the larger genome's gene count; otherwise the
    disjoint count is added to the weighted mean matching difference.
    """
    an, bn, ac, bc = a.nodes, b.nodes, a.connections, b.connections
    common_n = an.keys() & bn.keys()
    common_c = ac.keys() & bc.keys()
    disjoint_n = len(an) + len(bn) - 2 * len(common_n)
    disjoint_c = len(ac) + len(bc) - 2 * len(common_c)
    diff_n = 0.0
    for k in common_n:
        x, y = an[k], bn[k]
        diff_n += abs(x.bias - y.bias) + (x.activation != y.activation)
    diff_c = 0.0
    for k in common_c:
        diff_c += abs(ac[k].weight - bc[k].weight)
    cd, cw = cfg.compatibility_disjoint_coefficient, cfg.compatibility_weight_coefficient
    if cfg.compatibility_normalize:
        dist = (cd * disjoint_n + cw * diff_n) / max(len(an), len(bn))
        size_c = max(len(ac), len(bc))
        if size_c:
            dist += (cd * disjoint_c + cw * diff_c) / size_c
        return dist
    matching = len(common_n) + len(common_c)
    mean = (diff_n + diff_c) / matching if matching else 0.0
    return cd * (disjoint_n + disjoint_c) + cw * mean


# text serialisation -----------------------------------------------------------

FORMAT_HEADER = "ecocneat-genome 1"


def dumps(g: Genome) -> str:
    lines = [FORMAT_HEADER, f"io {g.num_inputs} {g.num_outputs}", f"fitness {g.fitness!r}"]
    for nid in sorted(g.nodes):
        n = g.nodes[nid]
        lines.append(f"node {nid} {n.bias!r} {n.activation}")
    for (s, t) in sorted(g.connections):
        c = g.connections[(s, t)]
        lines.append(f"conn {s} {t} {c.weight!r} {int(c.enabled)}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Genome:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != FORMAT_HEADER:
        raise ValueError(f"not a genome file (expected header {FORMAT_HEADER!r})")
    g = None
    fitness = None
    nodes: dict[int, NodeGene] = {}
    conns: dict[tuple[int, int], ConnGene] = {}
    for ln in lines[1:]:
        tag, *rest = ln.split()
        if tag == "io":
            d, o = int(rest[0]), int(rest[1])
            g = (d, o)
        elif tag == "fitness":
            fitness = None if rest[0] == "None" else float(rest[0])
        elif tag == "node":
            nodes[int(rest[0])] = NodeGene(float(rest[1]), rest[2])
        elif tag == "conn":
            conns[(int(rest[0]), int(rest[1]))] = ConnGene(float(rest[2]), rest[3] == "1")
        else:
            raise ValueError(f"unknown record {tag!r}")
    if g is None:
        raise ValueError("genome file lacks the io record")
    out = Genome(g[0], g[1], nodes, conns, fitness)
    out.check()
    return out
