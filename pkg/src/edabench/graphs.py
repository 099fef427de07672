"""Weighted graphs, planted cut instances, and the size-constrained sampler.

Max-cut instances are generated with a planted optimum: the nodes are split
into two halves, every edge crosses between the halves, so the planted
assignment certifiably attains the maximal possible cut value (the total edge
weight).  Edge weights are uniform in [1, 2] rather than unit so that cut
values of distinct crossing sets never tie; in particular any assignment that
misses at least one edge falls short of the optimum by at least 1, which
makes optimum detection robust to float summation order.

The bipartition problem uses the same instances plus a prescribed size for
the ones-class; feasibility is enforced at sampling time by a random-order
conditioned-Bernoulli sampler with quota forcing.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import RngStream, as_generator
from .objectives import Objective

try:
    from . import _fast

    HAVE_FAST = True
except ImportError:  # pragma: no cover
    HAVE_FAST = False

__all__ = [
    "WeightedGraph",
    "PlantedInstance",
    "BipartitionConstraint",
    "cut_value",
    "exhaustive_max_cut",
    "planted_maxcut",
    "constrained_partition_sample",
    "maxcut_objective",
    "bipartition_objective",
    "save_instance",
    "load_instance",
]


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with non-negative edge weights, edges stored u < v."""

    n_nodes: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        u, v, w = self.edge_u, self.edge_v, self.weights
        if not (len(u) == len(v) == len(w)):
            raise ValueError("edge arrays must have equal length")
        if len(u) and not np.all(u < v):
            raise ValueError("edges must be stored with u < v (no self-loops)")
        if len(u) and (u.min() < 0 or v.max() >= self.n_nodes):
            raise ValueError("edge endpoints out of range")
        if len(u) and np.any(w < 0):
            raise ValueError("edge weights must be non-negative")
        keys = u.astype(np.int64) * self.n_nodes + v
        if len(np.unique(keys)) != len(keys):
            raise ValueError("duplicate edges")

    @classmethod
    def from_edges(cls, n_nodes: int, edges) -> "WeightedGraph":
        triples = list(edges)
        u = np.array([t[0] for t in triples], dtype=np.int64)
        v = np.array([t[1] for t in triples], dtype=np.int64)
        w = np.array([t[2] for t in triples], dtype=np.float64)
        return cls(n_nodes, u, v, w)

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def cut_value(graph: WeightedGraph, x) -> float:
    """Sum of the weights of edges whose endpoints get different labels."""
    x = np.asarray(x)
    if x.shape != (graph.n_nodes,):
        raise ValueError(f"assignment must have {graph.n_nodes} entries")
    crossing = x[graph.edge_u] != x[graph.edge_v]
    return float(graph.weights[crossing].sum())


def exhaustive_max_cut(graph: WeightedGraph, limit: int = 20) -> tuple[float, np.ndarray]:
    """Brute force over all 2^n assignments; usable up to ~20 nodes.

    The scan ranks assignments with a vectorized dot product, then recomputes
    the winner's value through ``cut_value`` so the returned value is exactly
    comparable with other ``cut_value`` results.
    """
    n = graph.n_nodes
    if n > limit:
        raise ValueError(f"exhaustive search limited to {limit} nodes, got {n}")
    codes = np.arange(2**n, dtype=np.uint32)
    bits = ((codes[:, None] >> np.arange(n, dtype=np.uint32)) & 1).astype(np.uint8)
    crossing = bits[:, graph.edge_u] != bits[:, graph.edge_v]
    scores = crossing.astype(np.float64) @ graph.weights
    best = bits[int(np.argmax(scores))]
    return cut_value(graph, best), best


@dataclass(frozen=True)
class PlantedInstance:
    """A graph whose maximal cut is known by construction."""

    graph: WeightedGraph
    planted_assignment: np.ndarray
    optimal_value: float


def planted_maxcut(
    n: int, cross_density: float, rng: "RngStream | np.random.Generator"
) -> PlantedInstance:
    """Generate a max-cut instance with a certified planted optimum.

    Nodes 0..n/2-1 form one half, the rest the other; each cross pair becomes
    an edge with probability ``cross_density`` and weight uniform in [1, 2];
    there are no intra-half edges.  Every edge crosses the planted cut, so the
    planted value is the total edge weight, trivially maximal.  Instances with
    at most 16 nodes are certified against exhaustive search at generation
    time.
    """
    if n < 4 or n % 2:
        raise ValueError("planted max-cut needs an even number of nodes >= 4")
    if not 0.0 < cross_density <= 1.0:
        raise ValueError("cross density must lie in (0, 1]")
    gen = as_generator(rng)
    half = n // 2
    include = gen.random((half, half)) < cross_density
    uu, vv = np.nonzero(include)
    weights = 1.0 + gen.random(len(uu))
    graph = WeightedGraph(n, uu.astype(np.int64), (vv + half).astype(np.int64), weights)
    planted = np.zeros(n, dtype=np.uint8)
    planted[:half] = 1
    optimal = cut_value(graph, planted)
    if n <= 16:
        brute, _ = exhaustive_max_cut(graph)
        if brute != optimal:
            raise AssertionError("planted optimum failed exhaustive certification")
    return PlantedInstance(graph, planted, optimal)


@dataclass(frozen=True)
class BipartitionConstraint:
    """Prescribed size of the ones-class of the partition."""

    ones_count: int

    def validate_for(self, n: int) -> None:
        if not 0 <= self.ones_count <= n:
            raise ValueError(f"ones count {self.ones_count} outside [0, {n}]")


def constrained_partition_sample(
    p: np.ndarray,
    constraint: "BipartitionConstraint | int",
    rng: "RngStream | np.random.Generator",
) -> np.ndarray:
    """Sample a bit string with exactly m ones from per-bit frequencies.

    Indices are visited in a fresh uniformly random order; each index is
    forced when one quota is exhausted and otherwise drawn Bernoulli(p_j).
    Under uniform p the marginal of every bit is exactly m/n by symmetry.
    """
    m = constraint.ones_count if isinstance(constraint, BipartitionConstraint) else int(constraint)
    n = p.shape[0]
    if not 0 <= m <= n:
        raise ValueError(f"ones count {m} outside [0, {n}]")
    gen = as_generator(rng)
    if HAVE_FAST:
        return _fast.constrained_sample(gen, np.asarray(p, dtype=np.float64), m)
    out = np.zeros(n, dtype=np.uint8)
    ones_left, zeros_left = m, n - m
    for idx in gen.permutation(n):
        if ones_left == 0:
            zeros_left -= 1
        elif zeros_left == 0:
            out[idx] = 1
            ones_left -= 1
        elif gen.random() < p[idx]:
            out[idx] = 1
            ones_left -= 1
        else:
            zeros_left -= 1
    return out


def _cut_batch(graph: WeightedGraph):
    u, v, w = graph.edge_u, graph.edge_v, graph.weights

    def batch(X: np.ndarray) -> np.ndarray:
        return (X[:, u] != X[:, v]).astype(np.float64) @ w

    return batch


def _optimum_gap(graph: WeightedGraph) -> float:
    # a sub-optimal cut misses at least one edge, so half the lightest weight
    # separates optimal from non-optimal far beyond float summation noise
    return 0.5 * float(graph.weights.min()) if graph.n_edges else 0.0


def maxcut_objective(instance: PlantedInstance) -> Objective:
    """Maximize the cut value over all assignments; optimum is the planted value."""
    graph = instance.graph
    return Objective(
        name="maxcut",
        dimension=graph.n_nodes,
        optimum_value=instance.optimal_value,
        evaluate_true=lambda x: cut_value(graph, x),
        evaluate_batch=_cut_batch(graph),
        optimum_gap=_optimum_gap(graph),
    )


def bipartition_objective(
    instance: PlantedInstance, constraint: BipartitionConstraint
) -> Objective:
    """Maximize the cut value over assignments with a prescribed ones-count.

    The feasible domain is enforced at sampling time: kernels run on this
    objective draw individuals through the size-constrained sampler instead of
    independent per-bit sampling.  Optimality is judged against the planted
    value (attainable when the constraint admits the planted assignment).
    """
    graph = instance.graph
    constraint.validate_for(graph.n_nodes)
    m = constraint.ones_count

    def sampler(p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return constrained_partition_sample(p, m, rng)

    return Objective(
        name="bipartition",
        dimension=graph.n_nodes,
        optimum_value=instance.optimal_value,
        evaluate_true=lambda x: cut_value(graph, x),
        evaluate_batch=_cut_batch(graph),
        optimum_gap=_optimum_gap(graph),
        sampler=sampler,
    )


def save_instance(instance: PlantedInstance, path) -> None:
    """Plain-text instance file: header, edge list, planted assignment, optimum.

    Line 1 is "n m_edges"; then one "u v w" triple per edge (0-indexed, w in
    full-precision decimal); then the planted assignment as a line of n
    characters in {0, 1}; finally the optimal value on its own line.
    """
    graph = instance.graph
    lines = [f"{graph.n_nodes} {graph.n_edges}"]
    for u, v, w in zip(graph.edge_u, graph.edge_v, graph.weights):
        lines.append(f"{int(u)} {int(v)} {float(w)!r}")
    lines.append("".join(str(int(b)) for b in instance.planted_assignment))
    lines.append(repr(float(instance.optimal_value)))
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path) -> PlantedInstance:
    lines = Path(path).read_text().splitlines()
    if len(lines) < 3:
        raise ValueError(f"instance file {path} is truncated")
    n, m = (int(tok) for tok in lines[0].split())
    if len(lines) != m + 3:
        raise ValueError(f"instance file {path}: expected {m + 3} lines, got {len(lines)}")
    triples = []
    for line in lines[1 : m + 1]:
        u, v, w = line.split()
        triples.append((int(u), int(v), float(w)))
    graph = WeightedGraph.from_edges(n, triples)
    assignment = np.frombuffer(lines[m + 1].encode(), dtype=np.uint8) - ord("0")
    if assignment.shape != (n,) or not np.all((assignment == 0) | (assignment == 1)):
        raise ValueError(f"instance file {path}: malformed planted assignment")
    optimal = float(lines[m + 2])
    if cut_value(graph, assignment) != optimal:
        raise ValueError(f"instance file {path}: stored optimum does not match the assignment")
    return PlantedInstance(graph, assignment.copy(), optimal)
