"""Random-graph generators and the sparsification-bound calculator.

This is the laboratory behind the sparsification conditions: generators
for the G(n,p) / G(n,m) / per-pair-probability families, component
analysis for regime checks (giant component, connectivity threshold),
and the connectedness / cut-preservation probability bounds with natural
logarithms throughout (forced by reproducing the worked 9.7460e-5
figure for n = 120000).
"""

import math
from dataclasses import dataclass

import numpy as np

from .mincut import st_min_cut


@dataclass
class SparseGraph:
    n: int
    edges: np.ndarray  # (m, 2) int64, i < j, unique
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(self.edges):
            lo = self.edges.min(axis=1)
            hi = self.edges.max(axis=1)
            if (lo == hi).any():
                raise ValueError("self-loops are not allowed")
            if lo.min() < 0 or hi.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            keys = lo * self.n + hi
            if len(np.unique(keys)) != len(keys):
                raise ValueError("duplicate edges are not allowed")
            self.edges = np.stack([lo, hi], axis=1)
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            if self.weights.shape[0] != len(self.edges):
                raise ValueError("weights length mismatch")
            if len(self.weights) and self.weights.min() <= 0:
                raise ValueError("weights must be positive")

    @property
    def m(self) -> int:
        return len(self.edges)


@dataclass
class SparsificationBounds:
    n: int
    epsilon: float
    p_lower: float  # connectedness condition
    p_upper: float  # minimum-cut condition
    degree_lower: float
    max_edges: float


def sparsification_bounds(n: int, epsilon: float = 1.0) -> SparsificationBounds:
    """Lower/upper per-pair probability bounds for a faithful sparse graph."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (0 < epsilon <= 1):
        raise ValueError("epsilon must be in (0, 1]")
    ln_n = math.log(n)
    return SparsificationBounds(
        n=n,
        epsilon=epsilon,
        p_lower=ln_n / n,
        p_upper=ln_n / (n * epsilon * epsilon),
        degree_lower=ln_n,
        max_edges=n * ln_n / (epsilon * epsilon),
    )


def _all_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def gen_gnp(n: int, p: float, seed: int) -> SparseGraph:
    """G(n, p): every pair kept independently with probability p."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must be in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    ii, jj = _all_pairs(n)
    keep = rng.random(len(ii)) < p
    return SparseGraph(n, np.stack([ii[keep], jj[keep]], axis=1))


def gen_gnm(n: int, m: int, seed: int) -> SparseGraph:
    """G(n, m): exactly m edges, uniform over edge sets."""
    n_pairs = n * (n - 1) // 2
    if not (0 <= m <= n_pairs):
        raise ValueError(f"m must be in [0, {n_pairs}]")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(n_pairs, size=m, replace=False)
    chosen.sort()
    ii, jj = _all_pairs(n)
    return SparseGraph(n, np.stack([ii[chosen], jj[chosen]], axis=1))


def gen_gnpij(n: int, p, seed: int) -> SparseGraph:
    """Generalized model: pair (i,j) kept with its own probability p(i,j).

    p may be a callable over (i, j) index arrays (or scalars) or a full
    (n, n) matrix; values must lie in [0, 1].
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ii, jj = _all_pairs(n)
    if callable(p):
        probs = np.asarray(p(ii, jj), dtype=np.float64)
        if probs.shape != ii.shape:
            probs = np.array([p(int(i), int(j)) for i, j in zip(ii, jj)],
                             dtype=np.float64)
    else:
        mat = np.asarray(p, dtype=np.float64)
        probs = mat[ii, jj]
    if len(probs) and (probs.min() < 0 or probs.max() > 1):
        raise ValueError("probabilities must be in [0, 1]")
    rng = np.random.default_rng(seed)
    keep = rng.random(len(ii)) < probs
    return SparseGraph(n, np.stack([ii[keep], jj[keep]], axis=1))


def connected_components(g: SparseGraph) -> list[list[int]]:
    """Union-find partition of the nodes, components ordered by smallest member."""
    parent = np.arange(g.n, dtype=np.int64)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for i, j in g.edges:
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            if ri < rj:
                parent[rj] = ri
            else:
                parent[ri] = rj

    groups: dict[int, list[int]] = {}
    for v in range(g.n):
        groups.setdefault(find(v), []).append(v)
    return [groups[r] for r in sorted(groups)]


def is_connected(g: SparseGraph) -> bool:
    return g.n <= 1 or len(connected_components(g)) == 1


def largest_component_size(g: SparseGraph) -> int:
    if g.n == 0:
        return 0
    return max(len(c) for c in connected_components(g))


@dataclass
class RegimeSummary:
    n: int
    p: float
    trials: int
    fraction_connected: float
    mean_largest_component: float


def regime_summary(n: int, p: float, trials: int, seed: int = 0) -> RegimeSummary:
    """Monte-Carlo connectivity/giant-component profile of G(n, p)."""
    connected = 0
    sizes = 0.0
    for k in range(trials):
        g = gen_gnp(n, p, seed + k)
        comps = connected_components(g)
        if len(comps) == 1:
            connected += 1
        sizes += max(len(c) for c in comps)
    return RegimeSummary(n=n, p=p, trials=trials,
                         fraction_connected=connected / trials,
                         mean_largest_component=sizes / trials)


def planted_two_cluster_graph(n: int, w_intra: float = 1.0,
                              w_inter: float = 0.01) -> SparseGraph:
    """Weighted complete graph with two planted clusters of n/2 nodes.

    Intra-cluster edges are heavy, inter-cluster edges light, so the
    planted bipartition is the minimum cut by a wide margin.
    """
    ii, jj = _all_pairs(n)
    half = n // 2
    same = (ii < half) == (jj < half)
    w = np.where(same, w_intra, w_inter)
    return SparseGraph(n, np.stack([ii, jj], axis=1), weights=w)


def sampled_cut_ratio(g: SparseGraph, p: float, seed: int, s: int, t: int,
                      reweight: bool = True) -> float:
    """Ratio of the Bernoulli-sampled graph's s-t min-cut to the dense one's.

    Kept edges can be reweighted by 1/p so the sampled cut is an unbiased
    estimate of the dense cut (the weight compensation the sampling
    theorem relies on); the flag exists because the segmentation sampler
    runs unweighted.
    """
    dense_cut, _ = st_min_cut(g.n, g.edges, g.weights, s, t)
    rng = np.random.default_rng(seed)
    keep = rng.random(g.m) < p
    w = g.weights[keep]
    if reweight:
        w = w / p
    if not keep.any():
        return 0.0
    sampled_cut, _ = st_min_cut(g.n, g.edges[keep], w, s, t)
    return sampled_cut / dense_cut
