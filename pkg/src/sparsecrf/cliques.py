"""Abstraction clustering, sparsity calibration, and clique sampling.

A pair (i, j) becomes an active long-range clique when its connectivity
F clears a scaled uniform draw: [F >= gamma * U(0,1)], i.e. with
probability min(F/gamma, 1). Evaluating F per pair is quadratic, so
nodes are first grouped into q clusters over their (statistics,
position) features and F is abstracted per (node, cluster) as the
connectivity of the node against the cluster centroid. Sampling then
draws, for each owner node and cluster, a binomial count of active
edges, which is distributionally identical to per-pair Bernoulli draws
that share the abstracted probability.

The sparsity factor gamma is never set directly; it is calibrated by
bisection so the expected sampled degree hits a target (the engine's
headline configuration is 30 long-range cliques per node).
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import assign_additive, select_cluster_members
from .divergence import DivergenceKind, connectivity, connectivity_matrix, divergence
from .field import EncodedStats, StatsField


class CalibrationError(RuntimeError):
    """Target degree cannot be reached for any sparsity factor."""


@dataclass
class ClusterModel:
    """q-way partition over joint (statistics, position) features."""

    q: int
    assignment: np.ndarray  # (n,) int64 cluster ids
    centroid_stats: np.ndarray  # (q, dim)
    centroid_pos: np.ndarray  # (q, 2)
    members: list  # per-cluster sorted node index arrays
    stats: StatsField
    positions: np.ndarray  # (n, 2) scaled to [0, 1]
    objective: float
    objective_trace: list = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return self.assignment.shape[0]

    def centroid(self, c: int) -> EncodedStats:
        return EncodedStats(self.stats.kind, self.stats.bins,
                            self.centroid_stats[c])


@dataclass
class CliqueSet:
    """Sampled long-range pairwise cliques (the local lattice is implicit)."""

    long_range: np.ndarray  # (m, 2) int64, i < j
    F: np.ndarray  # connectivity value each pair was sampled with
    gamma: float
    seed: int
    expected_degree_target: float = float("nan")

    def __post_init__(self):
        self.long_range = np.asarray(self.long_range,
                                     dtype=np.int64).reshape(-1, 2)
        self.F = np.asarray(self.F, dtype=np.float64)

    @property
    def m(self) -> int:
        return len(self.long_range)

    def degrees(self, n: int) -> np.ndarray:
        deg = np.zeros(n, dtype=np.int64)
        if self.m:
            np.add.at(deg, self.long_range[:, 0], 1)
            np.add.at(deg, self.long_range[:, 1], 1)
        return deg

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("i,j,F\n")
            for (i, j), f in zip(self.long_range, self.F):
                fh.write(f"{i},{j},{f:.9g}\n")


def stochastic_indicator(F, gamma: float, u):
    """The clique inclusion rule [F >= gamma * u] for uniform draws u."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return np.asarray(F) >= gamma * np.asarray(u)


def connection_probability(F, gamma: float):
    """P(pair active) = min(F/gamma, 1); exactly 0 at F = 0."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return np.clip(np.asarray(F, dtype=np.float64) / gamma, 0.0, 1.0)


def _joint_distances(stats_vals, pos, centroid_stats, centroid_pos):
    """Additive two-norm distance of every node to every centroid."""
    from ._kernels import pairwise_dots

    S = np.ascontiguousarray(stats_vals)
    M = np.ascontiguousarray(centroid_stats)
    ss = np.sum(S * S, axis=1)
    mm = np.sum(M * M, axis=1)
    d_stat = np.sqrt(np.maximum(ss[:, None] + mm[None, :]
                                - 2.0 * pairwise_dots(S, M), 0.0))
    P = np.ascontiguousarray(pos)
    C = np.ascontiguousarray(centroid_pos)
    pp = np.sum(P * P, axis=1)
    cc = np.sum(C * C, axis=1)
    d_pos = np.sqrt(np.maximum(pp[:, None] + cc[None, :]
                               - 2.0 * pairwise_dots(P, C), 0.0))
    return d_stat + d_pos


def _assigned_objective(vals, pos, assignment, centroid_stats, centroid_pos):
    """Additive two-norm objective of an assignment against its centroids."""
    d_stat = np.sqrt(np.sum((vals - centroid_stats[assignment]) ** 2, axis=1))
    d_pos = np.sqrt(np.sum((pos - centroid_pos[assignment]) ** 2, axis=1))
    return float(np.sum(d_stat + d_pos))


def _members_from_assignment(assignment, q):
    order = np.argsort(assignment, kind="stable")
    sorted_assign = assignment[order]
    bounds = np.searchsorted(sorted_assign, np.arange(q + 1))
    return [np.sort(order[bounds[c]:bounds[c + 1]]) for c in range(q)]


def _centroids(stats_vals, pos, assignment, q):
    counts = np.bincount(assignment, minlength=q).astype(np.float64)
    counts = np.maximum(counts, 1.0)
    cs = np.zeros((q, stats_vals.shape[1]))
    np.add.at(cs, assignment, stats_vals)
    cp = np.zeros((q, 2))
    np.add.at(cp, assignment, pos)
    return cs / counts[:, None], cp / counts[:, None]


def cluster_nodes(stats: StatsField, positions: np.ndarray, q: int,
                  seed: int = 0, max_iter: int = 50,
                  restarts: int = 1) -> ClusterModel:
    """Lloyd-style clustering under the additive (stats, position) objective.

    Assignment minimizes ||S_j - mu_S,c|| + ||p_j - mu_p,c|| per node;
    centroids are coordinate means. Because means do not exactly minimize
    the non-squared objective, an iteration that would increase it rolls
    back and stops, keeping the objective trace non-increasing. With
    restarts > 1 the best of several seeded inits is kept (Lloyd is a
    local search and can stall on tiny instances).
    """
    n = stats.n_nodes
    if not (1 <= q <= n):
        raise ValueError(f"q must be in [1, {n}]")
    if restarts > 1:
        runs = [cluster_nodes(stats, positions, q, seed=seed + r,
                              max_iter=max_iter) for r in range(restarts)]
        return min(runs, key=lambda m: m.objective)
    vals = stats.values
    pos = np.asarray(positions, dtype=np.float64).reshape(n, 2)

    if q == n:
        assignment = np.arange(n, dtype=np.int64)
        return ClusterModel(q=q, assignment=assignment,
                            centroid_stats=vals.copy(),
                            centroid_pos=pos.copy(),
                            members=[np.array([i]) for i in range(n)],
                            stats=stats, positions=pos, objective=0.0,
                            objective_trace=[0.0])

    rng = np.random.default_rng(seed)
    # k-means++-style seeding under the additive metric
    first = int(rng.integers(n))
    chosen = [first]
    d_near = _joint_distances(vals, pos, vals[[first]], pos[[first]]).ravel()
    for _ in range(1, q):
        total = d_near.sum()
        if total <= 0:
            remaining = np.setdiff1d(np.arange(n), np.array(chosen))
            nxt = int(remaining[int(rng.integers(len(remaining)))])
        else:
            nxt = int(rng.choice(n, p=d_near / total))
        chosen.append(nxt)
        d_new = _joint_distances(vals, pos, vals[[nxt]], pos[[nxt]]).ravel()
        d_near = np.minimum(d_near, d_new)

    centroid_stats = vals[chosen].copy()
    centroid_pos = pos[chosen].copy()
    assignment = None
    prev_objective = np.inf
    prev_state = None
    trace = []

    for _ in range(max_iter):
        new_assign, node_d = assign_additive(
            np.ascontiguousarray(vals), np.ascontiguousarray(pos),
            np.ascontiguousarray(centroid_stats),
            np.ascontiguousarray(centroid_pos))

        # revive empty clusters with the currently worst-fit nodes
        present = np.bincount(new_assign, minlength=q)
        empties = np.nonzero(present == 0)[0]
        if len(empties):
            worst = np.argsort(-node_d, kind="stable")
            at = 0
            for c in empties:
                while present[new_assign[worst[at]]] <= 1:
                    at += 1
                present[new_assign[worst[at]]] -= 1
                new_assign[worst[at]] = c
                present[c] = 1
                at += 1

        centroid_stats, centroid_pos = _centroids(vals, pos, new_assign, q)
        objective = _assigned_objective(vals, pos, new_assign,
                                        centroid_stats, centroid_pos)

        if objective > prev_objective + 1e-12:
            assignment, centroid_stats, centroid_pos, objective = prev_state
            break
        trace.append(objective)
        stable = assignment is not None and np.array_equal(assignment, new_assign)
        assignment = new_assign
        prev_state = (assignment, centroid_stats.copy(), centroid_pos.copy(),
                      objective)
        prev_objective = objective
        if stable:
            break

    return ClusterModel(q=q, assignment=assignment,
                        centroid_stats=centroid_stats,
                        centroid_pos=centroid_pos,
                        members=_members_from_assignment(assignment, q),
                        stats=stats, positions=pos,
                        objective=prev_objective, objective_trace=trace)


def clustering_objective(model: ClusterModel) -> float:
    return _assigned_objective(model.stats.values, model.positions,
                               model.assignment, model.centroid_stats,
                               model.centroid_pos)


def cluster_connectivity(l: int, c: int, model: ClusterModel,
                         div: DivergenceKind, mode: str | None = None) -> float:
    """Abstracted connectivity: node l against cluster c's centroid."""
    D = divergence(div, model.stats.node(l), model.centroid(c))
    return float(connectivity(D, div.tau, mode or div.mode))


def cluster_connectivity_exact(l: int, c: int, model: ClusterModel,
                               div: DivergenceKind,
                               mode: str | None = None) -> float:
    """Slow reference: mean pairwise connectivity over the cluster members."""
    Si = model.stats.node(l)
    vals = [connectivity(divergence(div, Si, model.stats.node(int(j))),
                         div.tau, mode or div.mode)
            for j in model.members[c]]
    return float(np.mean(vals))


def fhat_matrix(model: ClusterModel, div: DivergenceKind) -> np.ndarray:
    """All abstracted connectivities at once, shape (n, q)."""
    return connectivity_matrix(div, model.stats, model.centroid_stats)


def _higher_partner_csr(n: int, exclude_pairs) -> tuple[np.ndarray, np.ndarray]:
    """CSR of excluded higher-index partners per node."""
    if exclude_pairs is None or len(exclude_pairs) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(n + 1, dtype=np.int64)
    pairs = np.asarray(exclude_pairs, dtype=np.int64).reshape(-1, 2)
    lo = pairs.min(axis=1)
    hi = pairs.max(axis=1)
    order = np.lexsort((hi, lo))
    lo, hi = lo[order], hi[order]
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, lo + 1, 1)
    return hi, np.cumsum(ptr)


def _pool_matrix(model: ClusterModel, exclude_pairs, owner_side: bool) -> np.ndarray:
    """Candidate-pool sizes per (node, cluster).

    owner_side counts only higher-index members (each unordered pair is
    drawn once, by its lower-index node); otherwise all members except
    the node itself. Excluded pairs (the local lattice) are removed from
    whichever side counts them.
    """
    n, q = model.n_nodes, model.q
    nodes = np.arange(n)
    pool = np.empty((n, q), dtype=np.int64)
    for c in range(q):
        mem = model.members[c]
        if owner_side:
            pool[:, c] = len(mem) - np.searchsorted(mem, nodes, side="right")
        else:
            pool[:, c] = len(mem)
    if not owner_side:
        pool[nodes, model.assignment] -= 1

    if exclude_pairs is not None and len(exclude_pairs):
        pairs = np.asarray(exclude_pairs, dtype=np.int64).reshape(-1, 2)
        lo = pairs.min(axis=1)
        hi = pairs.max(axis=1)
        np.subtract.at(pool, (lo, model.assignment[hi]), 1)
        if not owner_side:
            np.subtract.at(pool, (hi, model.assignment[lo]), 1)
    return pool


def expected_degree(model: ClusterModel, div: DivergenceKind, gamma: float,
                    exclude_pairs=None, fhat: np.ndarray | None = None) -> float:
    """Mean over nodes of the per-node expected sampled degree."""
    F = fhat_matrix(model, div) if fhat is None else fhat
    pool = _pool_matrix(model, exclude_pairs, owner_side=False)
    return float(np.mean(np.sum(pool * connection_probability(F, gamma),
                                axis=1)))


def calibrate_gamma(model: ClusterModel, div: DivergenceKind,
                    target_degree: float, exclude_pairs=None,
                    rel_tol: float = 0.01) -> float:
    """Bisection for the gamma whose expected degree hits the target.

    The expected degree is monotone non-increasing in gamma, so plain
    bisection converges; the result matches the target within rel_tol
    (default the 1% contract).
    """
    n = model.n_nodes
    if not (0 < target_degree <= n - 1):
        raise ValueError(f"target degree must be in (0, {n - 1}]")
    F = fhat_matrix(model, div)
    pool = _pool_matrix(model, exclude_pairs, owner_side=False)
    reachable = float(np.mean(np.sum(pool * (F > 0), axis=1)))
    if reachable < target_degree * (1 - rel_tol):
        raise CalibrationError(
            f"target degree {target_degree} unreachable "
            f"(max expected degree {reachable:.3f})"
        )

    def g(gamma):
        return float(np.mean(np.sum(
            pool * connection_probability(F, gamma), axis=1)))

    f_max = float(F.max())
    if f_max <= 0:
        raise CalibrationError("all connectivities are zero")
    lo = f_max
    while g(lo) < target_degree and lo > 1e-300:
        lo /= 2.0
    hi = f_max
    while g(hi) > target_degree:
        hi *= 2.0

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if abs(val - target_degree) <= rel_tol * target_degree:
            return mid
        if val > target_degree:
            lo = mid
        else:
            hi = mid
        if (hi - lo) <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def sample_cliques(model: ClusterModel, div: DivergenceKind, gamma: float,
                   seed: int, exclude_pairs=None,
                   expected_degree_target: float = float("nan")) -> CliqueSet:
    """Draw the active long-range clique set.

    For each owner node l and cluster c, the number of active edges into
    c is Binomial(pool, min(F_hat(l,c)/gamma, 1)) over the higher-index
    members of c (minus excluded lattice partners), and that many members
    are picked uniformly without replacement. Deterministic per seed.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    n, q = model.n_nodes, model.q
    F = fhat_matrix(model, div)
    P = connection_probability(F, gamma)
    pool = _pool_matrix(model, exclude_pairs, owner_side=True)

    rng = np.random.default_rng(seed)
    counts = rng.binomial(pool, P)
    owners, cluster_ids = np.nonzero(counts)
    ks = counts[owners, cluster_ids].astype(np.int64)
    uniforms = rng.random(int(ks.sum()))

    members_ptr = np.zeros(q + 1, dtype=np.int64)
    for c in range(q):
        members_ptr[c + 1] = members_ptr[c] + len(model.members[c])
    members_flat = (np.concatenate(model.members).astype(np.int64)
                    if n else np.zeros(0, dtype=np.int64))
    excl_flat, excl_ptr = _higher_partner_csr(n, exclude_pairs)

    ii, jj = select_cluster_members(
        owners.astype(np.int64), cluster_ids.astype(np.int64), ks,
        members_flat, members_ptr, excl_flat, excl_ptr,
        model.assignment.astype(np.int64), uniforms,
    )
    pairs = np.stack([ii, jj], axis=1)
    fvals = F[ii, model.assignment[jj]] if len(ii) else np.zeros(0)
    return CliqueSet(long_range=pairs, F=fvals, gamma=float(gamma),
                     seed=int(seed),
                     expected_degree_target=float(expected_degree_target))


def sample_cliques_bernoulli(model: ClusterModel, div: DivergenceKind,
                             gamma: float, seed: int,
                             exclude_pairs=None) -> CliqueSet:
    """Naive per-pair Bernoulli reference sampler (small n only).

    Pair (i, j) with i < j is kept with probability
    min(F_hat(i, cluster(j))/gamma, 1) -- the same law the binomial
    sampler realizes, drawn one pair at a time.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    n = model.n_nodes
    F = fhat_matrix(model, div)
    ii, jj = np.triu_indices(n, k=1)
    probs = connection_probability(F[ii, model.assignment[jj]], gamma)
    if exclude_pairs is not None and len(exclude_pairs):
        pairs = np.asarray(exclude_pairs, dtype=np.int64).reshape(-1, 2)
        lo = pairs.min(axis=1)
        hi = pairs.max(axis=1)
        banned = set(zip(lo.tolist(), hi.tolist()))
        mask = np.array([(a, b) not in banned for a, b in zip(ii, jj)])
        ii, jj, probs = ii[mask], jj[mask], probs[mask]
    rng = np.random.default_rng(seed)
    keep = rng.random(len(ii)) < probs
    pairs = np.stack([ii[keep], jj[keep]], axis=1)
    return CliqueSet(long_range=pairs,
                     F=F[ii[keep], model.assignment[jj[keep]]],
                     gamma=float(gamma), seed=int(seed))


@dataclass
class DegreeReport:
    n: int
    edges: int
    mean_degree: float
    min_degree: int
    max_degree: int
    implied_p: float
    epsilon: float
    p_lower: float
    p_upper: float
    lower_ok: bool
    upper_ok: bool


def degree_report(cs: CliqueSet, n: int, epsilon: float = 0.1) -> DegreeReport:
    """Degree summary plus the sparsification-condition flags.

    The implied per-pair probability mean_degree/(n-1) is checked against
    the connectedness lower bound and the minimum-cut upper bound for the
    supplied epsilon.
    """
    from .randgraph import sparsification_bounds

    deg = cs.degrees(n)
    mean_deg = float(deg.mean()) if n else 0.0
    bounds = sparsification_bounds(max(n, 2), epsilon)
    implied_p = mean_deg / (n - 1) if n > 1 else 0.0
    return DegreeReport(
        n=n, edges=cs.m, mean_degree=mean_deg,
        min_degree=int(deg.min()) if n else 0,
        max_degree=int(deg.max()) if n else 0,
        implied_p=implied_p, epsilon=epsilon,
        p_lower=bounds.p_lower, p_upper=bounds.p_upper,
        lower_ok=implied_p >= bounds.p_lower,
        upper_ok=implied_p <= bounds.p_upper,
    )
