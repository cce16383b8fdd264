"""Exact s-t min-cut inference over assembled energies.

The solver is a serial Dinic max-flow over a flat residual arc list
(numba-compiled); any exact max-flow would do, the contract here is
exactness and determinism, not the algorithm. Capacities stay as
double-precision reals throughout. A 2^n brute-force minimizer is kept
alongside as the verification oracle.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import dinic_max_flow, residual_reaches_sink
from .energy import EnergyModel, total_energy


@dataclass
class FlowNetwork:
    """Residual network; arcs 2k and 2k+1 are a forward/backward pair."""

    n_nodes: int
    source: int
    sink: int
    arc_to: np.ndarray
    arc_cap: np.ndarray  # residual capacities, mutated by max_flow
    arc_cap0: np.ndarray  # capacities as built
    csr_ptr: np.ndarray
    csr_arcs: np.ndarray
    offset: float = 0.0
    n_variables: int = 0

    @classmethod
    def build(cls, n_nodes, source, sink, frm, to, cap_fwd, cap_bwd,
              offset=0.0, n_variables=0) -> "FlowNetwork":
        """Assemble from parallel arc arrays; arc order fixes tie-breaking."""
        frm = np.asarray(frm, dtype=np.int64)
        to = np.asarray(to, dtype=np.int64)
        cap_fwd = np.asarray(cap_fwd, dtype=np.float64)
        cap_bwd = np.asarray(cap_bwd, dtype=np.float64)
        if cap_fwd.size and (cap_fwd.min() < 0 or cap_bwd.min() < 0):
            raise ValueError("negative capacity (invariant breach upstream)")
        m = frm.shape[0]
        arc_from = np.empty(2 * m, dtype=np.int64)
        arc_to = np.empty(2 * m, dtype=np.int64)
        arc_cap = np.empty(2 * m, dtype=np.float64)
        arc_from[0::2] = frm
        arc_to[0::2] = to
        arc_cap[0::2] = cap_fwd
        arc_from[1::2] = to
        arc_to[1::2] = frm
        arc_cap[1::2] = cap_bwd
        order = np.argsort(arc_from, kind="stable")
        csr_ptr = np.zeros(n_nodes + 1, dtype=np.int64)
        np.add.at(csr_ptr, arc_from + 1, 1)
        csr_ptr = np.cumsum(csr_ptr)
        return cls(n_nodes=n_nodes, source=source, sink=sink,
                   arc_to=arc_to, arc_cap=arc_cap, arc_cap0=arc_cap.copy(),
                   csr_ptr=csr_ptr, csr_arcs=order, offset=float(offset),
                   n_variables=n_variables)


@dataclass
class MaxFlowResult:
    flow: float
    source_side: np.ndarray  # bool per node, terminals included


def build_st_graph(em: EnergyModel) -> FlowNetwork:
    """Map a submodular binary energy onto a flow network.

    Node i sits on the source side iff y_i = 1. Terminal arc capacities
    carry the unary costs above their per-node minimum (the minima sum to
    a constant offset recorded on the network); every pairwise term
    contributes a symmetric arc pair of capacity lambda * theta.
    """
    n = em.n_nodes
    s, t = n, n + 1
    u = em.unary
    m_i = np.minimum(u[:, 0], u[:, 1])
    offset = float(m_i.sum())
    nodes = np.arange(n)

    frm = [np.full(n, s), nodes]
    to = [nodes, np.full(n, t)]
    cap_fwd = [u[:, 0] - m_i, u[:, 1] - m_i]
    cap_bwd = [np.zeros(n), np.zeros(n)]

    for pairs, theta, lam in ((em.local_pairs, em.local_theta, em.lambda_local),
                              (em.long_pairs, em.long_theta, em.lambda_long)):
        if len(pairs):
            w = lam * theta
            frm.append(pairs[:, 0])
            to.append(pairs[:, 1])
            cap_fwd.append(w)
            cap_bwd.append(w)

    return FlowNetwork.build(
        n + 2, s, t,
        np.concatenate(frm), np.concatenate(to),
        np.concatenate(cap_fwd), np.concatenate(cap_bwd),
        offset=offset, n_variables=n,
    )


def max_flow(net: FlowNetwork) -> MaxFlowResult:
    """Run the solver; returns flow value and the min-cut partition.

    Nodes with no residual path to the sink (including ones unreachable
    from both terminals) are placed on the source side. Asserts the
    max-flow/min-cut identity on the way out.
    """
    flow = float(dinic_max_flow(net.n_nodes, net.source, net.sink,
                                net.arc_to, net.arc_cap,
                                net.csr_ptr, net.csr_arcs))
    reach_t = residual_reaches_sink(net.n_nodes, net.sink, net.arc_to,
                                    net.arc_cap, net.csr_ptr, net.csr_arcs)
    source_side = ~reach_t
    cut = cut_value(net, source_side)
    if not np.isclose(flow, cut, rtol=1e-9, atol=1e-6):
        raise AssertionError(f"max-flow {flow} != min-cut {cut}")
    return MaxFlowResult(flow=flow, source_side=source_side)


def cut_value(net: FlowNetwork, source_side: np.ndarray) -> float:
    """Total original capacity crossing from the source side."""
    frm_side = source_side[net.arc_to[1::2]]  # arc 2k's origin is arc 2k+1's head
    to_side = source_side[net.arc_to[0::2]]
    crossing_fwd = frm_side & ~to_side
    crossing_bwd = to_side & ~frm_side
    return float(net.arc_cap0[0::2][crossing_fwd].sum()
                 + net.arc_cap0[1::2][crossing_bwd].sum())


def extract_labels(net: FlowNetwork, result: MaxFlowResult) -> np.ndarray:
    """Source-side variables become foreground (label 1)."""
    return result.source_side[: net.n_variables].astype(np.uint8)


def solve_labels(em: EnergyModel) -> tuple[np.ndarray, float]:
    """Convenience: build, cut, extract; returns (labels, energy)."""
    net = build_st_graph(em)
    res = max_flow(net)
    labels = extract_labels(net, res)
    return labels, total_energy(em, labels)


def st_min_cut(n: int, pairs, caps, s: int, t: int) -> tuple[float, np.ndarray]:
    """s-t min-cut of an undirected weighted graph (lab utility)."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    caps = np.asarray(caps, dtype=np.float64)
    net = FlowNetwork.build(n, s, t, pairs[:, 0], pairs[:, 1], caps, caps)
    res = max_flow(net)
    return res.flow, res.source_side


def brute_force_min_energy(em: EnergyModel) -> tuple[float, np.ndarray]:
    """Exact minimum over all 2^n labelings (n <= 20).

    Ties break toward the lexicographically smallest labeling, reading
    y_0 first.
    """
    n = em.n_nodes
    if n > 20:
        raise ValueError(f"brute force refused for n={n} > 20 nodes")
    all_pairs = np.concatenate([em.local_pairs, em.long_pairs], axis=0)
    all_w = np.concatenate([em.lambda_local * em.local_theta,
                            em.lambda_long * em.long_theta])
    du = em.unary[:, 1] - em.unary[:, 0]
    base = float(em.unary[:, 0].sum())
    # y_i is bit (n-1-i) of k, so increasing k is lexicographic order on y
    shifts = n - 1 - np.arange(n)

    best_e = np.inf
    best_k = -1
    block = 1 << 16
    for lo in range(0, 1 << n, block):
        ks = np.arange(lo, min(lo + block, 1 << n), dtype=np.uint32)
        Y = ((ks[:, None] >> shifts[None, :]) & 1).astype(np.float64)
        e = base + Y @ du
        if len(all_pairs):
            diff = Y[:, all_pairs[:, 0]] != Y[:, all_pairs[:, 1]]
            e += diff @ all_w
        i = int(np.argmin(e))
        if e[i] < best_e:
            best_e = float(e[i])
            best_k = int(ks[i])
    labels = ((best_k >> shifts) & 1).astype(np.uint8)
    return best_e, labels
