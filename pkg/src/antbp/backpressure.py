"""Shortest-path-biased backpressure (SP-BP) over per-commodity queues.

Used in two roles with the same per-step logic:
  * virtual mode — integer counters stand in for packets; directed
    per-commodity transit counts accumulate and are turned into the
    pheromone table that drives probabilistic physical routing;
  * physical mode — real packet objects move through per-commodity FIFO
    queues, serving as the SP-BP benchmark.

Per step: pick the optimal commodity per directed link (max differential
of queue length + shortest-path bias), clamp backpressure at zero,
schedule non-conflicting links greedily on rate-weighted backpressure,
then move min(queue, rate) packets of the winning commodity per scheduled
link. A scheduled link whose optimal commodity has an empty queue moves
nothing; that wasted capacity is what starves thin bursty flows under
heavy streaming interference.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .scheduling import greedy_max_weight

PHEROMONE_FLOOR = 1e-6


@dataclass
class VirtualQueueState:
    qtilde: np.ndarray   # (N, N) int, [node, commodity]
    step: int = 0


@dataclass
class CountTable:
    n: np.ndarray        # (2E, N) float, [directed link, commodity]
    evaporation: float = 0.0


@dataclass
class PheromoneTable:
    rho: np.ndarray      # (2E, N) float, strictly positive
    floor_constant: float = PHEROMONE_FLOOR


def count_table_to_text(counts: CountTable) -> str:
    return json.dumps(
        {"evaporation": counts.evaporation, "n": counts.n.tolist()}
    )


def count_table_from_text(text: str) -> CountTable:
    d = json.loads(text)
    return CountTable(n=np.asarray(d["n"], dtype=float),
                      evaporation=float(d["evaporation"]))


def pheromone_table_to_text(table: PheromoneTable) -> str:
    return json.dumps(
        {"floor_constant": table.floor_constant, "rho": table.rho.tolist()}
    )


def pheromone_table_from_text(text: str) -> PheromoneTable:
    d = json.loads(text)
    return PheromoneTable(rho=np.asarray(d["rho"], dtype=float),
                          floor_constant=float(d["floor_constant"]))


def select_commodity(i: int, j: int, state: VirtualQueueState, biases):
    """Optimal commodity on directed link i->j and its clamped backpressure.

    Ties break toward the smallest commodity id.
    """
    eta_i = state.qtilde[i] + biases.B[i]
    eta_j = state.qtilde[j] + biases.B[j]
    diff = eta_i - eta_j
    c = int(np.argmax(diff))
    return c, float(max(diff[c], 0.0))


def _link_decisions(qtilde, B, links):
    """Vectorized per-link direction/commodity/weight decisions.

    Returns (sender, receiver, commodity, weight, forward-flag) per
    undirected link. Direction ties go to the smaller node id (the stored
    u < v orientation). Bias differentials keep contributing to the weight
    even when the winning commodity's queue at the sender is empty, so a
    link with residual tail traffic nearby retains scheduling pressure; an
    empty sender that does win a slot simply moves nothing.
    """
    eta = qtilde + B
    diff = eta[links[:, 0]] - eta[links[:, 1]]          # (E, N)
    c_fwd = np.argmax(diff, axis=1)
    rows = np.arange(len(links))
    w_fwd = np.maximum(diff[rows, c_fwd], 0.0)
    c_rev = np.argmin(diff, axis=1)
    w_rev = np.maximum(-diff[rows, c_rev], 0.0)
    fwd = w_fwd >= w_rev
    sender = np.where(fwd, links[:, 0], links[:, 1])
    receiver = np.where(fwd, links[:, 1], links[:, 0])
    commodity = np.where(fwd, c_fwd, c_rev)
    weight = np.where(fwd, w_fwd, w_rev)
    return sender, receiver, commodity, weight, fwd


def spbp_step(state, rates, biases, conflict_adjacency, counts, arrivals, links):
    """One virtual SP-BP step; mutates state and counts in place.

    arrivals: iterable of (source, commodity, count) injected after the
    transmissions of this step. Returns packets delivered this step.
    """
    sender, receiver, commodity, weight, fwd = _link_decisions(
        state.qtilde, biases.B, links
    )
    sched = greedy_max_weight(rates * weight, conflict_adjacency)
    delivered = 0
    if counts.evaporation:
        counts.n *= 1.0 - counts.evaporation
    for e in np.nonzero(sched.active)[0]:
        s, r, c = int(sender[e]), int(receiver[e]), int(commodity[e])
        moved = int(min(state.qtilde[s, c], rates[e]))
        if moved <= 0:
            continue
        state.qtilde[s, c] -= moved
        if r == c:
            delivered += moved
        else:
            state.qtilde[r, c] += moved
        did = 2 * e + (0 if fwd[e] else 1)
        counts.n[did, c] += moved
    for src, c, cnt in arrivals:
        if cnt and src != c:
            state.qtilde[src, c] += cnt
    if np.any(state.qtilde < 0):
        raise RuntimeError("negative virtual queue (invariant violation)")
    state.step += 1
    return delivered


def run_virtual_spbp(network, virtual_flows, steps, biases, rate_matrix,
                     arrivals_matrix, evaporation: float = 0.0):
    """Run K virtual SP-BP steps and return the final CountTable.

    rate_matrix: (K, E) realized rates; arrivals_matrix: (F, K) Poisson
    virtual arrivals. Also verifies integer packet conservation.
    """
    n = network.node_count
    state = VirtualQueueState(qtilde=np.zeros((n, n), dtype=np.int64))
    counts = CountTable(
        n=np.zeros((2 * network.link_count, n)), evaporation=evaporation
    )
    injected = 0
    delivered = 0
    for tau in range(steps):
        arr = [
            (f.source, f.destination, int(arrivals_matrix[k, tau]))
            for k, f in enumerate(virtual_flows)
            if arrivals_matrix[k, tau]
        ]
        injected += sum(a[2] for a in arr)
        delivered += spbp_step(
            state, rate_matrix[tau], biases, network.conflict_adjacency,
            counts, arr, network.links,
        )
    queued = int(state.qtilde.sum())
    if injected != delivered + queued:
        raise RuntimeError("virtual packet conservation violated")
    return counts, {"injected": injected, "delivered": delivered, "queued": queued}


def pheromone_from_counts(counts: CountTable,
                          floor: float = PHEROMONE_FLOOR) -> PheromoneTable:
    """rho_ij^c = max(n_ij^c - n_ji^c, 0) + floor, per directed link."""
    if floor <= 0:
        raise ValueError("pheromone floor must be positive")
    n = counts.n
    rho = np.empty_like(n)
    rho[0::2] = np.maximum(n[0::2] - n[1::2], 0.0)
    rho[1::2] = np.maximum(n[1::2] - n[0::2], 0.0)
    return PheromoneTable(rho=rho + floor, floor_constant=floor)


class SpbpPhysicalRouter:
    """SP-BP benchmark running on real packets in per-commodity queues.

    Packets are tuples (commodity, created_at, kind_flag, seq). Exogenous
    arrivals enter the source's per-commodity queue at slot end; a
    scheduled link moves min(queue, rate) packets of its optimal commodity
    FIFO, delivering on arrival at the commodity node.
    """

    def __init__(self, network, biases, stats):
        self.network = network
        self.biases = biases
        self.stats = stats
        n = network.node_count
        self.qlen = np.zeros((n, n), dtype=np.int64)
        self.queues = {}     # (node, commodity) -> deque
        self._seq = 0

    def _queue(self, node, commodity):
        key = (node, commodity)
        q = self.queues.get(key)
        if q is None:
            q = deque()
            self.queues[key] = q
        return q

    def step(self, t, rates, arrivals):
        net = self.network
        sender, receiver, commodity, weight, _fwd = _link_decisions(
            self.qlen, self.biases.B, net.links
        )
        sched = greedy_max_weight(rates * weight, net.conflict_adjacency)
        for e in np.nonzero(sched.active)[0]:
            s, r, c = int(sender[e]), int(receiver[e]), int(commodity[e])
            moved = int(min(self.qlen[s, c], rates[e]))
            if moved <= 0:
                continue
            src_q = self.queues[(s, c)]
            self.qlen[s, c] -= moved
            if r == c:
                for _ in range(moved):
                    pkt = src_q.popleft()
                    self.stats.record_delivery(pkt, t)
            else:
                dst_q = self._queue(r, c)
                self.qlen[r, c] += moved
                for _ in range(moved):
                    dst_q.append(src_q.popleft())
        for src, c, kind_flag, cnt in arrivals:
            q = self._queue(src, c)
            for _ in range(cnt):
                q.append((c, t, kind_flag, self._seq))
                self._seq += 1
            self.qlen[src, c] += cnt
            self.stats.record_injection(kind_flag, cnt)

    def queued_total(self) -> int:
        return int(self.qlen.sum())
