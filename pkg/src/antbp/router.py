"""Physical per-neighbor routing for pheromone-based schemes.

Each slot: packets buffered at a node are probabilistically assigned to a
per-neighbor FIFO queue according to the pheromone policy, link utilities
max(q_ij, q_ji) * R pick a direction, a greedy Max-Weight schedule
activates non-conflicting links, and each active link moves min(q, R)
packets FIFO regardless of commodity. Received packets join the receiver's
assignment buffer for the next slot; exogenous arrivals are appended at
slot end.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .scheduling import greedy_max_weight


class FrozenPolicy:
    """Next-hop sampling from a fixed pheromone table (cdf precomputed)."""

    def __init__(self, network, rho: np.ndarray):
        self.network = network
        self._cdf = []
        for i in range(network.node_count):
            out = network.out_dir_ids[i]
            w = rho[out, :]                       # (deg, C)
            cdf = np.cumsum(w, axis=0)
            cdf /= cdf[-1, :]
            self._cdf.append(cdf)

    def sample_neighbors(self, node, commodities, rng):
        cdf = self._cdf[node][:, commodities]     # (deg, m)
        u = rng.random(len(commodities))
        idx = (u[None, :] > cdf).sum(axis=0)
        return np.minimum(idx, cdf.shape[0] - 1)


class LivePolicy:
    """Next-hop sampling recomputed each call from a mutable pheromone array."""

    def __init__(self, network, rho: np.ndarray):
        self.network = network
        self.rho = rho

    def sample_neighbors(self, node, commodities, rng):
        out = self.network.out_dir_ids[node]
        w = self.rho[out][:, commodities]         # (deg, m)
        cdf = np.cumsum(w, axis=0)
        cdf /= cdf[-1, :]
        u = rng.random(len(commodities))
        idx = (u[None, :] > cdf).sum(axis=0)
        return np.minimum(idx, len(out) - 1)


class PerNeighborRouter:
    """Executes the physical routing loop over per-neighbor FIFO queues.

    Packets are tuples (commodity, created_at, kind_flag, seq); buffers are
    unbounded, so packets are never dropped and undelivered ones simply
    remain queued at the horizon.
    """

    def __init__(self, network, policy, stats, rng):
        self.network = network
        self.policy = policy
        self.stats = stats
        self.rng = rng
        n = network.node_count
        self.assign_buf = [deque() for _ in range(n)]
        self.link_queues = [deque() for _ in range(2 * network.link_count)]
        self.qlen = np.zeros(2 * network.link_count, dtype=np.int64)
        self._seq = 0
        self.last_schedule = None

    def assign_routes(self, t):
        net = self.network
        for i in range(net.node_count):
            buf = self.assign_buf[i]
            if not buf:
                continue
            packets = list(buf)
            buf.clear()
            pending = []
            for pkt in packets:
                if pkt[0] == i:
                    self.stats.record_delivery(pkt, t)
                else:
                    pending.append(pkt)
            if not pending:
                continue
            commodities = np.fromiter(
                (p[0] for p in pending), dtype=np.int64, count=len(pending)
            )
            choice = self.policy.sample_neighbors(i, commodities, self.rng)
            out = net.out_dir_ids[i]
            for pkt, k in zip(pending, choice):
                self.link_queues[out[k]].append(pkt)
            np.add.at(self.qlen, out[choice], 1)

    def transmit(self, t, rates):
        net = self.network
        q_fwd = self.qlen[0::2]
        q_rev = self.qlen[1::2]
        utilities = np.maximum(q_fwd, q_rev) * rates
        sched = greedy_max_weight(utilities, net.conflict_adjacency)
        self.last_schedule = sched
        staged = []
        for e in np.nonzero(sched.active)[0]:
            d = 2 * e if q_fwd[e] >= q_rev[e] else 2 * e + 1
            recv = int(net.dir_receiver[d])
            q = self.link_queues[d]
            moved = int(min(self.qlen[d], rates[e]))
            self.qlen[d] -= moved
            for _ in range(moved):
                pkt = q.popleft()
                if pkt[0] == recv:
                    self.stats.record_delivery(pkt, t)
                else:
                    staged.append((recv, pkt))
        for recv, pkt in staged:
            self.assign_buf[recv].append(pkt)
        return sched

    def inject(self, t, flow_arrivals):
        """flow_arrivals: list of (flow, count) exogenous arrivals at slot t."""
        for flow, cnt in flow_arrivals:
            kind_flag = 1 if flow.kind == "bursty" else 0
            buf = self.assign_buf[flow.source]
            for _ in range(cnt):
                buf.append((flow.destination, t, kind_flag, self._seq))
                self._seq += 1
            self.stats.record_injection(kind_flag, cnt)

    def step(self, t, rates, flow_arrivals, maintenance=None):
        self.assign_routes(t)
        sched = self.transmit(t, rates)
        if maintenance is not None:
            maintenance.after_transmit(t, sched.active)
        self.inject(t, flow_arrivals)
        if maintenance is not None:
            maintenance.after_arrivals(t, flow_arrivals)
            maintenance.end_of_slot()

    def queued_total(self) -> int:
        return int(self.qlen.sum()) + sum(len(b) for b in self.assign_buf)
