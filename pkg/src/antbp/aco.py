"""Ant-colony routing benchmarks: virtual route establishment and the
proactive-ant maintenance used by the idealized variant.

Ants are real packets during the virtual phase: they wait in per-neighbor
FIFO queues and advance only when their link wins Max-Weight scheduling,
so recorded latencies include queueing delay. Next hops follow the
heuristic-augmented probability max(rho + h, 0) normalized over neighbors
(uniform when every numerator clamps to zero), where the heuristic
h_ij = B_i - B_j is the shortest-path bias differential. Pheromones decay
multiplicatively every step; the baseline variant deposits a constant per
link crossing, the ideal variant deposits 1/latency along the loop-excised
path the moment an ant reaches its destination.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .scheduling import greedy_max_weight

EVAPORATION = 0.002
DEPOSIT_CONSTANT = 0.01
INITIAL_PHEROMONE = 1.3
EXPLORE_PROBABILITY = 0.10
PACKETS_PER_PROACTIVE_ANT = 100


@dataclass
class AcoPheromoneState:
    rho: np.ndarray           # (2E, N) float, [directed link, commodity]
    heuristic: np.ndarray     # (2E, N) float, B[i] - B[j] per directed link
    evaporation: float = EVAPORATION
    deposit_constant: float = DEPOSIT_CONSTANT
    initial: float = INITIAL_PHEROMONE


def init_pheromone_state(network, biases) -> AcoPheromoneState:
    ndir = 2 * network.link_count
    n = network.node_count
    h = biases.B[network.dir_sender] - biases.B[network.dir_receiver]
    return AcoPheromoneState(
        rho=np.full((ndir, n), INITIAL_PHEROMONE), heuristic=h
    )


def aco_route_probability(node, commodity, state, network) -> np.ndarray:
    """Probability over node's neighbors: clamped (rho + h), normalized;
    uniform fallback when all numerators clamp to zero."""
    out = network.out_dir_ids[node]
    num = np.maximum(state.rho[out, commodity] + state.heuristic[out, commodity], 0.0)
    total = num.sum()
    if total <= 0:
        return np.full(len(out), 1.0 / len(out))
    return num / total


def _sample_hops(node, commodities, state, network, rng):
    """Vectorized next-hop draw for several ants at one node."""
    out = network.out_dir_ids[node]
    w = np.maximum(
        state.rho[out][:, commodities] + state.heuristic[out][:, commodities], 0.0
    )
    totals = w.sum(axis=0)
    dead = totals <= 0
    if np.any(dead):
        w[:, dead] = 1.0
        totals = w.sum(axis=0)
    cdf = np.cumsum(w, axis=0) / totals
    u = rng.random(len(commodities))
    idx = (u[None, :] > cdf).sum(axis=0)
    return np.minimum(idx, len(out) - 1)


def pheromone_update(state: AcoPheromoneState, deposit_links, deposit_commodities,
                     deposit_amounts):
    """rho <- (1 - evaporation) * rho + deposits, applied end of step."""
    state.rho *= 1.0 - state.evaporation
    if len(deposit_links):
        np.add.at(
            state.rho,
            (np.asarray(deposit_links), np.asarray(deposit_commodities)),
            np.asarray(deposit_amounts, dtype=float),
        )


def excise_loops(path_nodes):
    """Cut cycles from a walk so the deposited path is simple."""
    seen = {}
    out = []
    for node in path_nodes:
        if node in seen:
            del out[seen[node] + 1:]
            for k in list(seen):
                if seen[k] > seen[node]:
                    del seen[k]
        else:
            seen[node] = len(out)
            out.append(node)
    return out


def path_dir_ids(path_nodes, network):
    ids = []
    for u, v in zip(path_nodes, path_nodes[1:]):
        ids.append(network.dir_index[(u, v)])
    return ids


@dataclass
class Ant:
    commodity: int
    emitted_at: int
    node: int
    path: list = field(default_factory=list)
    hops: int = 0


def run_virtual_aco(network, virtual_flows, steps, biases, variant,
                    rate_matrix, arrivals_matrix, rng) -> AcoPheromoneState:
    """Virtual ACO phase: ants generated by the same Poisson processes as
    the backpressure virtual flows, full queueing/scheduling dynamics,
    K steps. Returns the established pheromone state."""
    if variant not in ("baseline", "ideal"):
        raise ValueError(f"unknown variant: {variant}")
    state = init_pheromone_state(network, biases)
    n = network.node_count
    ttl = 4 * n
    assign_buf = [deque() for _ in range(n)]
    link_queues = [deque() for _ in range(2 * network.link_count)]
    qlen = np.zeros(2 * network.link_count, dtype=np.int64)

    for tau in range(steps):
        # route assignment
        dep_l, dep_c, dep_a = [], [], []
        for i in range(n):
            buf = assign_buf[i]
            if not buf:
                continue
            ants = list(buf)
            buf.clear()
            commodities = np.fromiter(
                (a.commodity for a in ants), dtype=np.int64, count=len(ants)
            )
            choice = _sample_hops(i, commodities, state, network, rng)
            out = network.out_dir_ids[i]
            for ant, k in zip(ants, choice):
                link_queues[out[k]].append(ant)
            np.add.at(qlen, out[choice], 1)
        # scheduling on per-neighbor queue utilities
        utilities = np.maximum(qlen[0::2], qlen[1::2]) * rate_matrix[tau]
        sched = greedy_max_weight(utilities, network.conflict_adjacency)
        # transmission
        for e in np.nonzero(sched.active)[0]:
            d = 2 * e if qlen[2 * e] >= qlen[2 * e + 1] else 2 * e + 1
            recv = int(network.dir_receiver[d])
            q = link_queues[d]
            moved = int(min(qlen[d], rate_matrix[tau][e]))
            qlen[d] -= moved
            for _ in range(moved):
                ant = q.popleft()
                ant.hops += 1
                ant.path.append(recv)
                ant.node = recv
                if variant == "baseline":
                    dep_l.append(d)
                    dep_c.append(ant.commodity)
                    dep_a.append(DEPOSIT_CONSTANT)
                if recv == ant.commodity:
                    if variant == "ideal":
                        latency = max(tau - ant.emitted_at, 1)
                        for did in path_dir_ids(excise_loops(ant.path), network):
                            dep_l.append(did)
                            dep_c.append(ant.commodity)
                            dep_a.append(1.0 / latency)
                elif ant.hops < ttl:
                    assign_buf[recv].append(ant)
                # TTL exceeded: ant discarded with no further deposit
        # ant generation (Poisson, same processes as virtual flows)
        for k, f in enumerate(virtual_flows):
            cnt = int(arrivals_matrix[k, tau])
            for _ in range(cnt):
                assign_buf[f.source].append(
                    Ant(f.destination, tau, f.source, [f.source])
                )
        pheromone_update(state, dep_l, dep_c, dep_a)
    return state


class ProactiveAntMaintenance:
    """Keeps ideal-variant pheromones live during physical routing.

    One proactive ant per 100 cumulative exogenous packets per flow. Ants
    are control traffic: they hop once per slot when their chosen link is
    scheduled for any transmission, explore uniformly with probability
    0.10, and deposit 1/latency along the loop-excised path on arrival.
    """

    def __init__(self, network, state: AcoPheromoneState, rng):
        self.network = network
        self.state = state
        self.rng = rng
        self.ants = []
        self.emitted = {}
        self.cumulative = {}
        self.ttl = 4 * network.node_count
        self._dep = ([], [], [])

    def after_transmit(self, t, active):
        net = self.network
        survivors = []
        for ant in self.ants:
            i = ant.node
            out = net.out_dir_ids[i]
            if self.rng.random() < EXPLORE_PROBABILITY:
                k = int(self.rng.integers(len(out)))
            else:
                p = aco_route_probability(i, ant.commodity, self.state, net)
                k = int(np.searchsorted(np.cumsum(p), self.rng.random()))
                k = min(k, len(out) - 1)
            d = out[k]
            if not active[d // 2]:
                survivors.append(ant)
                continue
            recv = int(net.dir_receiver[d])
            ant.hops += 1
            ant.path.append(recv)
            ant.node = recv
            if recv == ant.commodity:
                latency = max(t - ant.emitted_at, 1)
                for did in path_dir_ids(excise_loops(ant.path), net):
                    self._dep[0].append(did)
                    self._dep[1].append(ant.commodity)
                    self._dep[2].append(1.0 / latency)
            elif ant.hops < self.ttl:
                survivors.append(ant)
        self.ants = survivors

    def after_arrivals(self, t, flow_arrivals):
        for flow, cnt in flow_arrivals:
            self.cumulative[flow.id] = self.cumulative.get(flow.id, 0) + cnt
            due = self.cumulative[flow.id] // PACKETS_PER_PROACTIVE_ANT
            while self.emitted.get(flow.id, 0) < due:
                self.emitted[flow.id] = self.emitted.get(flow.id, 0) + 1
                self.ants.append(
                    Ant(flow.destination, t, flow.source, [flow.source])
                )

    def end_of_slot(self):
        dep_l, dep_c, dep_a = self._dep
        pheromone_update(self.state, dep_l, dep_c, dep_a)
        self._dep = ([], [], [])
