"""Flow sets and exogenous packet arrivals.

Streaming flows inject Poisson(L_s * lambda_f) packets every slot; bursty
flows inject Poisson(L_b * lambda_f) only before the cutoff slot (default
30) and nothing afterwards. Each flow's base rate lambda_f ~ U(0.2, 1.0)
is drawn once and shared between the physical and virtual phases.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

STREAMING = "streaming"
BURSTY = "bursty"


@dataclass(frozen=True)
class Flow:
    id: int
    source: int
    destination: int
    kind: str           # "streaming" | "bursty"
    base_rate: float    # lambda_f in [0.2, 1.0]


@dataclass(frozen=True)
class TrafficConfig:
    streaming_load: float = 1.0   # L_s
    bursty_load: float = 1.0      # L_b
    bursty_cutoff: int = 30
    bursty_probability: float = 0.5


def generate_flows(network, config: TrafficConfig, rng) -> list:
    """Random flows: count ~ U[floor(0.3N), ceil(0.5N)], uniform ordered
    source/destination pairs (source != destination), kind Bernoulli(P_b),
    base rate U(0.2, 1.0). Pairs are sampled with replacement across flows.
    """
    n = network.node_count
    lo = math.floor(0.30 * n)
    hi = math.ceil(0.50 * n)
    count = int(rng.integers(lo, hi + 1))
    count = max(count, 1)
    flows = []
    for fid in range(count):
        src = int(rng.integers(n))
        dst = int(rng.integers(n - 1))
        if dst >= src:
            dst += 1
        kind = BURSTY if rng.random() < config.bursty_probability else STREAMING
        lam = float(rng.uniform(0.2, 1.0))
        flows.append(Flow(fid, src, dst, kind, lam))
    return flows


def flow_rate(flow: Flow, config: TrafficConfig) -> float:
    load = config.streaming_load if flow.kind == STREAMING else config.bursty_load
    return load * flow.base_rate


def sample_arrivals(flow: Flow, slot: int, config: TrafficConfig, rng) -> int:
    """Packets arriving at the flow source in one slot."""
    if slot < 0:
        raise ValueError("slot must be >= 0")
    if flow.kind == BURSTY and slot >= config.bursty_cutoff:
        return 0
    return int(rng.poisson(flow_rate(flow, config)))


def arrival_matrix(flows, steps: int, config: TrafficConfig, rng) -> np.ndarray:
    """(F, steps) arrival counts, Poisson per flow per slot."""
    rates = np.zeros((len(flows), steps))
    for k, f in enumerate(flows):
        r = flow_rate(f, config)
        if f.kind == BURSTY:
            rates[k, : min(config.bursty_cutoff, steps)] = r
        else:
            rates[k, :] = r
    return rng.poisson(rates)


def derive_virtual_flows(flows, mode: str, config: TrafficConfig) -> list:
    """Virtual flows for route establishment.

    all_streaming: same endpoints, every flow becomes streaming (rate
    L_s * lambda_f regardless of its physical kind). mirror: kind and rate
    copied exactly. Virtual arrivals are always fresh Poisson draws, never
    a replay of physical arrivals.
    """
    if not flows:
        raise ValueError("empty flow set")
    if mode == "all_streaming":
        return [replace(f, kind=STREAMING) for f in flows]
    if mode == "mirror":
        return list(flows)
    raise ValueError(f"unknown virtual flow mode: {mode}")


def flows_to_json(flows) -> str:
    return json.dumps(
        [
            {
                "id": f.id,
                "source": f.source,
                "destination": f.destination,
                "kind": f.kind,
                "base_rate": f.base_rate,
            }
            for f in flows
        ]
    )


def flows_from_json(text: str) -> list:
    return [Flow(**d) for d in json.loads(text)]
