"""Scenario orchestration: topology, flows, route establishment, physical
routing, and metrics for one (scheme, config, seed) run.

All randomness is drawn from named streams derived from the master seed,
so two schemes run with the same seed see identical networks, flows, and
exogenous physical arrivals (paired comparisons), and the whole run is a
pure function of its config.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict

import numpy as np

from . import aco, backpressure as bp, metrics, router, topology, traffic
from .rngstreams import derive_rng_streams, child_seed

SCHEMES = ("ant_bp", "ant_bp_mirror", "sp_bp", "ant_baseline", "ant_ideal")


@dataclass(frozen=True)
class ScenarioConfig:
    scheme: str = "sp_bp"
    node_count: int = 100
    density: float = 8 / np.pi
    streaming_load: float = 1.0
    bursty_load: float = 1.0
    bursty_probability: float = 0.5
    bursty_cutoff: int = 30
    virtual_steps: int = 1000         # K
    horizon: int = 1000               # T
    master_seed: int = 0
    # optional mismatch overrides for route establishment
    virtual_streaming_load: float = None
    virtual_bursty_load: float = None
    pheromone_floor: float = bp.PHEROMONE_FLOOR

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme: {self.scheme}")
        if self.virtual_steps < 1 or self.horizon < 1:
            raise ValueError("virtual_steps and horizon must be >= 1")

    @property
    def physical_traffic(self) -> traffic.TrafficConfig:
        return traffic.TrafficConfig(
            streaming_load=self.streaming_load,
            bursty_load=self.bursty_load,
            bursty_cutoff=self.bursty_cutoff,
            bursty_probability=self.bursty_probability,
        )

    @property
    def virtual_traffic(self) -> traffic.TrafficConfig:
        ls = self.virtual_streaming_load
        lb = self.virtual_bursty_load
        return traffic.TrafficConfig(
            streaming_load=self.streaming_load if ls is None else ls,
            bursty_load=self.bursty_load if lb is None else lb,
            bursty_cutoff=self.bursty_cutoff,
            bursty_probability=self.bursty_probability,
        )

    def hash(self) -> str:
        return hashlib.sha256(
            json.dumps(asdict(self), sort_keys=True, default=float).encode()
        ).hexdigest()[:16]


def build_instance(config: ScenarioConfig):
    """Deterministic network + flows + physical arrival/rate matrices.

    Scheme-independent: used for the paired-comparison guarantee.
    """
    streams = derive_rng_streams(config.master_seed)
    network = topology.generate_network(
        config.node_count, config.density,
        child_seed(config.master_seed, "topology"),
    )
    flows = traffic.generate_flows(network, config.physical_traffic, streams["flows"])
    arrivals = traffic.arrival_matrix(
        flows, config.horizon, config.physical_traffic,
        streams["physical-arrivals"],
    )
    rates = topology.sample_rate_matrix(
        network, config.horizon, streams["physical-rates"]
    )
    return network, flows, arrivals, rates, streams


def _establish_pheromones(config, network, flows, biases, streams):
    """Run the virtual phase for the configured scheme; returns
    (policy rho or PheromoneTable, maintenance factory, virtual report)."""
    vconf = config.virtual_traffic
    vrates = topology.sample_rate_matrix(
        network, config.virtual_steps, streams["virtual-rates"]
    )
    if config.scheme in ("ant_bp", "ant_bp_mirror"):
        mode = "all_streaming" if config.scheme == "ant_bp" else "mirror"
        vflows = traffic.derive_virtual_flows(flows, mode, vconf)
        varr = traffic.arrival_matrix(
            vflows, config.virtual_steps, vconf, streams["virtual-arrivals"]
        )
        counts, conserved = bp.run_virtual_spbp(
            network, vflows, config.virtual_steps, biases, vrates, varr
        )
        table = bp.pheromone_from_counts(counts, config.pheromone_floor)
        return table.rho, None, conserved
    # ACO variants: ant generation matches the backpressure virtual loads
    vflows = traffic.derive_virtual_flows(flows, "all_streaming", vconf)
    varr = traffic.arrival_matrix(
        vflows, config.virtual_steps, vconf, streams["virtual-arrivals"]
    )
    variant = "baseline" if config.scheme == "ant_baseline" else "ideal"
    state = aco.run_virtual_aco(
        network, vflows, config.virtual_steps, biases, variant,
        vrates, varr, streams["virtual-routing"],
    )
    return state, None, {}


def run_scenario(config: ScenarioConfig) -> metrics.MetricsReport:
    network, flows, arrivals, rates, streams = build_instance(config)
    biases = topology.compute_biases(network)
    stats = metrics.RunStats(config.horizon)
    virtual_report = {}

    if config.scheme == "sp_bp":
        engine = bp.SpbpPhysicalRouter(network, biases, stats)
        for t in range(config.horizon):
            arr = [
                (f.source, f.destination, 1 if f.kind == "bursty" else 0,
                 int(arrivals[k, t]))
                for k, f in enumerate(flows)
                if arrivals[k, t]
            ]
            engine.step(t, rates[t], arr)
        queued = engine.queued_total()
    else:
        established, _, virtual_report = _establish_pheromones(
            config, network, flows, biases, streams
        )
        maintenance = None
        if config.scheme == "ant_ideal":
            policy = router.LivePolicy(network, established.rho)
            maintenance = aco.ProactiveAntMaintenance(
                network, established, streams["ant-exploration"]
            )
        elif config.scheme == "ant_baseline":
            policy = router.FrozenPolicy(network, established.rho)
        else:
            policy = router.FrozenPolicy(network, established)
        engine = router.PerNeighborRouter(
            network, policy, stats, streams["routing-choices"]
        )
        for t in range(config.horizon):
            arr = [
                (f, int(arrivals[k, t]))
                for k, f in enumerate(flows)
                if arrivals[k, t]
            ]
            engine.step(t, rates[t], arr, maintenance)
        queued = engine.queued_total()

    report = metrics.finalize_report(
        config.scheme, config.physical_traffic, stats, queued,
        virtual_conservation=virtual_report, config_hash=config.hash(),
    )
    report.master_seed = config.master_seed
    if report.injected_total != report.delivered_total + queued:
        raise RuntimeError(
            "physical packet conservation violated: "
            f"{report.injected_total} != {report.delivered_total} + {queued}"
        )
    return report
