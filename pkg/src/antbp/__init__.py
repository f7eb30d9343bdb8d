"""Discrete-event simulator of wireless multi-hop networks comparing
pheromone-based backpressure routing against shortest-path-biased
backpressure and ant-colony benchmarks."""

from .engine import SCHEMES, ScenarioConfig, run_scenario

__all__ = ["SCHEMES", "ScenarioConfig", "run_scenario"]
