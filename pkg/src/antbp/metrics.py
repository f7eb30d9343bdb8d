"""Per-run statistics and cross-run aggregation.

A packet is a tuple (commodity, created_at, kind_flag, seq); kind_flag is
0 for streaming, 1 for bursty. Latency counts whole slots from creation to
delivery, over delivered packets only. A class with zero injected packets
reports delivery ratio 1.0 with an explicit no-traffic flag so empty
classes never poison cross-instance averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CLASSES = ("streaming", "bursty")


@dataclass
class FlowClassStats:
    injected: int = 0
    delivered: int = 0
    latency_sum: int = 0

    @property
    def delivery_ratio(self) -> float:
        return self.delivered / self.injected if self.injected else 1.0

    @property
    def mean_latency(self) -> float:
        return self.latency_sum / self.delivered if self.delivered else 0.0


class RunStats:
    """Event sink used by the routers during the physical phase."""

    def __init__(self, horizon: int):
        self.horizon = horizon
        self.per_class = [FlowClassStats(), FlowClassStats()]
        self.delivered_per_slot = np.zeros(horizon, dtype=np.int64)
        self._delivered_seqs = set()

    def record_injection(self, kind_flag: int, count: int = 1):
        self.per_class[kind_flag].injected += count

    def record_delivery(self, packet, slot: int):
        commodity, created_at, kind_flag, seq = packet
        if seq in self._delivered_seqs:
            raise RuntimeError(f"double delivery of packet {seq}")
        self._delivered_seqs.add(seq)
        latency = slot - created_at
        if latency < 0:
            raise RuntimeError("delivery before creation")
        cls = self.per_class[kind_flag]
        cls.delivered += 1
        cls.latency_sum += latency
        if slot < self.horizon:
            self.delivered_per_slot[slot] += 1


@dataclass
class MetricsReport:
    scheme: str
    streaming_load: float
    bursty_load: float
    master_seed: int
    config_hash: str
    horizon: int
    classes: dict                      # class -> FlowClassStats
    throughput_series: np.ndarray
    no_traffic_flags: dict
    injected_total: int
    delivered_total: int
    queued_at_end: int
    virtual_conservation: dict = field(default_factory=dict)

    @property
    def throughput_mean(self) -> float:
        return float(self.throughput_series.sum()) / self.horizon

    def csv_rows(self):
        rows = []
        for cls in CLASSES:
            st = self.classes[cls]
            rows.append(
                {
                    "scheme": self.scheme,
                    "L_s": self.streaming_load,
                    "L_b": self.bursty_load,
                    "class": cls,
                    "injected": st.injected,
                    "delivered": st.delivered,
                    "delivery_ratio": st.delivery_ratio,
                    "mean_latency": st.mean_latency,
                    "throughput_mean": self.throughput_mean,
                    "master_seed": self.master_seed,
                }
            )
        return rows


def finalize_report(scheme, config, stats: RunStats, queued_at_end,
                    virtual_conservation=None, config_hash="") -> MetricsReport:
    classes = {
        "streaming": stats.per_class[0],
        "bursty": stats.per_class[1],
    }
    flags = {cls: classes[cls].injected == 0 for cls in CLASSES}
    injected = sum(c.injected for c in classes.values())
    delivered = sum(c.delivered for c in classes.values())
    return MetricsReport(
        scheme=scheme,
        streaming_load=config.streaming_load,
        bursty_load=config.bursty_load,
        master_seed=getattr(config, "master_seed", -1),
        config_hash=config_hash,
        horizon=stats.horizon,
        classes=classes,
        throughput_series=stats.delivered_per_slot,
        no_traffic_flags=flags,
        injected_total=injected,
        delivered_total=delivered,
        queued_at_end=queued_at_end,
        virtual_conservation=virtual_conservation or {},
    )


def aggregate(reports):
    """Mean and standard error per (scheme, L_s, L_b, class) across runs.

    Per-run means are averaged unweighted, matching figure-style averaging
    over instances.
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    groups = {}
    for rep in reports:
        for cls in CLASSES:
            key = (rep.scheme, rep.streaming_load, rep.bursty_load, cls)
            st = rep.classes[cls]
            groups.setdefault(key, []).append(
                (st.delivery_ratio, st.mean_latency, rep.throughput_mean)
            )
    rows = []
    for (scheme, ls, lb, cls), vals in sorted(groups.items()):
        arr = np.array(vals)
        mean = arr.mean(axis=0)
        if len(vals) > 1:
            sem = arr.std(axis=0, ddof=1) / math.sqrt(len(vals))
        else:
            sem = np.zeros(3)
        rows.append(
            {
                "scheme": scheme,
                "L_s": ls,
                "L_b": lb,
                "class": cls,
                "runs": len(vals),
                "delivery_ratio_mean": float(mean[0]),
                "delivery_ratio_sem": float(sem[0]),
                "latency_mean": float(mean[1]),
                "latency_sem": float(sem[1]),
                "throughput_mean": float(mean[2]),
                "throughput_sem": float(sem[2]),
            }
        )
    return rows
