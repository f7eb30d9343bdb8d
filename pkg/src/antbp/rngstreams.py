"""Named, independently seeded RNG streams for reproducible experiments.

Every stochastic phase of a scenario (topology, flows, arrivals, rates,
routing choices, ant exploration) draws from its own stream, derived by
hashing (master_seed, label). Changing how many draws one phase consumes
never perturbs another phase, which is what makes paired scheme
comparisons possible.
"""

from __future__ import annotations

import hashlib

import numpy as np

STREAM_LABELS = (
    "topology",
    "flows",
    "virtual-arrivals",
    "virtual-rates",
    "virtual-routing",
    "physical-arrivals",
    "physical-rates",
    "routing-choices",
    "ant-exploration",
)


def child_seed(master_seed: int, label: str) -> int:
    """Derive a stable 64-bit seed from (master_seed, label) via SHA-256."""
    digest = hashlib.sha256(f"{master_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng_streams(master_seed: int, labels=STREAM_LABELS) -> dict:
    """Return one independent numpy Generator per label.

    Raises ValueError on duplicate labels (a configuration error: two
    phases silently sharing a stream would break pairing guarantees).
    """
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate RNG stream labels")
    return {
        label: np.random.default_rng(child_seed(master_seed, label))
        for label in labels
    }
