"""Per-slot Max-Weight link scheduling on the conflict graph.

The scheduling problem is a maximum weighted independent set (NP-hard), so
the simulator uses a deterministic greedy pass: links in (utility desc,
index asc) order, activated when conflict-free. An exact brute-force
solver is provided as a testing oracle for small instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BRUTE_FORCE_LIMIT = 24


@dataclass
class Schedule:
    active: np.ndarray       # (E,) bool
    total_utility: float


def greedy_max_weight(utilities, conflict_adjacency) -> Schedule:
    """Greedy MWIS: highest utility first, link index breaks ties.

    Only strictly positive utilities are ever activated; a conflicting
    activation blocks all its conflict neighbors.
    """
    u = np.asarray(utilities, dtype=float)
    n = len(u)
    if n != len(conflict_adjacency):
        raise ValueError("utilities length must match conflict adjacency")
    active = np.zeros(n, dtype=bool)
    blocked = np.zeros(n, dtype=bool)
    order = np.lexsort((np.arange(n), -u))
    total = 0.0
    for e in order:
        if u[e] <= 0:
            break
        if blocked[e]:
            continue
        active[e] = True
        total += u[e]
        blocked[conflict_adjacency[e]] = True
        blocked[e] = True
    return Schedule(active=active, total_utility=total)


def brute_force_mwis(utilities, conflict_adjacency) -> Schedule:
    """Exhaustive MWIS oracle for instances with at most 24 links.

    Ties go to the lexicographically smallest active link set; zero-utility
    links are never activated.
    """
    u = np.asarray(utilities, dtype=float)
    n = len(u)
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} links")
    conflict_mask = [0] * n
    for e, neigh in enumerate(conflict_adjacency):
        for f in neigh:
            conflict_mask[e] |= 1 << int(f)
    candidates = [e for e in range(n) if u[e] > 0]
    best_total = 0.0
    best_set: tuple = ()
    for mask in range(1 << len(candidates)):
        links = [candidates[k] for k in range(len(candidates)) if mask >> k & 1]
        bits = 0
        ok = True
        for e in links:
            if conflict_mask[e] & bits:
                ok = False
                break
            bits |= 1 << e
        if not ok:
            continue
        total = float(u[links].sum()) if links else 0.0
        key = tuple(links)
        if total > best_total + 1e-12 or (
            abs(total - best_total) <= 1e-12 and key < best_set
        ):
            best_total = total
            best_set = key
    active = np.zeros(n, dtype=bool)
    for e in best_set:
        active[e] = True
    return Schedule(active=active, total_utility=best_total)
