"""Seeded random instances shared by the allocation tests."""

import numpy as np

from qnetalloc.harness import mix_seed
from qnetalloc.topology import build_grid, generate_random
from qnetalloc.traffic import generate_workload


def random_instance(seed, max_nodes=30, max_apps=20):
    rng = np.random.default_rng(seed)
    if rng.random() < 0.3:
        rows, cols = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        net = build_grid(rows, cols, float(rng.uniform(1, 20)), float(rng.uniform(0.85, 1.0)),
                         interior_repeaters=bool(rng.random() < 0.5))
    else:
        n = int(rng.integers(4, max_nodes + 1))
        net = generate_random(mix_seed(seed, 1), n, float(rng.uniform(0.1, 0.6)),
                              [1.0, 20.0], [0.85, 1.0])
        # sparse draws can collapse to a single node; densify until usable
        tries = 2
        while len(net.nodes) < 3:
            net = generate_random(mix_seed(seed, tries), n, 0.6, [1.0, 20.0], [0.85, 1.0])
            tries += 1
    n_ep = len(net.endpoints())
    hi = int(min(5, n_ep))
    apps = generate_workload(
        mix_seed(seed, 2), net, int(rng.integers(1, max_apps + 1)),
        class_mix=float(rng.uniform(0, 1)) if hi >= 2 else 0.0,
        dqc_size_range=[2, max(2, hi)],
        fidelity_floor_range=[0.5, float(rng.uniform(0.5, 0.95))],
        dqc_pattern="mixed",
    )
    apps = [a.__class__(**{**a.__dict__, "weight": float(rng.uniform(0.5, 3.0)),
                           "rate_demand": float(rng.uniform(0.5, 10)) if rng.random() < 0.3 else None})
            for a in apps]
    return net, apps


def toy_instance(seed):
    """Instance within the oracle guard: <= 8 demands, <= 12 links, k = 4."""
    for attempt in range(1000):
        s = mix_seed(seed, 100 + attempt)
        rng = np.random.default_rng(s)
        n = int(rng.integers(3, 7))
        net = generate_random(mix_seed(s, 1), n, float(rng.uniform(0.4, 0.9)),
                              [1.0, 10.0], [0.9, 1.0])
        if len(net.links) > 12 or len(net.nodes) < 3:
            continue
        apps = generate_workload(mix_seed(s, 2), net, int(rng.integers(1, 5)),
                                 class_mix=0.3, dqc_size_range=[2, 3],
                                 fidelity_floor_range=[0.6, 0.85], dqc_pattern="mixed")
        n_demands = sum(len(a.hosts) * (len(a.hosts) - 1) // 2 if a.hosts else 1 for a in apps)
        if n_demands <= 8:
            return net, apps
    raise RuntimeError("no toy instance found")
