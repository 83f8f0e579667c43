"""Exact allocation optimum for toy instances, used as a test oracle.

Enumerates every combination of candidate paths and solves each with
linear programming (scipy's HiGHS backend). Max-min fairness is computed
by lexicographic LP water-filling, which shares no code with the
progressive filling in ``allocation``.
"""

from __future__ import annotations

import enum
import itertools
from collections import Counter

import numpy as np
from scipy.optimize import linprog

from .allocation import Allocation, Assignment, Rejection, RejectReason, candidate_paths
from .fidelity import PERFECT_OPS, Ops
from .routing import DEFAULT_K
from .topology import Network
from .traffic import App

MAX_DEMANDS = 8
MAX_LINKS = 12
MAX_CANDIDATES = 4
LP_TOL = 1e-9


class OracleRefusal(ValueError):
    pass


class Objective(str, enum.Enum):
    MAX_MIN_RATE = "max_min_rate"
    TOTAL_RATE = "total_rate"


def _lp(c, A_ub, b_ub, bounds, A_eq=None, b_eq=None) -> np.ndarray:
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    return res.x


def _constraints(links, usages):
    A = np.zeros((len(links), len(usages)))
    for j, usage in enumerate(usages):
        for link, count in usage.items():
            A[links.index(link), j] = count
    return A


def max_min_lp(capacity: dict, usages: list[Counter], caps: list) -> list[float]:
    """Max-min fair rates by repeated LP: raise the common floor of the
    unfrozen variables, then freeze those that cannot exceed it."""
    n = len(usages)
    if n == 0:
        return []
    links = sorted(capacity)
    A = _constraints(links, usages)
    b = np.array([capacity[l] for l in links])
    fixed: dict[int, float] = {}
    bounds = [(0.0, c) for c in caps]
    while len(fixed) < n:
        free = [i for i in range(n) if i not in fixed]
        # variables x_0..x_{n-1}, t
        A_t = np.hstack([A, np.zeros((len(links), 1))])
        rows, rhs = [A_t], [b]
        for i in free:
            row = np.zeros(n + 1)
            row[i], row[n] = -1.0, 1.0
            rows.append(row[None, :])
            rhs.append(np.zeros(1))
        A_ub, b_ub = np.vstack(rows), np.concatenate(rhs)
        bnds = [(fixed[i], fixed[i]) if i in fixed else bounds[i] for i in range(n)] + [(0.0, None)]
        c = np.zeros(n + 1)
        c[n] = -1.0
        floor = _lp(c, A_ub, b_ub, bnds)[n]

        newly = {}
        for i in free:
            # can x_i rise above the floor while every other free variable keeps it?
            others = [
                (fixed[j], fixed[j]) if j in fixed
                else (floor * (1 - 1e-12) if j != i else 0.0, bounds[j][1])
                for j in range(n)
            ]
            c_i = np.zeros(n)
            c_i[i] = -1.0
            best = _lp(c_i, A, b, others)[i]
            if best <= floor + LP_TOL * max(1.0, floor):
                newly[i] = floor
        if not newly:
            newly = {i: floor for i in free}
        fixed.update(newly)
    return [fixed[i] for i in range(n)]


def total_rate_lp(capacity: dict, usages: list[Counter], caps: list, sizes: list[int]) -> list[float]:
    if not usages:
        return []
    links = sorted(capacity)
    A = _constraints(links, usages)
    b = np.array([capacity[l] for l in links])
    x = _lp(-np.array(sizes, dtype=float), A, b, [(0.0, c) for c in caps])
    return [float(v) for v in x]


def brute_force_optimal(net: Network, apps: list[App], objective=Objective.MAX_MIN_RATE,
                        ops: Ops = PERFECT_OPS, k: int = DEFAULT_K,
                        fixed_paths: bool = False) -> Allocation:
    """Best allocation over all path choices.

    ``objective`` is either max-min fairness over per-demand rates (compared
    as ascending-sorted vectors) or the total delivered rate summed over
    demands. With ``fixed_paths`` each demand keeps its first feasible path,
    matching the production policies. Ties keep the earliest enumerated
    path combination.
    """
    objective = Objective(objective)
    routed, rejected = candidate_paths(net, apps, ops, k)
    n_demands = sum(len(demands) for _, demands, _ in routed) + len(rejected)
    if n_demands > MAX_DEMANDS:
        raise OracleRefusal(f"{n_demands} demands > {MAX_DEMANDS}")
    if len(net.links) > MAX_LINKS:
        raise OracleRefusal(f"{len(net.links)} links > {MAX_LINKS}")
    choices = []
    for app, demands, cands in routed:
        for cand in cands:
            if len(cand) > MAX_CANDIDATES:
                raise OracleRefusal(f"{len(cand)} candidate paths > {MAX_CANDIDATES}")
            choices.append(cand[:1] if fixed_paths else cand)

    capacity = {key: link.capacity for key, link in net.links.items()}
    owners = [i for i, (_, demands, _) in enumerate(routed) for _ in demands]
    caps = [app.rate_demand for app, _, _ in routed]
    sizes = [len(demands) for _, demands, _ in routed]

    best_key, best = None, None
    for combo in itertools.product(*choices):
        usages = [Counter() for _ in routed]
        for owner, (path, _) in zip(owners, combo):
            usages[owner].update(path.links)
        if objective is Objective.MAX_MIN_RATE:
            rates = max_min_lp(capacity, usages, caps)
            key = tuple(round(r, 9) for r in sorted(r for r, s in zip(rates, sizes) for _ in range(s)))
        else:
            rates = total_rate_lp(capacity, usages, caps, sizes)
            key = (round(sum(r * s for r, s in zip(rates, sizes)), 9),)
        if best_key is None or key > best_key:
            best_key, best = key, (combo, rates)

    alloc = Allocation(ops=ops, rejected=list(rejected))
    alloc.residual = dict(capacity)
    if best is None:
        return alloc
    combo, rates = best
    for owner, (path, fid), d in zip(owners, combo,
                                     [d for _, demands, _ in routed for d in demands]):
        rate = rates[owner]
        if rate <= 0.0:
            alloc.rejected.append(Rejection(d, RejectReason.STARVED))
            continue
        alloc.assignments.append(Assignment(d, path, rate, fid))
        for link in path.links:
            alloc.residual[link] -= rate
    return alloc
