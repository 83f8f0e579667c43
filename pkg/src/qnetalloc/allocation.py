"""Entanglement-rate allocation over feasible paths.

Every pair demand is pinned to its first feasible candidate path. The
pair demands of a DQC application share one rate variable, which draws
capacity on every link of every member path; a link crossed by several
members of the same application is charged once per member.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .fidelity import PERFECT_OPS, Ops
from .routing import DEFAULT_K, Path, feasible_paths
from .topology import Network, ValidationError
from .traffic import App, PairDemand, check_app, expand_app

SATURATION_TOL = 1e-9
CAPACITY_TOL = 1e-9
COUPLING_TOL = 1e-9


class AllocationError(ValueError):
    pass


class Policy(str, enum.Enum):
    GREEDY_SHORTEST = "greedy_shortest"
    MAX_MIN = "max_min"
    WEIGHTED_MAX_MIN = "weighted_max_min"


_POLICY_ALIASES = {
    "greedyshortest": Policy.GREEDY_SHORTEST,
    "maxmin": Policy.MAX_MIN,
    "weightedmaxmin": Policy.WEIGHTED_MAX_MIN,
}


@dataclass(frozen=True)
class PolicyConfig:
    policy: Policy = Policy.MAX_MIN

    @classmethod
    def parse(cls, name) -> "PolicyConfig":
        """Accepts ``max_min``, ``MaxMin``, ``maxmin`` and so on."""
        if isinstance(name, PolicyConfig):
            return name
        if isinstance(name, Policy):
            return cls(name)
        key = str(name).replace("_", "").replace("-", "").lower()
        if key not in _POLICY_ALIASES:
            valid = ", ".join(p.value for p in Policy)
            raise AllocationError(f"unknown policy {name!r}; valid policies: {valid}")
        return cls(_POLICY_ALIASES[key])


class RejectReason(str, enum.Enum):
    NO_FEASIBLE_PATH = "no_feasible_path"
    STARVED = "starved"


@dataclass(frozen=True)
class Assignment:
    demand: PairDemand
    path: Path
    rate: float
    fidelity: float


@dataclass(frozen=True)
class Rejection:
    demand: PairDemand
    reason: RejectReason


@dataclass
class Allocation:
    assignments: list[Assignment] = field(default_factory=list)
    residual: dict[tuple[int, int], float] = field(default_factory=dict)
    rejected: list[Rejection] = field(default_factory=list)
    ops: Ops = PERFECT_OPS

    def app_rates(self, apps: list[App]) -> dict[int, float]:
        """Per-app utility: the common rate of a DQC app, the flow rate of a p2p
        app, 0 for apps with any rejected demand."""
        rates: dict[int, float] = {}
        for a in self.assignments:
            rates[a.demand.app_id] = min(rates.get(a.demand.app_id, math.inf), a.rate)
        for r in self.rejected:
            rates[r.demand.app_id] = 0.0
        return {app.id: rates.get(app.id, 0.0) for app in apps}

    def to_dict(self) -> dict:
        return {
            "assignments": [
                {"app_id": a.demand.app_id, "demand": a.demand.key, "pair": list(a.demand.pair),
                 "path": list(a.path.nodes), "rate": a.rate, "fidelity": a.fidelity}
                for a in self.assignments
            ],
            "residual": {f"{u}-{v}": r for (u, v), r in self.residual.items()},
            "rejected": [
                {"app_id": r.demand.app_id, "demand": r.demand.key, "pair": list(r.demand.pair),
                 "reason": r.reason.value}
                for r in self.rejected
            ],
            "ops": {"p1": self.ops.p1, "p2": self.ops.p2, "eta": self.ops.eta},
        }


def allocation_from_dict(doc: dict, net: Network, apps: list[App]) -> Allocation:
    """Rebuild an Allocation from its JSON form, resolving demands against ``apps``."""
    demands = {d.key: d for app in apps for d in expand_app(app)}
    if not isinstance(doc, dict):
        raise ValidationError("allocation must be an object", "$")
    try:
        ops = Ops(**doc.get("ops", {}))
        assignments = []
        for i, entry in enumerate(doc["assignments"]):
            if entry["demand"] not in demands:
                raise ValidationError(f"unknown demand {entry['demand']!r}", f"assignments[{i}]")
            path = Path(tuple(entry["path"]))
            assignments.append(Assignment(demands[entry["demand"]], path, float(entry["rate"]),
                                          float(entry["fidelity"])))
        rejected = []
        for i, entry in enumerate(doc["rejected"]):
            if entry["demand"] not in demands:
                raise ValidationError(f"unknown demand {entry['demand']!r}", f"rejected[{i}]")
            rejected.append(Rejection(demands[entry["demand"]], RejectReason(entry["reason"])))
        residual = {}
        for key, val in doc["residual"].items():
            u, v = (int(x) for x in key.split("-"))
            residual[(u, v)] = float(val)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed allocation: {exc!r}", "$") from None
    return Allocation(assignments, residual, rejected, ops)


@dataclass
class _Group:
    """One rate variable: a p2p demand, or all demands of a DQC app."""

    app_id: int
    demands: list[PairDemand]
    paths: list[tuple[Path, float]]
    weight: float
    cap: Optional[float]

    @property
    def usage(self) -> Counter:
        return Counter(link for path, _ in self.paths for link in path.links)


def candidate_paths(net: Network, apps: list[App], ops: Ops, k: int):
    """Expand apps and route every demand.

    Returns ``[(app, demands, candidates_per_demand)]`` for apps whose every
    demand has at least one feasible path, and the rejections for the rest.
    A DQC app with one unroutable pair is rejected as a whole.
    """
    routed, rejected = [], []
    for app in apps:
        check_app(app, net)
        demands = expand_app(app)
        cands = [feasible_paths(net, d, k, ops) for d in demands]
        if all(cands):
            routed.append((app, demands, cands))
        else:
            rejected.extend(Rejection(d, RejectReason.NO_FEASIBLE_PATH) for d in demands)
    return routed, rejected


def _residual(net: Network, groups: list[_Group], rates: list[float]) -> dict:
    residual = {key: link.capacity for key, link in net.links.items()}
    for g, r in zip(groups, rates):
        for link, count in g.usage.items():
            residual[link] -= count * r
    return residual


def progressive_fill(capacity: dict, usage: list[Counter], speed: list[float],
                     cap: list[Optional[float]]) -> list[float]:
    """Max-min fair rates by progressive filling.

    Every unfrozen variable ``i`` grows at ``speed[i]``; a link saturates when
    its residual falls below ``SATURATION_TOL`` times its capacity, freezing
    every variable that crosses it. Variables also freeze at their ``cap``.
    """
    n = len(usage)
    rates = [0.0] * n
    resid = dict(capacity)
    active = set(range(n))
    while active:
        load: Counter = Counter()
        for i in active:
            for link, count in usage[i].items():
                load[link] += count * speed[i]
        step, limiting = math.inf, None
        for link in sorted(load):
            t = max(resid[link], 0.0) / load[link]
            if t < step:
                step, limiting = t, link
        capped = set()
        for i in sorted(active):
            if cap[i] is not None:
                t = (cap[i] - rates[i]) / speed[i]
                if t < step:
                    step, limiting = t, None
        for i in active:
            rates[i] += speed[i] * step
        for link, ld in load.items():
            resid[link] -= ld * step
        saturated = {link for link in load if resid[link] < SATURATION_TOL * capacity[link]}
        if limiting is not None:
            saturated.add(limiting)
        for i in active:
            if cap[i] is not None and rates[i] >= cap[i] * (1.0 - 1e-12):
                rates[i] = cap[i]
                capped.add(i)
        frozen = {i for i in active if i in capped or any(l in saturated for l in usage[i])}
        active -= frozen
    return rates


def _build(net: Network, groups: list[_Group], rates: list[float], rejected: list[Rejection],
           ops: Ops) -> Allocation:
    rejected = list(rejected)
    assignments = []
    for g, r in zip(groups, rates):
        if r <= 0.0:
            rejected.extend(Rejection(d, RejectReason.STARVED) for d in g.demands)
            continue
        for d, (path, fid) in zip(g.demands, g.paths):
            assignments.append(Assignment(d, path, r, fid))
    live = [(g, r) for g, r in zip(groups, rates) if r > 0.0]
    residual = _residual(net, [g for g, _ in live], [r for _, r in live])
    return Allocation(assignments, residual, rejected, ops)


def allocate(net: Network, apps: list[App], policy="max_min", ops: Ops = PERFECT_OPS,
             k: int = DEFAULT_K) -> Allocation:
    policy = PolicyConfig.parse(policy).policy
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise AllocationError(f"k must be an integer >= 1, got {k!r}")
    ids = [a.id for a in apps]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate app ids", "apps")

    routed, rejected = candidate_paths(net, apps, ops, k)
    groups = [
        _Group(app.id, demands, [c[0] for c in cands], app.weight, app.rate_demand)
        for app, demands, cands in routed
    ]
    capacity = {key: link.capacity for key, link in net.links.items()}

    if policy is Policy.GREEDY_SHORTEST:
        rates = [0.0] * len(groups)
        resid = dict(capacity)
        order = sorted(range(len(groups)), key=lambda i: (-groups[i].weight, groups[i].app_id))
        for i in order:
            usage = groups[i].usage
            rate = min(
                (resid[l] / c if resid[l] >= SATURATION_TOL * capacity[l] else 0.0)
                for l, c in usage.items()
            )
            if groups[i].cap is not None:
                rate = min(rate, groups[i].cap)
            rates[i] = rate
            for l, c in usage.items():
                resid[l] -= c * rate
    else:
        weighted = policy is Policy.WEIGHTED_MAX_MIN
        rates = progressive_fill(
            capacity,
            [g.usage for g in groups],
            [g.weight if weighted else 1.0 for g in groups],
            [g.cap for g in groups],
        )
    return _build(net, groups, rates, rejected, ops)


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str

    def __str__(self):
        return f"{self.kind} [{self.subject}]: {self.detail}"


def verify_allocation(net: Network, apps: list[App], alloc: Allocation) -> list[Violation]:
    """Check every allocation invariant; an empty list means the allocation is sound."""
    out: list[Violation] = []
    demands = {}
    for app in apps:
        try:
            for d in expand_app(app):
                demands[d.key] = d
        except ValidationError as exc:
            out.append(Violation("invalid_app", f"app {app.id}", str(exc)))

    load: Counter = Counter()
    seen: Counter = Counter()
    group_rates: dict[int, list[float]] = {}
    for a in alloc.assignments:
        d = a.demand
        subject = f"demand {d.key}"
        seen[d.key] += 1
        if d.key not in demands:
            out.append(Violation("unknown_demand", subject, "demand not produced by any app"))
        if not (a.rate >= 0.0) or not math.isfinite(a.rate):
            out.append(Violation("negative_rate", subject, f"rate {a.rate!r}"))
        if d.rate_demand is not None and a.rate > d.rate_demand * (1.0 + 1e-12):
            out.append(Violation("rate_cap_exceeded", subject,
                                 f"rate {a.rate!r} > rate_demand {d.rate_demand!r}"))
        ends = {a.path.nodes[0], a.path.nodes[-1]} if a.path.nodes else set()
        if not a.path.is_valid_in(net) or ends != {d.a, d.b}:
            out.append(Violation("invalid_path", subject, f"path {list(a.path.nodes)}"))
        else:
            fid = a.path.fidelity(net, alloc.ops)
            if fid < d.min_fidelity:
                out.append(Violation("fidelity_below_threshold", subject,
                                     f"path fidelity {fid!r} < {d.min_fidelity!r}"))
            for link in a.path.links:
                load[link] += a.rate
        if d.coupling_group is not None:
            group_rates.setdefault(d.coupling_group, []).append(a.rate)
    for r in alloc.rejected:
        seen[r.demand.key] += 1
        if r.demand.coupling_group is not None:
            group_rates.setdefault(r.demand.coupling_group, []).append(0.0)

    for key, count in sorted(seen.items()):
        if count > 1:
            out.append(Violation("duplicate_demand", f"demand {key}",
                                 f"appears {count} times"))

    for (u, v), link in net.links.items():
        used = load.get((u, v), 0.0)
        if used > link.capacity + CAPACITY_TOL:
            out.append(Violation("capacity_exceeded", f"link {u}-{v}",
                                 f"load {used!r} > capacity {link.capacity!r}"))
        if (u, v) in alloc.residual and \
                abs(alloc.residual[(u, v)] - (link.capacity - used)) > CAPACITY_TOL * max(1.0, link.capacity):
            out.append(Violation("residual_mismatch", f"link {u}-{v}",
                                 f"residual {alloc.residual[(u, v)]!r} != {link.capacity - used!r}"))

    for gid, rates in sorted(group_rates.items()):
        if max(rates) - min(rates) > COUPLING_TOL:
            out.append(Violation("coupling_violated", f"app {gid}",
                                 f"member rates range {min(rates)!r}..{max(rates)!r}"))
    return out
