"""Application traffic: point-to-point flows and multi-host DQC applications.

Each application expands into pair demands, the unit the allocator
assigns rates to. All pair demands of a DQC application form one coupling
group and must receive the same rate.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .topology import Network, NodeKind, ValidationError, check_fidelity


class AppClass(str, enum.Enum):
    P2P = "p2p"
    DQC = "dqc"


class Pattern(str, enum.Enum):
    ALL_PAIRS = "all_pairs"
    STAR = "star"


@dataclass(frozen=True)
class App:
    id: int
    app_class: AppClass
    min_fidelity: float
    src: Optional[int] = None
    dst: Optional[int] = None
    hosts: tuple[int, ...] = ()
    pattern: Pattern = Pattern.ALL_PAIRS
    coordinator: Optional[int] = None
    weight: float = 1.0
    rate_demand: Optional[float] = None

    @classmethod
    def p2p(cls, id: int, src: int, dst: int, min_fidelity: float = 0.5, **kw) -> "App":
        return cls(id, AppClass.P2P, min_fidelity, src=src, dst=dst, **kw)

    @classmethod
    def dqc(cls, id: int, hosts, pattern: Pattern = Pattern.ALL_PAIRS,
            coordinator: Optional[int] = None, min_fidelity: float = 0.5, **kw) -> "App":
        return cls(id, AppClass.DQC, min_fidelity, hosts=tuple(hosts), pattern=Pattern(pattern),
                   coordinator=coordinator, **kw)

    @property
    def members(self) -> tuple[int, ...]:
        if self.app_class is AppClass.P2P:
            return (self.src, self.dst)
        return self.hosts


@dataclass(frozen=True)
class PairDemand:
    app_id: int
    a: int
    b: int
    min_fidelity: float
    coupling_group: Optional[int] = None
    weight: float = 1.0
    rate_demand: Optional[float] = None

    @property
    def pair(self) -> tuple[int, int]:
        return (self.a, self.b)

    @property
    def key(self) -> str:
        return f"{self.app_id}:{self.a}-{self.b}"


def check_app(app: App, net: Optional[Network] = None) -> None:
    """Raise ValidationError if ``app`` is malformed or does not fit ``net``."""
    where = f"app[{app.id}]"
    check_fidelity(app.min_fidelity, f"{where}.min_fidelity")
    if not (app.weight > 0):
        raise ValidationError(f"weight must be > 0, got {app.weight!r}", f"{where}.weight")
    if app.rate_demand is not None and not (app.rate_demand > 0):
        raise ValidationError(f"rate_demand must be > 0, got {app.rate_demand!r}",
                              f"{where}.rate_demand")
    if app.app_class is AppClass.P2P:
        if app.src is None or app.dst is None:
            raise ValidationError("p2p app needs src and dst", where)
        if app.src == app.dst:
            raise ValidationError(f"src and dst are both {app.src}", where)
    else:
        if len(app.hosts) < 2 or len(set(app.hosts)) != len(app.hosts):
            raise ValidationError(f"dqc app needs >= 2 distinct hosts, got {list(app.hosts)}",
                                  f"{where}.hosts")
        if app.pattern is Pattern.STAR and app.coordinator not in app.hosts:
            raise ValidationError(f"coordinator {app.coordinator!r} not among hosts",
                                  f"{where}.coordinator")
    if net is not None:
        for nid in app.members:
            if not net.has_node(nid):
                raise ValidationError(f"node {nid} not in network", where)
            if net.node(nid).kind is not NodeKind.ENDPOINT:
                raise ValidationError(f"node {nid} is a repeater, not an endpoint", where)


def expand_app(app: App) -> list[PairDemand]:
    check_app(app)
    common = dict(min_fidelity=app.min_fidelity, weight=app.weight, rate_demand=app.rate_demand)
    if app.app_class is AppClass.P2P:
        return [PairDemand(app.id, app.src, app.dst, **common)]
    if app.pattern is Pattern.STAR:
        pairs = [(app.coordinator, h) for h in app.hosts if h != app.coordinator]
    else:
        pairs = list(combinations(app.hosts, 2))
    return [PairDemand(app.id, a, b, coupling_group=app.id, **common) for a, b in pairs]


def generate_workload(seed: int, net: Network, n_apps: int, class_mix: float = 0.0,
                      dqc_size_range=(3, 3), fidelity_floor_range=(0.5, 0.5),
                      dqc_pattern: str = "all_pairs") -> list[App]:
    """Draw ``n_apps`` applications over the endpoints of ``net``.

    Per app, in order: class (DQC with probability ``class_mix``), DQC size,
    the member endpoints (uniform, without replacement), min fidelity, and
    for ``dqc_pattern="mixed"`` the pattern. Star coordinators are the first
    drawn host.
    """
    if n_apps < 0:
        raise ValidationError(f"must be >= 0, got {n_apps}", "n_apps")
    if not (0.0 <= class_mix <= 1.0):
        raise ValidationError(f"{class_mix!r} outside [0, 1]", "class_mix")
    lo_size, hi_size = (int(x) for x in dqc_size_range)
    if lo_size < 2 or lo_size > hi_size:
        raise ValidationError(f"need 2 <= lo <= hi, got {list(dqc_size_range)}", "dqc_size_range")
    f_lo, f_hi = (check_fidelity(x, "fidelity_floor_range") for x in fidelity_floor_range)
    if f_lo > f_hi:
        raise ValidationError(f"lo {f_lo} > hi {f_hi}", "fidelity_floor_range")
    if dqc_pattern not in ("all_pairs", "star", "mixed"):
        raise ValidationError(f"unknown pattern {dqc_pattern!r}", "dqc_pattern")

    endpoints = np.array(sorted(net.endpoints()))
    need = max(2 if class_mix < 1.0 else 0, hi_size if class_mix > 0.0 else 0)
    if len(endpoints) < need:
        raise ValidationError(f"network has {len(endpoints)} endpoints, workload needs {need}",
                              "net")

    rng = np.random.default_rng(seed)
    apps = []
    for app_id in range(n_apps):
        is_dqc = bool(rng.random() < class_mix)
        size = int(rng.integers(lo_size, hi_size + 1)) if is_dqc else 2
        members = [int(x) for x in rng.choice(endpoints, size=size, replace=False)]
        min_fid = min(max(float(rng.uniform(f_lo, f_hi)), f_lo), f_hi)
        if not is_dqc:
            apps.append(App.p2p(app_id, members[0], members[1], min_fidelity=min_fid))
            continue
        if dqc_pattern == "mixed":
            pattern = Pattern.STAR if rng.random() < 0.5 else Pattern.ALL_PAIRS
        else:
            pattern = Pattern(dqc_pattern)
        coord = members[0] if pattern is Pattern.STAR else None
        apps.append(App.dqc(app_id, members, pattern, coord, min_fidelity=min_fid))
    return apps


def app_to_dict(app: App) -> dict:
    out = {"id": app.id, "class": app.app_class.value}
    if app.app_class is AppClass.P2P:
        out.update(src=app.src, dst=app.dst)
    else:
        out.update(hosts=list(app.hosts), pattern=app.pattern.value)
        if app.coordinator is not None:
            out["coordinator"] = app.coordinator
    out.update(min_fidelity=app.min_fidelity, weight=app.weight)
    if app.rate_demand is not None:
        out["rate_demand"] = app.rate_demand
    return out


_REQUIRED = object()


def _number(entry: dict, key: str, path: str, default=_REQUIRED):
    if key not in entry or entry[key] is None:
        if default is _REQUIRED:
            raise ValidationError("missing field", f"{path}.{key}")
        return default
    val = entry[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(f"must be a number, got {val!r}", f"{path}.{key}")
    return float(val)


def _node_id(entry: dict, key: str, path: str) -> int:
    val = entry.get(key)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ValidationError(f"must be an integer node id, got {val!r}", f"{path}.{key}")
    return val


def app_from_dict(entry, path: str = "app") -> App:
    if not isinstance(entry, dict):
        raise ValidationError("must be an object", path)
    app_id = _node_id(entry, "id", path)
    try:
        cls = AppClass(entry.get("class"))
    except ValueError:
        raise ValidationError(f"unknown class {entry.get('class')!r}, expected p2p|dqc",
                              f"{path}.class") from None
    common = dict(min_fidelity=_number(entry, "min_fidelity", path),
                  weight=_number(entry, "weight", path, 1.0),
                  rate_demand=_number(entry, "rate_demand", path, None))
    if cls is AppClass.P2P:
        app = App(app_id, cls, src=_node_id(entry, "src", path), dst=_node_id(entry, "dst", path),
                  **common)
    else:
        hosts = entry.get("hosts")
        if not isinstance(hosts, list) or any(isinstance(h, bool) or not isinstance(h, int)
                                              for h in hosts):
            raise ValidationError("must be a list of integer node ids", f"{path}.hosts")
        try:
            pattern = Pattern(entry.get("pattern", "all_pairs"))
        except ValueError:
            raise ValidationError(f"unknown pattern {entry.get('pattern')!r}",
                                  f"{path}.pattern") from None
        coord = entry.get("coordinator")
        app = App(app_id, cls, hosts=tuple(hosts), pattern=pattern, coordinator=coord, **common)
    check_app(app)
    return app


def save_apps(apps: list[App]) -> str:
    return json.dumps([app_to_dict(a) for a in apps], indent=2)


def load_apps(text: str, net: Optional[Network] = None) -> list[App]:
    """Parse an app list; accepts a bare list or ``{"apps": [...]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}", "$") from None
    if isinstance(doc, dict) and "apps" in doc:
        doc = doc["apps"]
    if not isinstance(doc, list):
        raise ValidationError("expected a list of apps", "$")
    apps = [app_from_dict(e, f"apps[{i}]") for i, e in enumerate(doc)]
    ids = [a.id for a in apps]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate app ids", "apps")
    if net is not None:
        for a in apps:
            check_app(a, net)
    return apps
