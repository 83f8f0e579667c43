"""Seeded Monte Carlo campaign runner and per-run metrics.

Config document (JSON)::

    {
      "topology": {"generator": "grid", "rows": 4, "cols": 4,
                   "capacity": 10.0, "fidelity": 0.95}
                | {"generator": "random", "n": 20, "edge_prob": 0.2,
                   "capacity_range": [5, 15], "fidelity_range": [0.9, 0.99]}
                | {"generator": "file", "path": "net.json"},
      "workload": {"n_apps": 10, "class_mix": 0.3, "dqc_size_range": [3, 4],
                   "fidelity_floor_range": [0.6, 0.8], "dqc_pattern": "all_pairs"},
      "policy": "max_min",
      "ops": {"p1": 1.0, "p2": 1.0, "eta": 1.0},
      "k": 4,
      "replications": 10,
      "base_seed": 1,
      "sweep": {"name": "workload.n_apps", "values": [5, 10, 20]}
    }

``sweep.name`` is a dotted path into this document. Replication ``r`` uses
``replication_seed(base_seed, r)``, the same for every sweep value. The
topology and workload draw from ``mix_seed(seed, 1)`` and ``mix_seed(seed, 2)``.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .allocation import PolicyConfig, allocate
from .fidelity import Ops
from .topology import Network, build_grid, generate_random, load_network
from .traffic import AppClass, generate_workload

MASK64 = (1 << 64) - 1

CSV_COLUMNS = [
    "sweep_name", "sweep_value", "replication", "seed", "n_apps", "n_admitted",
    "admission_ratio", "total_rate", "min_rate", "jain_index", "mean_hop_count",
    "p2p_admission_ratio", "dqc_admission_ratio", "p2p_total_rate", "dqc_total_rate", "error",
]


class ConfigError(ValueError):
    pass


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix_seed(seed: int, stream: int) -> int:
    """64-bit seed for sub-stream ``stream`` of ``seed``."""
    return splitmix64((seed & MASK64) ^ splitmix64(stream & MASK64))


def replication_seed(base_seed: int, replication: int) -> int:
    return mix_seed(base_seed, replication)


def jain_index(rates) -> float:
    """(sum x)^2 / (n * sum x^2) over nonnegative rates, not all zero."""
    rates = [float(r) for r in rates]
    if not rates:
        raise ValueError("jain_index needs at least one rate")
    if any(r < 0 or not math.isfinite(r) for r in rates):
        raise ValueError("jain_index needs finite nonnegative rates")
    top = max(rates)
    if top == 0.0:
        raise ValueError("jain_index undefined for all-zero rates")
    n = len(rates)
    if all(r == top for r in rates):
        return 1.0
    # scale-free; normalising avoids underflow of tiny squares
    rates = [r / top for r in rates]
    sq = math.fsum(r * r for r in rates)
    # Cauchy-Schwarz bounds hold exactly; clamp the last-ulp rounding
    return min(1.0, max(1.0 / n, math.fsum(rates) ** 2 / (n * sq)))


@dataclass
class ExperimentConfig:
    topology: dict
    workload: dict
    policy: str = "max_min"
    ops: Ops = Ops()
    k: int = 4
    replications: int = 1
    base_seed: int = 0
    sweep_name: Optional[str] = None
    sweep_values: tuple = ()
    base_dir: Optional[str] = None
    raw: Optional[dict] = None

    @property
    def points(self) -> list[tuple[Any, "ExperimentConfig"]]:
        """(sweep value, concrete config) per sweep point, in sweep order."""
        if self.sweep_name is None:
            return [(None, self)]
        out = []
        for value in self.sweep_values:
            doc = copy.deepcopy(self.raw)
            doc.pop("sweep", None)
            _set_path(doc, self.sweep_name, value)
            out.append((value, config_from_dict(doc, self.base_dir)))
        return out


def _set_path(doc: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {}) if p == "ops" else node.get(p)
        if not isinstance(node, dict):
            raise ConfigError(f"sweep name {dotted!r}: {p!r} is not a section")
    if parts[-1] not in node and parts[-1] not in _OPTIONAL_KEYS:
        raise ConfigError(f"sweep name {dotted!r} does not name a config field")
    node[parts[-1]] = value


_OPTIONAL_KEYS = {"policy", "k", "p1", "p2", "eta", "class_mix", "dqc_size_range",
                  "fidelity_floor_range", "dqc_pattern", "capacity_range", "fidelity_range",
                  "interior_repeaters"}


_WORKLOAD_KEYS = {"n_apps", "class_mix", "dqc_size_range", "fidelity_floor_range", "dqc_pattern"}
_TOPOLOGY_KEYS = {
    "grid": {"rows", "cols", "capacity", "fidelity", "interior_repeaters"},
    "random": {"n", "edge_prob", "capacity_range", "fidelity_range"},
    "file": {"path"},
}


def config_from_dict(doc, base_dir: Optional[str] = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("topology", "workload"):
        if not isinstance(doc.get(key), dict):
            raise ConfigError(f"missing or malformed {key!r} section")
    unknown = set(doc) - {"topology", "workload", "policy", "ops", "k", "replications",
                          "base_seed", "sweep"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    reps = doc.get("replications", 1)
    if isinstance(reps, bool) or not isinstance(reps, int) or reps < 1:
        raise ConfigError(f"replications must be an integer >= 1, got {reps!r}")
    k = doc.get("k", 4)
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ConfigError(f"k must be an integer >= 1, got {k!r}")
    seed = doc.get("base_seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"base_seed must be an integer, got {seed!r}")
    try:
        policy = PolicyConfig.parse(doc.get("policy", "max_min")).policy.value
        ops = Ops(**doc.get("ops", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if doc["topology"].get("generator") not in ("grid", "random", "file"):
        raise ConfigError(f"unknown topology generator {doc['topology'].get('generator')!r}")
    if "n_apps" not in doc["workload"]:
        raise ConfigError("workload.n_apps is required")
    bad = set(doc["workload"]) - _WORKLOAD_KEYS
    if bad:
        raise ConfigError(f"unknown workload keys: {sorted(bad)}")
    gen = doc["topology"]["generator"]
    bad = set(doc["topology"]) - _TOPOLOGY_KEYS[gen] - {"generator"}
    if bad:
        raise ConfigError(f"unknown {gen} topology keys: {sorted(bad)}")

    cfg = ExperimentConfig(
        topology=dict(doc["topology"]), workload=dict(doc["workload"]), policy=policy, ops=ops,
        k=k, replications=reps, base_seed=seed, base_dir=base_dir, raw=copy.deepcopy(doc),
    )
    sweep = doc.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or not isinstance(sweep.get("name"), str) \
                or not isinstance(sweep.get("values"), list) or not sweep["values"]:
            raise ConfigError("sweep must be {\"name\": str, \"values\": [non-empty list]}")
        cfg.sweep_name = sweep["name"]
        cfg.sweep_values = tuple(sweep["values"])
        cfg.points  # type-check every sweep value up front
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_dict(doc, str(path.parent))


def build_topology(spec: dict, seed: int, base_dir: Optional[str] = None) -> Network:
    params = {k: v for k, v in spec.items() if k != "generator"}
    gen = spec["generator"]
    if gen == "grid":
        return build_grid(params["rows"], params["cols"], params["capacity"], params["fidelity"],
                          params.get("interior_repeaters", False))
    if gen == "random":
        return generate_random(seed, params["n"], params["edge_prob"],
                               params.get("capacity_range", (10.0, 10.0)),
                               params.get("fidelity_range", (0.95, 0.95)))
    path = Path(params["path"])
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    return load_network(path.read_text())


@dataclass
class RunMetrics:
    sweep_name: str
    sweep_value: Any
    replication: int
    seed: int
    n_apps: Optional[int] = None
    n_admitted: Optional[int] = None
    admission_ratio: Optional[float] = None
    total_rate: Optional[float] = None
    min_rate: Optional[float] = None
    jain_index: Optional[float] = None
    mean_hop_count: Optional[float] = None
    p2p_admission_ratio: Optional[float] = None
    dqc_admission_ratio: Optional[float] = None
    p2p_total_rate: Optional[float] = None
    dqc_total_rate: Optional[float] = None
    error: str = ""

    def row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def _ratio(num: int, den: int) -> float:
    return num / den if den else math.nan


def run_replication(cfg: ExperimentConfig, replication: int, sweep_name: str = "",
                    sweep_value=None) -> RunMetrics:
    """One replication; exceptions are captured into the ``error`` column."""
    seed = replication_seed(cfg.base_seed, replication)
    m = RunMetrics(sweep_name, sweep_value, replication, seed)
    try:
        net = build_topology(cfg.topology, mix_seed(seed, 1), cfg.base_dir)
        wl = dict(cfg.workload)
        apps = generate_workload(mix_seed(seed, 2), net, wl.pop("n_apps"), **wl)
        alloc = allocate(net, apps, cfg.policy, cfg.ops, cfg.k)
    except Exception as exc:  # noqa: BLE001 - failed replications are data
        m.error = f"{type(exc).__name__}: {exc}"
        return m

    rates = alloc.app_rates(apps)
    admitted = {i for i, r in rates.items() if r > 0.0}
    by_class = {c: [a.id for a in apps if a.app_class is c] for c in AppClass}
    demand_rate = {c: 0.0 for c in AppClass}
    cls_of = {a.id: a.app_class for a in apps}
    for a in alloc.assignments:
        demand_rate[cls_of[a.demand.app_id]] += a.rate

    m.n_apps = len(apps)
    m.n_admitted = len(admitted)
    m.admission_ratio = _ratio(len(admitted), len(apps))
    m.total_rate = math.fsum(a.rate for a in alloc.assignments)
    m.min_rate = min((rates[i] for i in sorted(admitted)), default=math.nan)
    m.jain_index = jain_index(rates.values()) if admitted else math.nan
    hops = [a.path.hop_count for a in alloc.assignments]
    m.mean_hop_count = sum(hops) / len(hops) if hops else math.nan
    m.p2p_admission_ratio = _ratio(len(admitted & set(by_class[AppClass.P2P])),
                                   len(by_class[AppClass.P2P]))
    m.dqc_admission_ratio = _ratio(len(admitted & set(by_class[AppClass.DQC])),
                                   len(by_class[AppClass.DQC]))
    m.p2p_total_rate = demand_rate[AppClass.P2P]
    m.dqc_total_rate = demand_rate[AppClass.DQC]
    return m


def _task(args):
    return run_replication(*args)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list[RunMetrics]:
    """All (sweep value x replication) runs, sweep-major, replication-minor."""
    name = cfg.sweep_name or ""
    tasks = [(point, rep, name, value)
             for value, point in cfg.points for rep in range(cfg.replications)]
    if jobs <= 1 or len(tasks) <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map yields in submission order, whatever order the workers finish in
        return list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def metrics_csv(rows: list[RunMetrics]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(r.row())
    return buf.getvalue()
