"""Quantum network graph model, generators and JSON I/O.

Nodes are either endpoints (quantum computers that terminate traffic) or
repeaters. Links are undirected and carry an entanglement generation
capacity (EPR pairs per second) and the elementary fidelity of the pairs
they produce.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

FIDELITY_FLOOR = 0.25


class ValidationError(ValueError):
    """Invalid network or application data.

    ``path`` points at the offending element, e.g. ``links[3].fidelity``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NodeKind(str, enum.Enum):
    ENDPOINT = "endpoint"
    REPEATER = "repeater"


@dataclass(frozen=True)
class Node:
    id: int
    kind: NodeKind = NodeKind.ENDPOINT
    label: Optional[str] = None


def link_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Link:
    u: int
    v: int
    capacity: float
    fidelity: float

    @property
    def key(self) -> tuple[int, int]:
        return link_key(self.u, self.v)


def check_capacity(value, path: str = "capacity") -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"must be a number, got {value!r}", path)
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"must be finite and > 0, got {value!r}", path)
    return value


def check_fidelity(value, path: str = "fidelity") -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"must be a number, got {value!r}", path)
    value = float(value)
    if not (FIDELITY_FLOOR < value <= 1.0):
        raise ValidationError(f"{value!r} outside (0.25, 1]", path)
    return value


class Network:
    """Immutable undirected graph of nodes and entanglement links.

    Links are stored canonically with ``u < v``. ``metadata`` carries
    generator bookkeeping and does not take part in equality.
    """

    def __init__(self, nodes: Iterable[Node], links: Iterable[Link], metadata: Optional[dict] = None):
        node_map: dict[int, Node] = {}
        for i, n in enumerate(nodes):
            if n.id in node_map:
                raise ValidationError(f"duplicate node id {n.id}", f"nodes[{i}].id")
            node_map[n.id] = n
        link_map: dict[tuple[int, int], Link] = {}
        for i, l in enumerate(links):
            where = f"links[{i}]"
            if l.u == l.v:
                raise ValidationError(f"self-loop on node {l.u}", where)
            for end in ("u", "v"):
                if getattr(l, end) not in node_map:
                    raise ValidationError(f"unknown node {getattr(l, end)}", f"{where}.{end}")
            check_capacity(l.capacity, f"{where}.capacity")
            check_fidelity(l.fidelity, f"{where}.fidelity")
            key = l.key
            if key in link_map:
                raise ValidationError(f"duplicate link {key[0]}-{key[1]}", where)
            link_map[key] = Link(key[0], key[1], float(l.capacity), float(l.fidelity))

        self._nodes = dict(sorted(node_map.items()))
        self._links = dict(sorted(link_map.items()))
        adj: dict[int, list[int]] = {nid: [] for nid in self._nodes}
        for u, v in self._links:
            adj[u].append(v)
            adj[v].append(u)
        self._adj = {nid: tuple(sorted(nbrs)) for nid, nbrs in adj.items()}
        self.metadata = dict(metadata or {})

    @property
    def nodes(self) -> dict[int, Node]:
        return dict(self._nodes)

    @property
    def links(self) -> dict[tuple[int, int], Link]:
        return dict(self._links)

    def node(self, nid: int) -> Node:
        return self._nodes[nid]

    def link(self, u: int, v: int) -> Link:
        return self._links[link_key(u, v)]

    def has_node(self, nid: int) -> bool:
        return nid in self._nodes

    def has_link(self, u: int, v: int) -> bool:
        return link_key(u, v) in self._links

    def neighbors(self, nid: int) -> tuple[int, ...]:
        """Neighbour ids in ascending order."""
        return self._adj[nid]

    def degree(self, nid: int) -> int:
        return len(self._adj[nid])

    def endpoints(self) -> list[int]:
        return [n.id for n in self._nodes.values() if n.kind is NodeKind.ENDPOINT]

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by size desc then smallest id."""
        seen: set[int] = set()
        comps = []
        for start in self._nodes:
            if start in seen:
                continue
            comp, stack = [], [start]
            seen.add(start)
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in self._adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            comps.append(sorted(comp))
        comps.sort(key=lambda c: (-len(c), c[0]))
        return comps

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self._nodes == other._nodes and self._links == other._links

    def __repr__(self):
        return f"Network(nodes={len(self._nodes)}, links={len(self._links)})"


def validate(net: Network) -> None:
    """Re-check every node and link invariant; raises ValidationError."""
    Network(net.nodes.values(), net.links.values())


def build_grid(rows: int, cols: int, capacity: float, elementary_fidelity: float,
               interior_repeaters: bool = False) -> Network:
    """rows x cols lattice; node id is ``r * cols + c``.

    With ``interior_repeaters`` the non-border nodes become repeaters.
    """
    for name, val in (("rows", rows), ("cols", cols)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 1:
            raise ValidationError(f"must be a positive integer, got {val!r}", name)
    capacity = check_capacity(capacity, "capacity")
    elementary_fidelity = check_fidelity(elementary_fidelity, "elementary_fidelity")

    nodes = []
    for r in range(rows):
        for c in range(cols):
            interior = 0 < r < rows - 1 and 0 < c < cols - 1
            kind = NodeKind.REPEATER if (interior_repeaters and interior) else NodeKind.ENDPOINT
            nodes.append(Node(r * cols + c, kind))
    links = []
    for r in range(rows):
        for c in range(cols):
            nid = r * cols + c
            if c + 1 < cols:
                links.append(Link(nid, nid + 1, capacity, elementary_fidelity))
            if r + 1 < rows:
                links.append(Link(nid, nid + cols, capacity, elementary_fidelity))
    return Network(nodes, links, {"generator": "grid", "rows": rows, "cols": cols})


def _check_range(rng, name: str, checker) -> tuple[float, float]:
    try:
        lo, hi = rng
    except (TypeError, ValueError):
        raise ValidationError(f"must be a [lo, hi] pair, got {rng!r}", name) from None
    lo, hi = checker(lo, f"{name}[0]"), checker(hi, f"{name}[1]")
    if lo > hi:
        raise ValidationError(f"lo {lo} > hi {hi}", name)
    return lo, hi


def generate_random(seed: int, n: int, edge_prob: float,
                    capacity_range=(10.0, 10.0), fidelity_range=(0.95, 0.95)) -> Network:
    """Erdos-Renyi G(n, p) graph restricted to its largest connected component.

    Node pairs (i, j), i < j, are visited in lexicographic order; each draws
    one uniform for the edge test, and each created edge then draws its
    capacity and fidelity. Uses numpy's PCG64, which is platform independent.
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ValidationError(f"need at least 2 nodes, got {n!r}", "n")
    if not (0.0 < edge_prob <= 1.0):
        raise ValidationError(f"{edge_prob!r} outside (0, 1]", "edge_prob")
    cap_lo, cap_hi = _check_range(capacity_range, "capacity_range", check_capacity)
    fid_lo, fid_hi = _check_range(fidelity_range, "fidelity_range", check_fidelity)

    rng = np.random.default_rng(seed)
    nodes = [Node(i) for i in range(n)]
    links = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                cap = float(rng.uniform(cap_lo, cap_hi))
                fid = float(rng.uniform(fid_lo, fid_hi))
                # lo + (hi - lo) * u can round past hi
                links.append(Link(i, j, cap, min(max(fid, fid_lo), fid_hi)))

    full = Network(nodes, links)
    comps = full.components()
    keep = set(comps[0])
    meta = {
        "generator": "random",
        "seed": seed,
        "n": n,
        "edge_prob": edge_prob,
        "components": len(comps),
        "kept_component_size": len(keep),
    }
    if len(comps) == 1:
        full.metadata = meta
        return full
    return Network([nd for nd in nodes if nd.id in keep],
                   [l for l in links if l.u in keep and l.v in keep], meta)


def network_to_dict(net: Network) -> dict:
    nodes = []
    for nd in net.nodes.values():
        entry = {"id": nd.id, "kind": nd.kind.value}
        if nd.label is not None:
            entry["label"] = nd.label
        nodes.append(entry)
    links = [{"u": l.u, "v": l.v, "capacity_eprps": l.capacity, "fidelity": l.fidelity}
             for l in net.links.values()]
    return {"nodes": nodes, "links": links}


def save_network(net: Network) -> str:
    # json emits repr(float), the shortest string that round-trips exactly
    return json.dumps(network_to_dict(net), indent=2)


def _int_field(obj: dict, key: str, path: str) -> int:
    if key not in obj:
        raise ValidationError("missing field", f"{path}.{key}")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ValidationError(f"must be an integer, got {val!r}", f"{path}.{key}")
    return val


def network_from_dict(doc) -> Network:
    """Build a Network from a decoded JSON document.

    Repeated links between the same node pair are merged: capacities add up
    and the lower fidelity is kept.
    """
    if not isinstance(doc, dict):
        raise ValidationError("top level must be an object", "$")
    for key in ("nodes", "links"):
        if not isinstance(doc.get(key), list):
            raise ValidationError("missing or not a list", key)

    nodes = []
    seen_ids: set[int] = set()
    for i, entry in enumerate(doc["nodes"]):
        path = f"nodes[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError("must be an object", path)
        nid = _int_field(entry, "id", path)
        if nid in seen_ids:
            raise ValidationError(f"duplicate node id {nid}", f"{path}.id")
        seen_ids.add(nid)
        try:
            kind = NodeKind(entry.get("kind", "endpoint"))
        except ValueError:
            raise ValidationError(f"unknown kind {entry.get('kind')!r}, expected endpoint|repeater",
                                  f"{path}.kind") from None
        label = entry.get("label")
        if label is not None and not isinstance(label, str):
            raise ValidationError("must be a string", f"{path}.label")
        nodes.append(Node(nid, kind, label))

    merged: dict[tuple[int, int], list] = {}
    for i, entry in enumerate(doc["links"]):
        path = f"links[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError("must be an object", path)
        u = _int_field(entry, "u", path)
        v = _int_field(entry, "v", path)
        if u == v:
            raise ValidationError(f"self-loop on node {u}", path)
        for end, nid in (("u", u), ("v", v)):
            if nid not in seen_ids:
                raise ValidationError(f"unknown node {nid}", f"{path}.{end}")
        cap = check_capacity(entry.get("capacity_eprps"), f"{path}.capacity_eprps")
        fid = check_fidelity(entry.get("fidelity"), f"{path}.fidelity")
        key = link_key(u, v)
        if key in merged:
            merged[key][0] += cap
            merged[key][1] = min(merged[key][1], fid)
        else:
            merged[key] = [cap, fid]

    links = [Link(u, v, cap, fid) for (u, v), (cap, fid) in merged.items()]
    return Network(nodes, links)


def load_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}", "$") from None
    return network_from_dict(doc)
