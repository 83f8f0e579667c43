"""Candidate path enumeration and fidelity-based path filtering.

Paths are ranked by hop count, ties broken by the lexicographic order of
their node sequences. ``k_shortest_paths`` is Yen's algorithm over that
total order, so its output equals the first ``k`` entries of the sorted
list of all simple paths.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from .fidelity import PERFECT_OPS, Ops, path_fidelity, werner_weight
from .topology import Network, link_key
from .traffic import PairDemand

DEFAULT_K = 4


class RoutingError(ValueError):
    pass


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]

    @cached_property
    def links(self) -> tuple[tuple[int, int], ...]:
        return tuple(link_key(a, b) for a, b in zip(self.nodes, self.nodes[1:]))

    @property
    def hop_count(self) -> int:
        return len(self.nodes) - 1

    @property
    def num_intermediate(self) -> int:
        return self.hop_count - 1

    def is_valid_in(self, net: Network) -> bool:
        if len(self.nodes) < 2 or len(set(self.nodes)) != len(self.nodes):
            return False
        return all(net.has_node(n) for n in self.nodes) and \
            all(net.has_link(u, v) for u, v in self.links)

    def fidelity(self, net: Network, ops: Ops = PERFECT_OPS) -> float:
        return path_fidelity([werner_weight(net.link(u, v).fidelity) for u, v in self.links], ops)


def _shortest(net: Network, src: int, dst: int, banned_nodes: set[int],
              banned_links: set[tuple[int, int]]) -> Optional[list[int]]:
    """Lexicographically smallest among the fewest-hop src-dst paths."""
    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        x = queue.popleft()
        for y in net.neighbors(x):
            if y in dist or y in banned_nodes or link_key(x, y) in banned_links:
                continue
            dist[y] = dist[x] + 1
            queue.append(y)
    if src not in dist:
        return None
    path = [src]
    while path[-1] != dst:
        x = path[-1]
        # neighbors are sorted, so the first hop that closes distance is the smallest id
        path.append(next(y for y in net.neighbors(x)
                         if dist.get(y) == dist[x] - 1 and link_key(x, y) not in banned_links))
    return path


def k_shortest_paths(net: Network, src: int, dst: int, k: int = DEFAULT_K) -> list[Path]:
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise RoutingError(f"k must be an integer >= 1, got {k!r}")
    for nid in (src, dst):
        if not net.has_node(nid):
            raise RoutingError(f"unknown node {nid}")
    if src == dst:
        raise RoutingError(f"source and destination are both {src}")

    first = _shortest(net, src, dst, set(), set())
    if first is None:
        return []
    found = [tuple(first)]
    candidates: list[tuple[int, tuple[int, ...]]] = []
    seen = {found[0]}
    while len(found) < k:
        prev = found[-1]
        for i in range(len(prev) - 1):
            root = prev[: i + 1]
            banned_links = {link_key(p[i], p[i + 1]) for p in found if p[: i + 1] == root}
            spur = _shortest(net, prev[i], dst, set(root[:-1]), banned_links)
            if spur is None:
                continue
            cand = root[:-1] + tuple(spur)
            if cand not in seen:
                seen.add(cand)
                heapq.heappush(candidates, (len(cand), cand))
        if not candidates:
            break
        found.append(heapq.heappop(candidates)[1])
    return [Path(p) for p in found]


def feasible_paths(net: Network, demand: PairDemand, k: int = DEFAULT_K,
                   ops: Ops = PERFECT_OPS) -> list[tuple[Path, float]]:
    """Candidate paths whose end-to-end fidelity meets the demand's threshold."""
    out = []
    for path in k_shortest_paths(net, demand.a, demand.b, k):
        fid = path.fidelity(net, ops)
        if fid >= demand.min_fidelity:
            out.append((path, fid))
    return out

