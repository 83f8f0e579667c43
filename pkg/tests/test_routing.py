import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from qnetalloc.fidelity import PERFECT_OPS, Reach, fidelity_perfect, max_intermediate_repeaters
from qnetalloc.routing import RoutingError, feasible_paths, k_shortest_paths
from qnetalloc.topology import Link, Network, Node, build_grid, generate_random
from qnetalloc.traffic import PairDemand

from conftest import line


def brute_force_paths(net, src, dst):
    g = nx.Graph(list(net.links))
    g.add_nodes_from(net.nodes)
    return sorted((tuple(p) for p in nx.all_simple_paths(g, src, dst)), key=lambda p: (len(p), p))


def test_line_unique_path():
    paths = k_shortest_paths(line([1, 1]), 0, 2, 3)
    assert [p.nodes for p in paths] == [(0, 1, 2)]
    assert paths[0].hop_count == 2 and paths[0].num_intermediate == 1


def test_triangle(triangle):
    assert [p.nodes for p in k_shortest_paths(triangle, 0, 1, 2)] == [(0, 1), (0, 2, 1)]


def test_errors(triangle):
    with pytest.raises(RoutingError):
        k_shortest_paths(triangle, 0, 0, 1)
    with pytest.raises(RoutingError):
        k_shortest_paths(triangle, 0, 7, 1)
    with pytest.raises(RoutingError):
        k_shortest_paths(triangle, 0, 1, 0)


def test_disconnected_pair():
    net = Network([Node(i) for i in range(4)], [Link(0, 1, 1.0, 0.9), Link(2, 3, 1.0, 0.9)])
    assert k_shortest_paths(net, 0, 3, 3) == []


def test_grid_tie_break():
    net = build_grid(2, 2, 10.0, 0.95)
    # 0-1 / 2-3: two 2-hop routes from 0 to 3, lexicographic order decides
    assert [p.nodes for p in k_shortest_paths(net, 0, 3, 5)] == [(0, 1, 3), (0, 2, 3)]


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(3, 9), p=st.floats(0.3, 1.0),
       k=st.integers(1, 12), data=st.data())
def test_yen_matches_exhaustive_enumeration(seed, n, p, k, data):
    net = generate_random(seed, n, p)
    ids = sorted(net.nodes)
    if len(ids) < 2:
        return
    src = data.draw(st.sampled_from(ids))
    dst = data.draw(st.sampled_from([i for i in ids if i != src]))
    got = [q.nodes for q in k_shortest_paths(net, src, dst, k)]
    assert got == brute_force_paths(net, src, dst)[:k]
    for q in k_shortest_paths(net, src, dst, k):
        assert q.is_valid_in(net)


def test_feasible_excludes_long_chain():
    net = line([10.0] * 5)
    assert max_intermediate_repeaters(0.95, 0.8).l_max == 3
    assert fidelity_perfect(0.95, 4) < 0.8
    assert feasible_paths(net, PairDemand(0, 0, 5, 0.8), 4) == []
    ((path, fid),) = feasible_paths(net, PairDemand(0, 0, 4, 0.8), 4)
    assert path.num_intermediate == 3
    assert fid == pytest.approx(fidelity_perfect(0.95, 3), abs=1e-12)


def test_feasible_single_link_and_perfect_threshold():
    net = line([10.0], fidelity=0.9)
    ((path, fid),) = feasible_paths(net, PairDemand(0, 0, 1, 0.9 - 1e-9))
    assert path.nodes == (0, 1) and fid == pytest.approx(0.9, abs=1e-15)
    assert feasible_paths(net, PairDemand(0, 0, 1, 1.0)) == []


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), f1=st.floats(0.26, 1.0), f2=st.floats(0.26, 1.0))
def test_feasible_monotone_in_threshold(seed, f1, f2):
    lo, hi = sorted((f1, f2))
    net = generate_random(seed, 8, 0.5, [1, 1], [0.85, 1.0])
    ids = sorted(net.nodes)
    a, b = ids[0], ids[-1]
    loose = {p.nodes for p, _ in feasible_paths(net, PairDemand(0, a, b, lo), 6)}
    tight = {p.nodes for p, _ in feasible_paths(net, PairDemand(0, a, b, hi), 6)}
    assert tight <= loose


@settings(max_examples=60, deadline=None)
@given(rows=st.integers(1, 4), cols=st.integers(2, 4), fbar=st.floats(0.8, 1.0),
       fmin=st.floats(0.5, 1.0), k=st.integers(1, 8))
def test_uniform_shortcut_equivalence(rows, cols, fbar, fmin, k):
    net = build_grid(rows, cols, 1.0, fbar)
    dst = rows * cols - 1
    got = [p.nodes for p, _ in feasible_paths(net, PairDemand(0, 0, dst, fmin), k, PERFECT_OPS)]
    lim = max_intermediate_repeaters(fbar, fmin)
    cands = k_shortest_paths(net, 0, dst, k)
    if lim.reach is Reach.INFEASIBLE:
        expected = []
    elif lim.reach is Reach.UNBOUNDED:
        expected = [p.nodes for p in cands]
    else:
        expected = [p.nodes for p in cands if p.hop_count <= lim.l_max + 1]
    assert got == expected
