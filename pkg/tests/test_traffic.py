from math import comb

import pytest
from hypothesis import given, strategies as st

from qnetalloc.topology import ValidationError, build_grid
from qnetalloc.traffic import (
    App,
    AppClass,
    Pattern,
    check_app,
    expand_app,
    generate_workload,
    load_apps,
    save_apps,
)


def test_expand_p2p():
    (d,) = expand_app(App.p2p(1, 0, 5))
    assert d.pair == (0, 5)
    assert d.coupling_group is None


def test_expand_star():
    ds = expand_app(App.dqc(2, [0, 1, 2, 3], Pattern.STAR, coordinator=0))
    assert [d.pair for d in ds] == [(0, 1), (0, 2), (0, 3)]


def test_expand_all_pairs():
    ds = expand_app(App.dqc(3, [0, 1, 2, 3]))
    assert sorted(d.pair for d in ds) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


@given(hosts=st.lists(st.integers(0, 50), min_size=2, max_size=9, unique=True),
       star=st.booleans(), fmin=st.floats(0.26, 1.0), data=st.data())
def test_expand_counts_and_coupling(hosts, star, fmin, data):
    coord = data.draw(st.sampled_from(hosts)) if star else None
    app = App.dqc(9, hosts, Pattern.STAR if star else Pattern.ALL_PAIRS, coord, min_fidelity=fmin)
    ds = expand_app(app)
    assert len(ds) == (len(hosts) - 1 if star else comb(len(hosts), 2))
    assert {d.coupling_group for d in ds} == {9}
    assert {d.min_fidelity for d in ds} == {fmin}
    assert all(d.a != d.b for d in ds)


@pytest.mark.parametrize("app", [
    App.p2p(0, 1, 1),
    App.dqc(0, [1]),
    App.dqc(0, [1, 1, 2]),
    App.dqc(0, [1, 2], Pattern.STAR, coordinator=3),
    App.p2p(0, 1, 2, min_fidelity=0.25),
    App.p2p(0, 1, 2, weight=0),
    App.p2p(0, 1, 2, rate_demand=-1.0),
])
def test_invalid_apps(app):
    with pytest.raises(ValidationError):
        expand_app(app)


def test_app_against_network():
    net = build_grid(3, 3, 10.0, 0.95, interior_repeaters=True)
    check_app(App.p2p(0, 0, 8), net)
    with pytest.raises(ValidationError, match="repeater"):
        check_app(App.p2p(0, 0, 4), net)
    with pytest.raises(ValidationError, match="not in network"):
        check_app(App.p2p(0, 0, 99), net)


def test_workload_class_mix():
    net = build_grid(4, 4, 10.0, 0.95)
    assert all(a.app_class is AppClass.P2P for a in generate_workload(1, net, 30, class_mix=0.0))
    apps = generate_workload(1, net, 30, class_mix=1.0, dqc_size_range=[3, 3])
    assert all(a.app_class is AppClass.DQC and len(a.hosts) == 3 for a in apps)
    mixed = generate_workload(1, net, 200, class_mix=0.5, dqc_pattern="mixed")
    assert {a.app_class for a in mixed} == set(AppClass)
    assert {a.pattern for a in mixed if a.app_class is AppClass.DQC} == set(Pattern)


def test_workload_deterministic_and_valid():
    net = build_grid(4, 4, 10.0, 0.95, interior_repeaters=True)
    a = generate_workload(5, net, 40, 0.4, [2, 5], [0.6, 0.9], "star")
    assert a == generate_workload(5, net, 40, 0.4, [2, 5], [0.6, 0.9], "star")
    assert a != generate_workload(6, net, 40, 0.4, [2, 5], [0.6, 0.9], "star")
    for app in a:
        check_app(app, net)
        assert 0.6 <= app.min_fidelity <= 0.9


def test_workload_insufficient_endpoints():
    net = build_grid(1, 3, 10.0, 0.95)
    with pytest.raises(ValidationError, match="endpoints"):
        generate_workload(0, net, 3, class_mix=0.5, dqc_size_range=[4, 4])


def test_apps_json_round_trip():
    apps = [App.p2p(0, 0, 5, min_fidelity=0.7, rate_demand=3.5),
            App.dqc(1, [1, 2, 3], Pattern.STAR, coordinator=2, weight=2.0)]
    assert load_apps(save_apps(apps)) == apps
    assert load_apps('{"apps": ' + save_apps(apps) + "}") == apps


def test_apps_json_errors():
    with pytest.raises(ValidationError, match="class"):
        load_apps('[{"id": 0, "class": "bulk", "min_fidelity": 0.5}]')
    with pytest.raises(ValidationError, match="min_fidelity"):
        load_apps('[{"id": 0, "class": "p2p", "src": 0, "dst": 1}]')
    with pytest.raises(ValidationError, match="duplicate"):
        load_apps('[{"id": 0, "class": "p2p", "src": 0, "dst": 1, "min_fidelity": 0.5},'
                  ' {"id": 0, "class": "p2p", "src": 0, "dst": 2, "min_fidelity": 0.5}]')
