import pytest

from qnetalloc.topology import Link, Network, Node, NodeKind


def line(caps, fidelity=0.95):
    """Path graph 0-1-...-n with the given link capacities."""
    nodes = [Node(i) for i in range(len(caps) + 1)]
    links = [Link(i, i + 1, c, fidelity) for i, c in enumerate(caps)]
    return Network(nodes, links)


@pytest.fixture
def abc():
    # A=0, B=1, C=2; A-B cap 10, B-C cap 6
    return line([10.0, 6.0])


@pytest.fixture
def star():
    # repeater hub 0, hosts 1, 2, 3
    nodes = [Node(0, NodeKind.REPEATER)] + [Node(i) for i in (1, 2, 3)]
    return Network(nodes, [Link(0, i, 6.0, 0.95) for i in (1, 2, 3)])


@pytest.fixture
def triangle():
    return Network([Node(i) for i in range(3)],
                   [Link(0, 1, 10.0, 0.95), Link(1, 2, 10.0, 0.95), Link(0, 2, 10.0, 0.95)])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
