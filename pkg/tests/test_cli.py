import json
import subprocess
import sys
from pathlib import Path

import pytest

from qnetalloc.cli import main
from qnetalloc.topology import load_network
from qnetalloc.traffic import load_apps
from qnetalloc.allocation import allocation_from_dict, verify_allocation

FIXTURES = Path(__file__).parent / "fixtures"


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_topo_generate_grid(capsys):
    code, out, _ = run(["topo", "generate", "--grid", "3x3", "--capacity", "10",
                        "--fidelity", "0.95"], capsys)
    assert code == 0
    net = load_network(out)
    assert len(net.nodes) == 9 and len(net.links) == 12


def test_topo_generate_random_to_file(tmp_path, capsys):
    target = tmp_path / "net.json"
    code, _, _ = run(["topo", "generate", "--random", "12", "--edge-prob", "0.4", "--seed", "3",
                      "--fidelity-range", "0.9", "0.99", "--output", str(target)], capsys)
    assert code == 0
    assert load_network(target.read_text()) is not None


@pytest.mark.parametrize("argv", [
    ["topo", "generate", "--grid", "0x3", "--capacity", "10", "--fidelity", "0.95"],
    ["topo", "generate", "--grid", "3x3", "--fidelity", "0.2"],
    ["topo", "generate"],
    ["topo", "generate", "--grid", "2x2", "--bogus"],
    ["frobnicate"],
])
def test_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_topo_validate(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nodes": [{"id": 0, "kind": "endpoint"}, {"id": 1, "kind": "endpoint"}],
                               "links": [{"u": 1, "v": 1, "capacity_eprps": 1, "fidelity": 0.9}]}))
    code, _, err = run(["topo", "validate", "--input", str(bad)], capsys)
    assert code == 1 and "links[0]" in err and "self-loop" in err
    code, out, _ = run(["topo", "validate", "--input", str(FIXTURES / "grid_network.json")], capsys)
    assert code == 0 and json.loads(out)["valid"]
    code, _, _ = run(["topo", "validate", "--input", str(tmp_path / "missing.json")], capsys)
    assert code == 1


def test_fidelity_values(capsys):
    assert run(["fidelity", "--fbar", "0.95", "--L", "0"], capsys)[1].strip() == "0.95"
    out = run(["fidelity", "--fbar", "0.95", "--L", "2"], capsys)[1].strip()
    assert out == "0.859777777778"
    assert round(float(out), 4) == 0.8598
    assert run(["fidelity", "--fbar", "0.95", "--invert", "--fmin", "0.8"], capsys)[1].strip() == "3"
    assert run(["fidelity", "--fbar", "0.9", "--invert", "--fmin", "0.95"],
               capsys)[1].strip() == "infeasible"
    assert run(["fidelity", "--fbar", "1.0", "--invert", "--fmin", "0.99"],
               capsys)[1].strip() == "unbounded"
    doc = json.loads(run(["fidelity", "--fbar", "0.95", "--L", "1", "--p1", "0.99", "--p2", "0.99",
                          "--eta", "0.99", "--format", "json"], capsys)[1])
    assert doc["fidelity"] == pytest.approx(0.8671084390239998, abs=1e-12)


@pytest.mark.parametrize("argv, needle", [
    (["fidelity", "--fbar", "0.2"], "(0.25, 1]"),
    (["fidelity", "--fbar", "0.9", "--L", "-1"], ">= 0"),
    (["fidelity", "--fbar", "0.9", "--eta", "0.4"], "(0.5, 1]"),
    (["fidelity", "--fbar", "0.9", "--invert"], "--fmin"),
])
def test_fidelity_domain_errors(argv, needle, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and needle in err


def test_allocate_two_flows(capsys):
    code, out, _ = run(["allocate", "--network", str(FIXTURES / "grid_network.json"),
                        "--apps", str(FIXTURES / "two_flows.json"), "--policy", "MaxMin"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert [a["rate"] for a in doc["assignments"]] == [5.0, 5.0]
    net = load_network((FIXTURES / "grid_network.json").read_text())
    apps = load_apps((FIXTURES / "two_flows.json").read_text())
    assert verify_allocation(net, apps, allocation_from_dict(doc, net, apps)) == []


def test_allocate_rejections_are_not_failures(tmp_path, capsys):
    apps = tmp_path / "apps.json"
    apps.write_text(json.dumps([{"id": 0, "class": "p2p", "src": 0, "dst": 1, "min_fidelity": 0.99}]))
    code, out, _ = run(["allocate", "--network", str(FIXTURES / "grid_network.json"),
                        "--apps", str(apps)], capsys)
    assert code == 0
    assert json.loads(out)["rejected"][0]["reason"] == "no_feasible_path"


def test_allocate_errors(tmp_path, capsys):
    code, _, err = run(["allocate", "--network", str(FIXTURES / "grid_network.json"),
                        "--apps", str(FIXTURES / "two_flows.json"), "--policy", "lottery"], capsys)
    assert code == 2 and "greedy_shortest" in err and "weighted_max_min" in err
    apps = tmp_path / "apps.json"
    apps.write_text(json.dumps([{"id": 7, "class": "p2p", "src": 0, "dst": 42, "min_fidelity": 0.5}]))
    code, _, err = run(["allocate", "--network", str(FIXTURES / "grid_network.json"),
                        "--apps", str(apps)], capsys)
    assert code == 1 and "app[7]" in err


def test_simulate_deterministic(tmp_path, capsys):
    cfg = str(FIXTURES / "campaign.json")
    outs = []
    for jobs in ("1", "1", "4"):
        target = tmp_path / f"out{len(outs)}.csv"
        assert run(["simulate", "--config", cfg, "--jobs", jobs, "-o", str(target)], capsys)[0] == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    assert outs[0].splitlines()[0].startswith(b"sweep_name,sweep_value,replication,seed")


def test_simulate_config_errors(tmp_path, capsys):
    doc = json.loads((FIXTURES / "campaign.json").read_text())
    doc["replications"] = 0
    bad = tmp_path / "cfg.json"
    bad.write_text(json.dumps(doc))
    assert run(["simulate", "--config", str(bad)], capsys)[0] == 1
    assert run(["simulate", "--config", str(tmp_path / "nope.json")], capsys)[0] == 1
    assert run(["simulate", "--config", str(bad), "--jobs", "0"], capsys)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qnetalloc", "fidelity", "--fbar", "0.9", "--L", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(0.738222, abs=1e-6)
