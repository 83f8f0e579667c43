"""Command-line interface.

Exit codes: 0 success, 1 data or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .allocation import Policy, PolicyConfig, AllocationError, allocate
from .fidelity import DomainError, Ops, SwapChainParams, fidelity_generic, max_intermediate_repeaters
from .harness import ConfigError, load_config, metrics_csv, run_experiment
from .topology import ValidationError, build_grid, generate_random, load_network, save_network
from .traffic import load_apps

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _grid_dims(text: str) -> tuple[int, int]:
    try:
        rows, cols = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROWSxCOLS, got {text!r}") from None
    if rows < 1 or cols < 1:
        raise argparse.ArgumentTypeError(f"grid dimensions must be >= 1, got {text!r}")
    return rows, cols


def _policy(text: str) -> Policy:
    try:
        return PolicyConfig.parse(text).policy
    except AllocationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def cmd_topo(args) -> int:
    if args.topo_cmd == "validate":
        try:
            net = load_network(_read(args.input))
        except ValidationError as exc:
            print(f"invalid network: {exc}", file=sys.stderr)
            return EXIT_DATA
        _emit(args, json.dumps({"valid": True, "nodes": len(net.nodes), "links": len(net.links)}))
        return EXIT_OK

    try:
        if args.grid:
            rows, cols = args.grid
            net = build_grid(rows, cols, args.capacity, args.fidelity, args.interior_repeaters)
        else:
            net = generate_random(args.seed, args.random, args.edge_prob,
                                  tuple(args.capacity_range or (args.capacity,) * 2),
                                  tuple(args.fidelity_range or (args.fidelity,) * 2))
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, save_network(net))
    return EXIT_OK


def cmd_fidelity(args) -> int:
    try:
        if args.invert:
            if args.fmin is None:
                raise UsageError("--invert needs --fmin")
            limit = max_intermediate_repeaters(args.fbar, args.fmin)
            if args.format == "json":
                _emit(args, json.dumps({"reach": limit.reach.value, "l_max": limit.l_max}))
            else:
                _emit(args, str(limit))
            return EXIT_OK
        params = SwapChainParams(args.fbar, args.L, args.p1, args.p2, args.eta)
        value = fidelity_generic(params)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        _emit(args, json.dumps({"fbar": args.fbar, "L": args.L, "p1": args.p1, "p2": args.p2,
                                "eta": args.eta, "fidelity": value}))
    else:
        _emit(args, f"{value:.12g}")
    return EXIT_OK


def cmd_allocate(args) -> int:
    try:
        ops = Ops(args.p1, args.p2, args.eta)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    try:
        net = load_network(_read(args.network))
        apps = load_apps(_read(args.apps), net)
        alloc = allocate(net, apps, args.policy, ops, args.k)
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_DATA
    doc = alloc.to_dict()
    doc["policy"] = args.policy.value
    _emit(args, json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_DATA
    rows = run_experiment(cfg, jobs=args.jobs)
    if args.format == "json":
        _emit(args, json.dumps([r.__dict__ for r in rows], indent=2, default=str))
    else:
        _emit(args, metrics_csv(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", default=argparse.SUPPRESS,
                        help="output file (default: stdout)")
    common.add_argument("--format", choices=["json", "csv", "text"], default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="qnetalloc", description=__doc__.splitlines()[0])
    parser.add_argument("--output", "-o", default="-", help="output file (default: stdout)")
    parser.add_argument("--format", choices=["json", "csv", "text"], default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    topo = sub.add_parser("topo", help="generate or validate network files")
    topo_sub = topo.add_subparsers(dest="topo_cmd", required=True)
    gen = topo_sub.add_parser("generate", parents=[common], help="write a network JSON")
    shape = gen.add_mutually_exclusive_group(required=True)
    shape.add_argument("--grid", type=_grid_dims, metavar="ROWSxCOLS")
    shape.add_argument("--random", type=int, metavar="N", help="Erdos-Renyi graph on N nodes")
    gen.add_argument("--capacity", type=float, default=10.0, help="EPR pairs per second")
    gen.add_argument("--fidelity", type=float, default=0.95)
    gen.add_argument("--interior-repeaters", action="store_true")
    gen.add_argument("--edge-prob", type=float, default=0.3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--capacity-range", type=float, nargs=2, metavar=("LO", "HI"))
    gen.add_argument("--fidelity-range", type=float, nargs=2, metavar=("LO", "HI"))
    val = topo_sub.add_parser("validate", parents=[common], help="check a network JSON")
    val.add_argument("--input", required=True)

    fid = sub.add_parser("fidelity", parents=[common], help="repeater chain fidelity")
    fid.add_argument("--fbar", type=float, required=True, help="elementary link fidelity")
    fid.add_argument("--L", type=int, default=0, help="number of intermediate repeaters")
    fid.add_argument("--p1", type=float, default=1.0)
    fid.add_argument("--p2", type=float, default=1.0)
    fid.add_argument("--eta", type=float, default=1.0)
    fid.add_argument("--invert", action="store_true",
                     help="print the largest L meeting --fmin (perfect operations)")
    fid.add_argument("--fmin", type=float)

    alloc = sub.add_parser("allocate", parents=[common], help="allocate link rates to apps")
    alloc.add_argument("--network", required=True)
    alloc.add_argument("--apps", required=True)
    alloc.add_argument("--policy", type=_policy, default=Policy.MAX_MIN,
                       help="one of: " + ", ".join(p.value for p in Policy))
    alloc.add_argument("--k", type=int, default=4, help="candidate paths per demand")
    alloc.add_argument("--p1", type=float, default=1.0)
    alloc.add_argument("--p2", type=float, default=1.0)
    alloc.add_argument("--eta", type=float, default=1.0)

    sim = sub.add_parser("simulate", parents=[common], help="run a simulation campaign")
    sim.add_argument("--config", required=True)
    sim.add_argument("--jobs", type=int, default=1)
    return parser


COMMANDS = {"topo": cmd_topo, "fidelity": cmd_fidelity, "allocate": cmd_allocate,
            "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "allocate" and args.k < 1:
        parser.error("--k must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
