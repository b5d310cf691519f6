"""Command line front end: ``isodrast verify | pair | flow``.

Exit codes: 0 success, 1 a property or gate failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

from . import flows, pairings
from .ambient import HamiltonianFn
from .errors import ExactnessError, IsodrastError, SchemaError, UnknownSuite
from .io import load_json, loop_from_dict
from .loops import MIN_SAMPLES, check_grid
from .suites import SUITE_NAMES, SuiteConfig, property_names, run_suite

PAIRINGS = ("weighted", "donaldson", "reduced", "momentum", "theta_momentum")


class ConfigError(Exception):
    pass


def _parse_tolerances(items, suite: str) -> dict:
    known = set(property_names(suite))
    short = {n.split(".", 1)[1] for n in known}
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tolerance expects name=value, got {item!r}")
        if name not in known and name not in short:
            raise ConfigError(f"unknown property {name!r} for suite {suite!r}")
        try:
            out[name] = float(value)
        except ValueError:
            raise ConfigError(f"tolerance {name} is not a number: {value!r}") from None
    return out


def build_report(suite: str, cfg: SuiteConfig, properties: list, timestamp: str = None) -> dict:
    return {
        "suite": suite,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "properties": properties,
        "pass": all(p["pass"] for p in properties),
        "tolerances": {p["name"]: p["gate"] for p in properties},
        "fd_step": cfg.fd_step,
        "metadata": {"timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat()},
    }


def cmd_verify(args) -> int:
    if args.suite not in SUITE_NAMES:
        raise UnknownSuite(args.suite)
    if args.samples < MIN_SAMPLES:
        raise ConfigError(f"--samples must be >= {MIN_SAMPLES}, got {args.samples}")
    check_grid(args.samples)
    if args.fd_step <= 0:
        raise ConfigError("--fd-step must be positive")
    cfg = SuiteConfig(args.seed, args.samples, args.fd_step, args.cases, _parse_tolerances(args.tolerance, args.suite))
    report = build_report(args.suite, cfg, run_suite(args.suite, cfg))
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0 if report["pass"] else 1


def cmd_pair(args) -> int:
    doc, text = load_json(args.input)
    loop, eta, (xi1, xi2) = loop_from_dict(doc, text)
    if args.pairing == "weighted":
        report = pairings.omega_weighted(loop, eta, xi1, xi2)
    elif args.pairing == "donaldson":
        report = pairings.omega_donaldson(loop, xi1.X, xi2.X, eta)
    elif args.pairing == "reduced":
        report = pairings.omega_reduced(loop, eta, xi1.X, xi2.X)
    elif args.pairing == "momentum":
        report = pairings.omega_momentum(loop, eta, xi1, xi2)
    else:
        report = pairings.theta_momentum(loop, eta, xi1)
    out = report.to_dict()
    print(json.dumps({"value": out["value"], "residuals": out["residuals"]}, indent=2))
    return 0


def cmd_flow(args) -> int:
    doc, text = load_json(args.input)
    loop, _, _ = loop_from_dict(doc, text)
    if args.hamiltonian == "radial":
        H = flows.radial_field
    else:
        H = HamiltonianFn.from_expr(args.hamiltonian, loop.half_dim)
    if args.steps < 1:
        raise ConfigError("--steps must be >= 1")
    traj = flows.flow_loop(loop, H, args.T, args.steps)
    drift = flows.isodrast_drift(traj)
    if args.out:
        prefix = Path(args.out)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        flows.write_trajectory_csv(traj, f"{prefix}_trajectory.csv")
        flows.write_action_csv(traj, f"{prefix}_action.csv")
    print(json.dumps({"drift": drift, "gate": args.drift_gate, "frames": len(traj)}))
    return 0 if drift <= args.drift_gate else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isodrast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a named property suite")
    v.add_argument("suite", help=f"one of {', '.join(SUITE_NAMES)}")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int, default=128)
    v.add_argument("--cases", type=int, default=10, help="random cases per property")
    v.add_argument("--tolerance", action="append", metavar="NAME=VALUE")
    v.add_argument("--fd-step", type=float, default=1e-4)
    v.add_argument("--out", help="also write the JSON report here")
    v.set_defaults(func=cmd_verify)

    p = sub.add_parser("pair", help="evaluate a pairing on a JSON loop file")
    p.add_argument("input")
    p.add_argument("--pairing", choices=PAIRINGS, default="weighted")
    p.set_defaults(func=cmd_pair)

    f = sub.add_parser("flow", help="flow a JSON loop and log action integrals")
    f.add_argument("input")
    f.add_argument("--hamiltonian", default="(q**2 + p**2)/2", help="expression in q, p or 'radial'")
    f.add_argument("--T", type=float, default=1.0)
    f.add_argument("--steps", type=int, default=100)
    f.add_argument("--out", help="CSV prefix")
    f.add_argument("--drift-gate", type=float, default=1e-5)
    f.set_defaults(func=cmd_flow)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ExactnessError as exc:
        print(json.dumps({"error": "exactness", "residual": exc.residual, "message": str(exc)}))
        return 1
    except SchemaError as exc:
        print(json.dumps({"error": "schema", "line": exc.line, "field": exc.field, "message": str(exc)}), file=sys.stderr)
        return 2
    except UnknownSuite as exc:
        print(f"unknown suite {exc.args[0]!r}; choose from {', '.join(SUITE_NAMES)}", file=sys.stderr)
        return 2
    except (ConfigError, IsodrastError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
