"""``entcost`` command line: single bounds and experiment drivers.

Exit codes: 0 success, 2 validation error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .. import bounds, channels
from ..conic.backends import backend_name
from ..qcore import SolverError, ValidationError
from . import experiments
from .io import read_channel, read_state

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3

CHANNEL_BOUNDS = ("channel_cost_lb", "bipartite_channel_cost_lb")


def _parse_value(tok):
    for cast in (int, float):
        try:
            return cast(tok)
        except ValueError:
            pass
    return tok


def parse_grid(items) -> dict:
    """``key=v1,v2,...`` or ``key=start:stop:num`` (inclusive linspace)."""
    grid = {}
    for item in items or []:
        if "=" not in item:
            raise ValidationError(f"grid entry {item!r} must look like key=v1,v2")
        key, val = item.split("=", 1)
        if val.count(":") == 2:
            try:
                a, b, n = float(val.split(":")[0]), float(val.split(":")[1]), int(val.split(":")[2])
            except ValueError:
                raise ValidationError(f"grid {key!r}: expected start:stop:num, got {val!r}") from None
            if n < 1:
                raise ValidationError(f"grid {key!r} needs at least one point")
            step = (b - a) / max(n - 1, 1)
            grid[key] = [round(a + i * step, 12) for i in range(n)]
        else:
            vals = [_parse_value(t) for t in val.split(",") if t != ""]
            if not vals:
                raise ValidationError(f"grid {key!r} is empty")
            grid[key] = vals
    return grid


def _dims(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ValidationError(f"--dims must be comma separated integers, got {text!r}") from None


def cmd_bound(args) -> int:
    state_names = sorted(bounds.STATE_BOUNDS)
    if args.state:
        if args.bound not in bounds.STATE_BOUNDS:
            raise ValidationError(f"unknown state bound {args.bound!r}; available: {', '.join(state_names)}")
        res = bounds.STATE_BOUNDS[args.bound](read_state(args.state))
    else:
        names = list(CHANNEL_BOUNDS) + state_names
        if args.bound not in names:
            raise ValidationError(f"unknown channel bound {args.bound!r}; available: {', '.join(names)}")
        ch = read_channel(args.channel)
        if args.bound == "channel_cost_lb":
            res = channels.channel_cost_lb(ch)
        elif args.bound == "bipartite_channel_cost_lb":
            if not args.dims:
                raise ValidationError("bipartite_channel_cost_lb needs --dims dA,dB,dA_out,dB_out")
            res = channels.bipartite_channel_cost_lb(ch, _dims(args.dims))
        else:
            res = channels.choi_bound(ch, args.bound, _dims(args.dims) if args.dims else None)
    if args.json:
        print(json.dumps(res.to_dict(), default=float))
    else:
        print(f"{res.name}: value={res.value_bits:.4f} bits  gap={res.gap:.2e}  status={res.status}")
    return EXIT_OK if res.ok else EXIT_SOLVER


def cmd_experiment(args) -> int:
    spec = experiments.ExperimentSpec(args.name, parse_grid(args.grid), seed=args.seed, out=args.out,
                                      plot=args.plot, workers=args.workers)
    result = experiments.run(spec)
    print(f"{spec.name}: {len(result.rows)} rows written to {os.path.join(args.out, spec.name + '.csv')}")
    for k, v in result.meta.items():
        if k not in ("grid", "experiment", "seed"):
            print(f"  {k}: {v}")
    failed = [r for r in result.rows if r.status.startswith("solver_failure")]
    if failed:
        print(f"{len(failed)} rows recorded a solver failure", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entcost", description="Entanglement-cost lower bounds.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="evaluate one bound on a state or channel file")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", help="state JSON file")
    src.add_argument("--channel", help="channel JSON file (Kraus record or named shorthand)")
    b.add_argument("--bound", required=True, help="bound name")
    b.add_argument("--dims", help="dA,dB,dA_out,dB_out for bipartite channels")
    b.add_argument("--json", action="store_true", help="print the full result as JSON")
    b.set_defaults(func=cmd_bound)

    e = sub.add_parser("experiment", help="run an experiment driver")
    e.add_argument("name", choices=sorted(experiments.EXPERIMENTS))
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default="results")
    e.add_argument("--grid", action="append", metavar="KEY=VALUES",
                   help="override a grid entry, e.g. p=0,0.01 or t_steps=10 or x=0:1:11")
    e.add_argument("--plot", action="store_true", help="also write an SVG plot")
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        backend_name()
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
