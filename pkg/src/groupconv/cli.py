"""Command-line driver.

Verbs:
  suite      run the identity suite over catalog groups
  blowup     shrinking-bump divergence of the mixed seminorm
  unbounded  the linear-growth family at fixed factor norms
  constant   the limiting prefactor of the blow-up bound

Every verb accepts --format/--out to emit JSON or CSV, --config for a
key=value config file, and -D key=value overrides.  Exit status is 0 iff
every pass flag in the produced report is true.
"""

from __future__ import annotations

import argparse
import sys

from .config import DEFAULT_CONFIG, apply_config_entries, load_config_file
from .errors import GroupConvError
from .experiments import (ExperimentConfig, run_blowup, run_identity_suite,
                          run_limit_constant, run_unbounded_family)
from .reporting import emit, render_json


def _add_common(p):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("-D", "--define", action="append", default=[],
                   metavar="KEY=VALUE", help="config override")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output path (default: stdout, json)")
    p.add_argument("--seed", type=int, default=7)


def build_parser():
    ap = argparse.ArgumentParser(prog="groupconv",
                                 description="group convolution experiments")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("suite", help="identity/bound suite")
    p.add_argument("--groups", default="Rn:1,Rn:2,affine,heisenberg",
                   help="comma-separated catalog ids")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--pairs", type=int, default=20)
    _add_common(p)

    p = sub.add_parser("blowup", help="blow-up exponent experiment")
    p.add_argument("--group", default="Rn:1")
    p.add_argument("-r", type=int, default=0)
    p.add_argument("-s", type=int, default=0)
    p.add_argument("-n", type=int, default=2)
    p.add_argument("--tmin", type=float, default=2.0 ** -8)
    p.add_argument("--tmax", type=float, default=2.0 ** -1)
    p.add_argument("--tcount", type=int, default=8)
    p.add_argument("--fit-count", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("unbounded", help="unbounded family experiment")
    p.add_argument("--group", default="Rn:1")
    _add_common(p)

    p = sub.add_parser("constant", help="blow-up limit constant")
    p.add_argument("--group", default="Rn:1")
    p.add_argument("-n", type=int, default=2)
    _add_common(p)

    return ap


def _numerics_from_args(args):
    cfg = DEFAULT_CONFIG
    entries = {}
    if args.config:
        entries.update(load_config_file(args.config))
    for item in args.define:
        key, _, val = item.partition("=")
        entries[key.strip()] = val.strip()
    if entries:
        cfg = apply_config_entries(cfg, entries)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _numerics_from_args(args)
        if args.verb == "suite":
            groups = [g for g in args.groups.split(",") if g]
            report = run_identity_suite(groups, tolerance=args.tol,
                                        pairs=args.pairs, seed=args.seed,
                                        cfg=cfg)
        elif args.verb == "blowup":
            config = ExperimentConfig(group_id=args.group, r=args.r, s=args.s,
                                      n=args.n, t_min=args.tmin,
                                      t_max=args.tmax, t_count=args.tcount,
                                      fit_count=args.fit_count,
                                      seed=args.seed, numerics=cfg)
            report = run_blowup(config)
        elif args.verb == "unbounded":
            config = ExperimentConfig(group_id=args.group, seed=args.seed,
                                      numerics=cfg)
            report = run_unbounded_family(config)
        else:
            config = ExperimentConfig(group_id=args.group, n=args.n,
                                      seed=args.seed, numerics=cfg)
            report = run_limit_constant(config)
    except GroupConvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.out:
        emit(report, args.format, args.out)
        print(f"wrote {args.format} report to {args.out}")
    else:
        sys.stdout.write(render_json(report))
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
