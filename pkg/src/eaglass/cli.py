"""Command-line entry point.

One subcommand per experiment kind.  Values are resolved in priority order
flag > config file > environment > default.  Exit codes: 0 all hard
assertions pass, 1 configuration error, 2 hard assertion failure (the
reproducer line is printed to stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError, HardAssertionFailure
from .lab import EXPERIMENT_KINDS, ExperimentConfig, run

_KIND_FLAG = {kind: kind.replace("_", "-") for kind in EXPERIMENT_KINDS}
_FLAG_KIND = {v: k for k, v in _KIND_FLAG.items()}


def _int_list(text: str):
    return [int(x) for x in text.split(",") if x != ""]


def _pair_list(text: str):
    pairs = []
    for chunk in text.split(","):
        a, _, b = chunk.partition(":")
        pairs.append([int(a), int(b)])
    return pairs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eaglass",
        description="Exact spin-glass ground-state experiments on cylinder boxes")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(_KIND_FLAG[kind], help=f"run the {kind} experiment")
        p.add_argument("--config", help="JSON config file (versioned schema)")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--samples", type=int, help="number of disorder samples")
        p.add_argument("--out", help="output path prefix")
        p.add_argument("--parallel", type=int, help="worker processes")
        p.add_argument("--width", type=int)
        p.add_argument("--height", type=int)
        p.add_argument("--box-n", type=int,
                       help="use the square box of half-width n (width=height=2n+1)")
        p.add_argument("--dist", choices=["gaussian", "uniform_symmetric"])
        p.add_argument("--sigma", type=float)
        p.add_argument("--half-width", type=float)
        p.add_argument("--edge", help="edge as kind:col,row e.g. h:0,0")
        p.add_argument("--edge2", help="second edge for two-bond experiments")
        p.add_argument("--grid-lo", type=float)
        p.add_argument("--grid-hi", type=float)
        p.add_argument("--grid-points", type=int)
        p.add_argument("--n-list", type=_int_list, help="comma separated")
        p.add_argument("--k-list", type=_int_list, help="comma separated")
        p.add_argument("--n-pairs", type=_pair_list, help="e.g. 2:3,3:4")
        p.add_argument("--window", help="window as WxH, e.g. 3x2")
        p.add_argument("--proxy", choices=["excited_pair", "nested_volumes",
                                           "perturbed_exterior"])
        p.add_argument("--band-height", type=int)
        p.add_argument("--probes", type=int)
        p.add_argument("--tol", type=float)
    return parser


def _config_from_args(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config file must contain a JSON object")
    kind = _FLAG_KIND[args.command]
    if cfg.get("kind", kind) != kind:
        raise ConfigError(f"config file is for kind {cfg['kind']!r}, "
                          f"but subcommand is {kind}")
    cfg["kind"] = kind

    env_out = os.environ.get("EAGLASS_OUT")
    if env_out and "out" not in cfg:
        cfg["out"] = os.path.join(env_out, kind)
    env_par = os.environ.get("EAGLASS_PARALLEL")
    if env_par and "parallel" not in cfg:
        try:
            cfg["parallel"] = int(env_par)
        except ValueError:
            raise ConfigError("EAGLASS_PARALLEL must be an integer") from None

    if args.box_n is not None:
        cfg["width"] = cfg["height"] = 2 * args.box_n + 1
    simple = {"seed": "master_seed", "samples": "samples", "out": "out",
              "parallel": "parallel", "width": "width", "height": "height",
              "edge": "edge", "edge2": "edge2", "grid_lo": "grid_lo",
              "grid_hi": "grid_hi", "grid_points": "grid_points",
              "n_list": "n_list", "k_list": "k_list", "n_pairs": "n_pairs",
              "proxy": "proxy", "band_height": "band_height",
              "probes": "probes", "tol": "tol"}
    for attr, key in simple.items():
        val = getattr(args, attr)
        if val is not None:
            cfg[key] = val
    if args.window:
        w, _, h = args.window.partition("x")
        try:
            cfg["window_width"], cfg["window_height"] = int(w), int(h)
        except ValueError:
            raise ConfigError(f"bad window spec {args.window!r}") from None
    if args.dist or args.sigma is not None or args.half_width is not None:
        dist = dict(cfg.get("dist", {"kind": args.dist or "gaussian"}))
        if args.dist:
            dist["kind"] = args.dist
        if args.sigma is not None:
            dist["sigma"] = args.sigma
        if args.half_width is not None:
            dist["half_width"] = args.half_width
        cfg["dist"] = dist
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = ExperimentConfig.from_dict(_config_from_args(args))
        report = run(config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except HardAssertionFailure as e:
        print(f"hard assertion failure: {e}", file=sys.stderr)
        if e.reproducer:
            print(f"REPRODUCER {e.reproducer}", file=sys.stderr)
        return 2
    summary = report.summary_dict()
    print(json.dumps({"kind": summary["kind"],
                      "n_samples": summary["n_samples"],
                      "content_hash": summary["content_hash"],
                      "properties": summary["properties"],
                      "summary_path": report.summary_path}, indent=1))
    return 0


if __name__ == "__main__":
    sys.exit(main())
