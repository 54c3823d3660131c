"""Command line entry point.

    maskabm run <config> [--seed S] [--replicates R] [--out DIR] [--workers W]
    maskabm validate <config>
    maskabm calibrate <config>
    maskabm presets list

``<config>`` is a YAML path or the name of a shipped preset. Exit codes:
0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import list_presets, load_config, validate_config
from .errors import CalibrationError, ConfigurationError, MaskABMError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _parser():
    p = argparse.ArgumentParser(prog="maskabm", description=__doc__.splitlines()[0] if __doc__ else None)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its artifacts")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--replicates", type=int)
    run.add_argument("--out")
    run.add_argument("--workers", type=int, default=1)

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")

    cal = sub.add_parser("calibrate", help="build and calibrate the network only")
    cal.add_argument("config")
    cal.add_argument("--seed", type=int)

    pre = sub.add_parser("presets", help="shipped scenario presets")
    pre.add_argument("action", choices=["list"])
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "presets":
            print("\n".join(list_presets()))
            return EXIT_OK
        if args.command == "validate":
            errors = validate_config(args.config)
            if errors:
                for e in errors:
                    print(f"error: {e}", file=sys.stderr)
                return EXIT_CONFIG
            print("ok")
            return EXIT_OK

        cfg = load_config(args.config)
        if args.command == "calibrate":
            from .runner import prepare_network

            if args.seed is not None:
                cfg = cfg.replace(seed=args.seed)
            g, result = prepare_network(cfg)
            print(json.dumps({"n_nodes": g.n_nodes, "n_edges": g.n_edges, **result.to_dict()}, indent=2))
            return EXIT_OK

        from .runner import run_scenario

        res = run_scenario(cfg, out_dir=args.out, replicates=args.replicates, seed=args.seed, workers=args.workers)
        print(res.out_dir)
        return EXIT_OK
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CalibrationError, MaskABMError, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
