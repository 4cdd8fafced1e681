"""Command line entry point: ``ess <subcommand> [--config PATH] [--out DIR] ...``.

Exit codes: 0 all checks passed, 1 a validation check failed, 2 configuration
error, 3 runtime or solver error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from .config import default_config, load_config, schema_json
from .errors import ConfigError, EssError, SchemaError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("ess")


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("ESS_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"ESS_THREADS must be an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ess", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log every check and progress")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="experiment JSON (defaults apply when omitted)")
        sp.add_argument("--out", help="output directory (overrides output.directory)")
        sp.add_argument("--threads", type=int, help="worker threads (also ESS_THREADS)")

    common(sub.add_parser("validate-geometry", help="projection, Jacobian, exteriority, involution"))
    common(sub.add_parser("validate-keylemma", help="Key Lemma residuals, outflow, Lambda scaling"))
    g = sub.add_parser("run-growth", help="evolve omega and march the markers")
    common(g)
    g.add_argument("--model-field", help="synthetic u1 instead of the evolved field, "
                                         "e.g. xlogx:1.0, linear:2, constant:1e-3")
    e = sub.add_parser("emit-plots", help="gnuplot-ready series from trace or report CSVs")
    e.add_argument("inputs", nargs="+", help="growth trace, residual or lambda-scaling CSV files")
    e.add_argument("--out", required=True, help="directory for .dat files and the summary")
    sub.add_parser("print-schema", help="print the configuration JSON schema")
    return p


def _load(args):
    return load_config(args.config) if args.config else default_config()


def _finish(cfg, out, reports, started) -> int:
    from .suites import write_manifest

    write_manifest(cfg, out, reports, started)
    for r in reports:
        for c in r.checks:
            print(c.line())
        for w in r.warnings:
            print(f"[WARN] {w}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    started = time.time()
    try:
        if args.command == "print-schema":
            print(schema_json())
            return EXIT_OK
        if args.command == "emit-plots":
            from .plots import emit_plots

            summary = emit_plots(args.inputs, args.out)
            for f in summary["files"]:
                print(f)
            return EXIT_OK
        cfg = _load(args)
        threads = _threads(args)
        out = args.out or cfg["output"]["directory"]
        from . import suites

        if args.command == "validate-geometry":
            reps = [suites.validate_geometry(cfg, out)]
        elif args.command == "validate-keylemma":
            reps = [suites.validate_keylemma(cfg, out, threads)]
        else:
            if args.model_field:
                reps = [suites.run_model_growth(cfg, args.model_field, out)]
            else:
                geo = suites.validate_geometry(cfg, out)
                if not geo.passed:
                    print("geometry suite failed; not starting the growth run", file=sys.stderr)
                    return _finish(cfg, out, [geo], started)
                reps = [geo, suites.run_growth(cfg, out, threads, progress=args.verbose)]
        return _finish(cfg, out, reps, started)
    except (ConfigError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EssError as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
