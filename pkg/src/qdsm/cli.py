"""``qdsm`` command line: phantom, synthesize, invert, pipeline, validate.

Exit status: 0 success, 2 configuration error, 3 numerical failure, 1 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import RunConfig
from .errors import ConfigError, QDSMError, StageError
from .pipeline import run_invert, run_phantom, run_pipeline, run_synthesize

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = {
    "phantom": (run_phantom, "rasterize the phantom on the sampling grid and render it"),
    "synthesize": (run_synthesize, "write the (noisy) backscattering measurement matrix"),
    "invert": (run_invert, "read measurements and write the reconstruction"),
    "pipeline": (run_pipeline, "all stages plus error report and manifest"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdsm", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log stage progress")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, text) in COMMANDS.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="dotted override, e.g. noise.delta=0.05")
    p = sub.add_parser("validate", help="run the built-in oracle suite")
    p.add_argument("--config", help="optional; its output_dir receives validate.json")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return ap


def _validate(args) -> int:
    from .validate import run_checks

    results = run_checks()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    if args.config:
        cfg = RunConfig.load(args.config, args.overrides)
        out = Path(cfg.output_dir) / "validate.json"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps([{"check": n, "passed": ok, "detail": d}
                                   for n, ok, d in results], indent=2) + "\n")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            return _validate(args)
        cfg = RunConfig.load(args.config, args.overrides)
        manifest = COMMANDS[args.command][0](cfg)
    except ConfigError as exc:
        print(f"qdsm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"qdsm: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc.cause, OSError) else EXIT_NUMERIC
    except QDSMError as exc:
        print(f"qdsm: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"qdsm: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(manifest['artifacts'])} artifacts to {cfg.output_dir}")
    if "errors" in manifest:
        e = manifest["errors"]["re"]
        print(f"rel_l2(Re) = {e['rel_l2']:.6g}  rel_linf(Re) = {e['rel_linf']:.6g}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
