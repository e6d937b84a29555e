"""Command line front end.

    moutard run CONFIG [--check-only]
    moutard verify NAME=PATH ... --eq TAG
    moutard example NAME [--param k=v ...] [--write PATH] [--run]
    moutard list

Exit status: 0 when every requested check passes, 1 on a verification
failure, 2 on an invalid config or arguments.
"""
from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from .errors import MoutardError, SignatureError
from .examples import list_examples, make_example
from .field import read_field
from .pipeline import DEFAULT_MAX_DEPTH, ConfigError, PipelineConfig, check_outputs, load_config, run_pipeline
from .verify import EQUATIONS, residual

__all__ = ["main", "build_parser"]


def _common(p):
    p.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every default tolerance")
    p.add_argument("--singular-mode", action="store_true", help="mask zeros of divisors instead of failing")
    p.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH, help="cap on transform steps")
    p.add_argument("--jobs", type=int, default=1, help="threads for independent verification reports")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moutard", description="Moutard transforms for conductivity equations")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a pipeline config")
    run.add_argument("config")
    run.add_argument("--check-only", action="store_true", help="re-verify existing outputs without recomputing")
    _common(run)

    ver = sub.add_parser("verify", help="residual of one equation on field files")
    ver.add_argument("fields", nargs="+", metavar="NAME=PATH")
    ver.add_argument("--eq", required=True, choices=sorted(EQUATIONS))
    ver.add_argument("--report", help="also write the JSON report here")
    _common(ver)

    ex = sub.add_parser("example", help="emit (and optionally run) a named example config")
    ex.add_argument("name")
    ex.add_argument("--param", action="append", default=[], metavar="K=V")
    ex.add_argument("--write", help="config path (default: print to stdout)")
    ex.add_argument("--run", action="store_true", help="run the config after writing it")
    _common(ex)

    sub.add_parser("list", help="list named examples")
    return parser


def _pairs(items, what):
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"{what} must look like NAME=VALUE, got {item!r}")
        out[key] = value
    return out


def _params(items):
    params = {}
    for key, value in _pairs(items, "--param").items():
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


def _report_run(result):
    for rep in result.reports:
        print(rep.line())
    for msg in result.messages:
        print(msg, file=sys.stderr)
    return result.status


def _cmd_run(args):
    cfg = load_config(args.config)
    kw = dict(tolerance_scale=args.tolerance_scale, max_depth=args.max_depth, jobs=args.jobs)
    if args.check_only:
        result = check_outputs(cfg, **kw)
    else:
        result = run_pipeline(cfg, singular=args.singular_mode or None, **kw)
    return _report_run(result)


def _cmd_verify(args):
    paths = _pairs(args.fields, "field argument")
    inputs = {name: read_field(path) for name, path in paths.items()}
    rep = residual(args.eq, tolerance_scale=args.tolerance_scale, **inputs)
    print(rep.line())
    if args.report:
        Path(args.report).write_text(rep.to_json() + "\n")
    return 0 if rep.passed else 1


def _cmd_example(args):
    config = make_example(args.name, _params(args.param))
    text = json.dumps(config, indent=2, sort_keys=True) + "\n"
    if args.write:
        path = Path(args.write)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    elif not args.run:
        sys.stdout.write(text)
    if not args.run:
        return 0
    if args.write:
        cfg = load_config(args.write)
    else:
        cfg = PipelineConfig.from_dict(config, root=tempfile.mkdtemp(prefix="moutard-"))
        print(f"output: {cfg.output}")
    result = run_pipeline(cfg, tolerance_scale=args.tolerance_scale, singular=args.singular_mode or None,
                          max_depth=args.max_depth, jobs=args.jobs)
    return _report_run(result)


def _cmd_list(args):
    for name, desc in list_examples().items():
        print(f"{name:12s} {desc}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "verify": _cmd_verify, "example": _cmd_example, "list": _cmd_list}[args.command]
    try:
        return handler(args)
    except (ConfigError, SignatureError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MoutardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
