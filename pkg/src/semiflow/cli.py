"""Batch front-end: ``semiflow --config suites.yaml [--format json] [--out report.json]``.

Exit status is 0 exactly when every suite passes.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .config import ConfigError, load_config
from .suites import run_suites

REPORT_VERSION = "1"

__all__ = ["emit_report", "main", "report_document"]


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


def report_document(reports, timing=False):
    return {"version": REPORT_VERSION,
            "reports": [_jsonable(r.to_dict(timing=timing)) for r in reports]}


def _text(reports, timing=False):
    lines = []
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        extra = f"  ({r.wall_time:.2f}s)" if timing and r.wall_time is not None else ""
        lines.append(f"{status}  {r.suite}{extra}")
        if r.error:
            lines.append(f"      error: {r.error}")
        for name, value in r.residuals.items():
            tol = r.tolerances[name]
            flag = "" if value <= tol else "  <-- exceeds"
            lines.append(f"      {name:<28} {value:12.4e}  tol {tol:9.2e}{flag}")
    passed = sum(r.passed for r in reports)
    lines.append(f"{passed}/{len(reports)} suites passed")
    return "\n".join(lines) + "\n"


def emit_report(reports, fmt="text", out=None, timing=False):
    """Write reports as ``json`` or ``text`` to ``out`` (a path) or stdout."""
    if fmt == "json":
        body = json.dumps(report_document(reports, timing), indent=2, sort_keys=False, allow_nan=True) + "\n"
    elif fmt == "text":
        body = _text(reports, timing)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out is None or out == "-":
        sys.stdout.write(body)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(body)


def _apply_override(cfg, text):
    target, _, value = text.partition("=")
    suite, _, key = target.rpartition(".")
    if key != "tol" or not suite or not value:
        raise ConfigError(f"--override expects SUITE.tol=VALUE, got {text!r}")
    try:
        tol = float(value)
    except ValueError:
        raise ConfigError(f"--override value is not a number: {value!r}") from None
    if not tol >= 0 or math.isnan(tol):
        raise ConfigError("--override tolerance must be non-negative")
    matched = False
    for i, entry in enumerate(cfg.suites):
        if entry.name == suite or str(i) == suite:
            entry.tol = tol
            matched = True
    if not matched:
        raise ConfigError(f"--override names no configured suite: {suite!r}")


def _parser():
    p = argparse.ArgumentParser(prog="semiflow", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="suite configuration (YAML)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--seed", type=int, default=None,
                   help="global seed (default: $SEMIFLOW_SEED, then the config, then 42)")
    p.add_argument("--parallel", type=int, default=1, help="worker threads")
    p.add_argument("--override", action="append", default=[], metavar="SUITE.tol=VALUE",
                   help="override a suite tolerance (repeatable; SUITE is a name or index)")
    p.add_argument("--timings", action="store_true", help="include wall times (breaks bit-identical output)")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for text in args.override:
            _apply_override(cfg, text)
    except (ConfigError, OSError) as exc:
        print(f"semiflow: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        seed = args.seed
    elif os.environ.get("SEMIFLOW_SEED"):
        seed = int(os.environ["SEMIFLOW_SEED"])
    elif cfg.seed is not None:
        seed = cfg.seed
    else:
        seed = 42
    reports = run_suites(cfg, max(1, args.parallel), seed)
    try:
        emit_report(reports, args.format, args.out, args.timings)
    except OSError as exc:
        print(f"semiflow: cannot write report: {exc}", file=sys.stderr)
        return 2
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
