"""Command-line interface.

Subcommands:
    run      --config <path> [--out <dir>] [--workers N]
    diag     --config <path>
    presets  list | dump <name>

Exit codes: 0 success, 2 config error, 3 io error, 4 all trials of some
algorithm diverged.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .core import make_rng
from .diag import ESTIMATOR_TAGS, estimator_moments
from .envs import make_environment
from .errors import ConfigError
from .harness import _fmt, load_config, run_experiment
from .presets import PRESET_NAMES, dump_preset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perfdfo")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True, help="path to a JSON experiment config")
    run.add_argument("--out", default=None, help="output directory (overrides config)")
    run.add_argument("--workers", type=int, default=1, help="concurrent trial processes")

    diag = sub.add_parser("diag", help="run estimator diagnostics")
    diag.add_argument("--config", required=True, help="path to a JSON diagnostics config")

    presets = sub.add_parser("presets", help="list or dump built-in experiment configs")
    presets_sub = presets.add_subparsers(dest="presets_command", required=True)
    presets_sub.add_parser("list", help="list preset names")
    dump = presets_sub.add_parser("dump", help="print a preset config as JSON")
    dump.add_argument("name")

    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = run_experiment(cfg, out_dir=args.out, workers=args.workers)
    print(f"wrote {len(result.files)} files to {result.output_dir}")
    print(f"manifest: {result.manifest_path}")
    if result.all_diverged:
        print(f"all trials diverged for: {', '.join(result.all_diverged)}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _cmd_diag(args) -> int:
    path = Path(args.config)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"diag config {path} is not valid JSON: {exc}") from exc
    env_doc = doc.get("environment")
    if not env_doc or "tag" not in env_doc:
        raise ConfigError("diag config needs an environment with a tag (field: environment)")
    env = make_environment(env_doc["tag"], env_doc.get("params", {}))
    theta = np.asarray(doc.get("theta", np.zeros(env.dim)), dtype=float)
    if theta.shape != (env.dim,):
        raise ConfigError(f"theta has length {theta.size}, environment has dim {env.dim}")
    deltas = [float(x) for x in doc.get("deltas", [1.0])]
    estimators = doc.get("estimators", list(ESTIMATOR_TAGS))
    for tag in estimators:
        if tag not in ESTIMATOR_TAGS:
            raise ConfigError(f"unknown estimator tag {tag!r} (field: estimators)")
    n = int(doc.get("n", 100_000))
    seed = int(doc.get("seed", 0))
    out = doc.get("output")
    if not out:
        raise ConfigError("diag config needs an output CSV path (field: output)")

    header = ["estimator", "delta", "n", "cov_trace"]
    header += [f"mean_{j}" for j in range(env.dim)]
    header += [f"se_{j}" for j in range(env.dim)]
    lines = [",".join(header)]
    for tag in estimators:
        for delta in deltas:
            report = estimator_moments(env, theta, delta, n, tag, make_rng(seed))
            row = [tag, _fmt(delta), str(report.sample_count), _fmt(report.cov_trace)]
            row += [_fmt(v) for v in report.mean_vector]
            row += [_fmt(v) for v in report.se_vector]
            lines.append(",".join(row))
    out_path = Path(out)
    if out_path.parent != Path(""):
        out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {out_path}")
    return EXIT_OK


def _cmd_presets(args) -> int:
    if args.presets_command == "list":
        for name in PRESET_NAMES:
            print(name)
        return EXIT_OK
    sys.stdout.write(dump_preset(args.name))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "diag":
            return _cmd_diag(args)
        if args.command == "presets":
            return _cmd_presets(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
