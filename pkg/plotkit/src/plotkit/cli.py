"""plotkit CLI: render benchmark panels from experiment manifests.

Usage:
    plotkit plot --manifest out/quartic/manifest.json --preset quartic --out fig.png
    plotkit plot --manifest out/quartic/manifest.json \
                 --manifest out/pricing/manifest.json \
                 --manifest out/regression/manifest.json \
                 --preset figure1 --out figure1.png
"""

from __future__ import annotations

import argparse
import sys

from .panels import PlotDataError, render_figure
from .presets import PANEL_PRESETS, load_manifest, panels_for_preset


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotkit")
    sub = parser.add_subparsers(dest="command", required=True)
    plot = sub.add_parser("plot", help="render a preset figure from experiment manifests")
    plot.add_argument(
        "--manifest",
        action="append",
        required=True,
        help="path to an experiment manifest.json (repeat for figure1)",
    )
    plot.add_argument("--preset", required=True, choices=PANEL_PRESETS)
    plot.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        manifests = [load_manifest(p) for p in args.manifest]
        specs = panels_for_preset(args.preset, manifests)
        out = render_figure(specs, args.out)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
