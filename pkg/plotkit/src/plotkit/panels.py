"""Panel rendering from aggregate experiment CSVs.

A PanelSpec names the input curves (CSV path + label), the x/y columns, an
optional +-1 std band column, axis scales, and reference lines. Rendering is
deterministic: fixed figure geometry, the Agg backend, and pinned PNG
metadata, so identical inputs produce identical bytes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["CurveSpec", "PanelSpec", "PlotDataError", "RefLine", "render_figure", "render_panel"]

_PNG_METADATA = {"Software": "plotkit"}
_FIG_DPI = 120


class PlotDataError(ValueError):
    """Input CSV missing, empty, or lacking a referenced column."""


@dataclass(frozen=True)
class CurveSpec:
    csv_path: Path
    label: str


@dataclass(frozen=True)
class RefLine:
    value: float
    label: str


@dataclass(frozen=True)
class PanelSpec:
    curves: tuple[CurveSpec, ...]
    x_column: str
    y_column: str
    band_column: str | None = None
    y_sign: float = 1.0
    log_x: bool = False
    log_y: bool = False
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    ref_lines: tuple[RefLine, ...] = field(default_factory=tuple)


def read_columns(path: Path, columns: list[str]) -> dict[str, np.ndarray]:
    """Read the named CSV columns as float arrays (empty cells become NaN)."""
    path = Path(path)
    if not path.exists():
        raise PlotDataError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise PlotDataError(f"column {col!r} not in {path} (header: {', '.join(header)})")
        rows = list(reader)
    if not rows:
        raise PlotDataError(f"no data rows in {path}")
    out = {}
    for col in columns:
        out[col] = np.array(
            [float(r[col]) if r[col] not in ("", None) else np.nan for r in rows]
        )
    return out


def _draw_panel(ax, spec: PanelSpec) -> None:
    if not spec.curves:
        raise PlotDataError("panel has no curves")
    for curve in spec.curves:
        cols = [spec.x_column, spec.y_column]
        if spec.band_column:
            cols.append(spec.band_column)
        data = read_columns(Path(curve.csv_path), cols)
        x = data[spec.x_column]
        y = spec.y_sign * data[spec.y_column]
        keep = np.isfinite(x) & np.isfinite(y)
        if spec.log_x:
            keep &= x > 0
        if spec.log_y:
            keep &= y > 0
        x, y = x[keep], y[keep]
        if x.size == 0:
            raise PlotDataError(f"no plottable points for {curve.label} in {curve.csv_path}")
        (line,) = ax.plot(x, y, label=curve.label, linewidth=1.4)
        if spec.band_column:
            band = data[spec.band_column][keep]
            lo, hi = y - band, y + band
            if spec.log_y:
                lo = np.maximum(lo, np.min(y) * 1e-3)
            ax.fill_between(x, lo, hi, color=line.get_color(), alpha=0.18, linewidth=0)
    for ref in spec.ref_lines:
        ax.axhline(ref.value, color="black", linestyle="--", linewidth=1.0, label=ref.label)
    if spec.log_x:
        ax.set_xscale("log")
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_title(spec.title)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)


def render_figure(specs: list[PanelSpec], out_path: str | Path) -> Path:
    """Render one or more panels side by side and write the image file."""
    if not specs:
        raise PlotDataError("no panels to render")
    out_path = Path(out_path)
    fig, axes = plt.subplots(
        1, len(specs), figsize=(5.0 * len(specs), 3.8), dpi=_FIG_DPI, squeeze=False
    )
    try:
        for ax, spec in zip(axes[0], specs):
            _draw_panel(ax, spec)
        fig.tight_layout()
        out_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out_path, metadata=_PNG_METADATA)
    finally:
        plt.close(fig)
    return out_path


def render_panel(spec: PanelSpec, out_path: str | Path) -> Path:
    """Render a single panel to an image file."""
    return render_figure([spec], out_path)
