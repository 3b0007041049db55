"""Preset panels wired from experiment manifests.

Each experiment directory's ``manifest.json`` names the per-algorithm
aggregate CSVs and carries the reference line values; everything needed to
rebuild the benchmark panels travels through those files.
"""

from __future__ import annotations

import json
from pathlib import Path

from .panels import CurveSpec, PanelSpec, PlotDataError, RefLine

__all__ = ["PANEL_PRESETS", "load_manifest", "panel_for", "panels_for_preset"]

PANEL_PRESETS = ("quartic", "pricing", "regression", "figure1")


def load_manifest(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise PlotDataError(f"manifest not found: {path}")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PlotDataError(f"manifest {path} is not valid JSON: {exc}") from exc
    manifest["_dir"] = path.parent
    return manifest


def _curves(manifest: dict) -> tuple[CurveSpec, ...]:
    base: Path = manifest["_dir"]
    curves = []
    for label, entry in sorted(manifest.get("algorithms", {}).items()):
        agg = entry.get("aggregate_file")
        if agg is None:
            continue  # every trial diverged; nothing to draw
        curves.append(CurveSpec(csv_path=base / agg, label=label))
    if not curves:
        raise PlotDataError(f"manifest in {base} lists no aggregate files")
    return tuple(curves)


def panel_for(manifest: dict) -> PanelSpec:
    """Build the benchmark panel matching the manifest's experiment name."""
    experiment = manifest.get("experiment")
    curves = _curves(manifest)
    references = manifest.get("references", {})
    if experiment == "quartic":
        return PanelSpec(
            curves=curves,
            x_column="samples_mean",
            y_column="run_avg_grad_norm_sq_mean",
            band_column="run_avg_grad_norm_sq_std",
            log_x=True,
            log_y=True,
            title="Quartic minimization",
            x_label="samples observed",
            y_label="avg. squared gradient norm",
        )
    if experiment == "pricing":
        refs = ()
        if "optimal_revenue" in references:
            refs = (RefLine(references["optimal_revenue"], "OPT"),)
        return PanelSpec(
            curves=curves,
            x_column="samples_mean",
            y_column="risk_mean",
            band_column="risk_std",
            y_sign=-1.0,
            title="Markovian pricing",
            x_label="samples observed",
            y_label="expected revenue",
            ref_lines=refs,
        )
    if experiment == "regression":
        refs = ()
        if "optimal_risk" in references:
            refs = (RefLine(references["optimal_risk"], "OPT"),)
        return PanelSpec(
            curves=curves,
            x_column="samples_mean",
            y_column="risk_mean",
            band_column="risk_std",
            title="Performative regression",
            x_label="samples observed",
            y_label="prediction risk",
            ref_lines=refs,
        )
    raise PlotDataError(f"no preset panel for experiment {experiment!r}")


def panels_for_preset(preset: str, manifests: list[dict]) -> list[PanelSpec]:
    """Resolve a preset name plus loaded manifests into panel specs."""
    if preset not in PANEL_PRESETS:
        known = ", ".join(PANEL_PRESETS)
        raise PlotDataError(f"unknown preset {preset!r} (known: {known})")
    if preset == "figure1":
        order = ("quartic", "pricing", "regression")
        by_name = {m.get("experiment"): m for m in manifests}
        missing = [name for name in order if name not in by_name]
        if missing:
            raise PlotDataError(
                "figure1 needs one manifest per experiment "
                f"(missing: {', '.join(missing)}); pass --manifest three times"
            )
        return [panel_for(by_name[name]) for name in order]
    if len(manifests) != 1:
        raise PlotDataError(f"preset {preset!r} takes exactly one manifest")
    manifest = manifests[0]
    if manifest.get("experiment") != preset:
        raise PlotDataError(
            f"manifest is for experiment {manifest.get('experiment')!r}, not {preset!r}"
        )
    return [panel_for(manifest)]
