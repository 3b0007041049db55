"""Figure rendering for perfdfo experiment outputs."""

from .panels import CurveSpec, PanelSpec, PlotDataError, RefLine, render_figure, render_panel
from .presets import PANEL_PRESETS, load_manifest, panel_for, panels_for_preset

__version__ = "0.1.0"

__all__ = [
    "CurveSpec",
    "PANEL_PRESETS",
    "PanelSpec",
    "PlotDataError",
    "RefLine",
    "load_manifest",
    "panel_for",
    "panels_for_preset",
    "render_figure",
    "render_panel",
]
