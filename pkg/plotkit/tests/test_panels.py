"""Rendering contracts: determinism, error paths, preset wiring."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from plotkit import (
    CurveSpec,
    PanelSpec,
    PlotDataError,
    load_manifest,
    panels_for_preset,
    render_figure,
    render_panel,
)

AGG_HEADER = (
    "epoch,samples_mean,risk_mean,risk_std,grad_norm_sq_mean,grad_norm_sq_std,"
    "run_avg_grad_norm_sq_mean,run_avg_grad_norm_sq_std,trials"
)


def write_aggregate(path: Path, n: int = 24, seed: int = 0) -> Path:
    rng = np.random.default_rng(seed)
    samples = np.linspace(10, 3000, n)
    risk = -60.0 + 50.0 * np.exp(-samples / 500.0) + 0.1 * rng.standard_normal(n)
    gns = 200.0 / samples ** (1 / 3)
    lines = [AGG_HEADER]
    for i in range(n):
        lines.append(
            f"{i},{samples[i]:.17g},{risk[i]:.17g},{0.5:.17g},"
            f"{gns[i]:.17g},{0.2:.17g},{gns[i]:.17g},{0.2:.17g},10"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_manifest(tmp: Path, experiment: str, labels: list[str]) -> Path:
    algos = {}
    for i, label in enumerate(labels):
        agg = tmp / f"{label}_aggregate.csv"
        write_aggregate(agg, seed=i)
        algos[label] = {"aggregate_file": agg.name}
    manifest = {
        "experiment": experiment,
        "references": {"optimal_revenue": 62.5, "optimal_risk": 63.5},
        "algorithms": algos,
    }
    path = tmp / "manifest.json"
    path.write_text(json.dumps(manifest), encoding="utf-8")
    return path


def basic_spec(csv_path: Path, **kwargs) -> PanelSpec:
    base = dict(
        curves=(CurveSpec(csv_path=csv_path, label="run"),),
        x_column="samples_mean",
        y_column="risk_mean",
    )
    base.update(kwargs)
    return PanelSpec(**base)


class TestRenderPanel:
    def test_writes_nonempty_file(self, tmp_path):
        csv_path = write_aggregate(tmp_path / "a.csv")
        out = render_panel(basic_spec(csv_path), tmp_path / "panel.png")
        assert out.exists() and out.stat().st_size > 0

    def test_rendering_is_deterministic(self, tmp_path):
        csv_path = write_aggregate(tmp_path / "a.csv")
        spec = basic_spec(csv_path, band_column="risk_std", y_sign=-1.0)
        p1 = render_panel(spec, tmp_path / "one.png")
        p2 = render_panel(spec, tmp_path / "two.png")
        assert p1.read_bytes() == p2.read_bytes()

    def test_log_axes_drop_nonpositive_rows(self, tmp_path):
        csv_path = tmp_path / "a.csv"
        lines = [AGG_HEADER, "0,0,-1,0.1,5,0.1,5,0.1,10", "1,10,-1,0.1,4,0.1,4,0.1,10",
                 "2,100,-1,0.1,3,0.1,3,0.1,10"]
        csv_path.write_text("\n".join(lines) + "\n")
        spec = basic_spec(csv_path, y_column="run_avg_grad_norm_sq_mean", log_x=True, log_y=True)
        out = render_panel(spec, tmp_path / "p.png")
        assert out.exists()

    def test_missing_column_is_descriptive(self, tmp_path):
        csv_path = write_aggregate(tmp_path / "a.csv")
        spec = basic_spec(csv_path, y_column="reward_mean")
        with pytest.raises(PlotDataError, match="reward_mean"):
            render_panel(spec, tmp_path / "p.png")
        assert not (tmp_path / "p.png").exists()

    def test_missing_file(self, tmp_path):
        spec = basic_spec(tmp_path / "absent.csv")
        with pytest.raises(PlotDataError, match="absent.csv"):
            render_panel(spec, tmp_path / "p.png")

    def test_empty_curve_list_writes_nothing(self, tmp_path):
        spec = PanelSpec(curves=(), x_column="samples_mean", y_column="risk_mean")
        with pytest.raises(PlotDataError):
            render_panel(spec, tmp_path / "p.png")
        assert not (tmp_path / "p.png").exists()


class TestPresets:
    def test_single_experiment_panel(self, tmp_path):
        manifest = load_manifest(write_manifest(tmp_path, "pricing", ["dfo", "sgd"]))
        specs = panels_for_preset("pricing", [manifest])
        assert len(specs) == 1
        assert specs[0].y_sign == -1.0
        assert specs[0].ref_lines[0].value == 62.5
        out = render_figure(specs, tmp_path / "pricing.png")
        assert out.stat().st_size > 0

    def test_quartic_panel_is_loglog(self, tmp_path):
        manifest = load_manifest(write_manifest(tmp_path, "quartic", ["a", "b", "c", "d", "e"]))
        spec = panels_for_preset("quartic", [manifest])[0]
        assert spec.log_x and spec.log_y
        assert len(spec.curves) == 5

    def test_three_panel_figure(self, tmp_path):
        manifests = []
        for name in ("quartic", "pricing", "regression"):
            sub = tmp_path / name
            sub.mkdir()
            manifests.append(load_manifest(write_manifest(sub, name, ["dfo", "sgd"])))
        specs = panels_for_preset("figure1", manifests)
        assert len(specs) == 3
        out = render_figure(specs, tmp_path / "figure1.png")
        assert out.stat().st_size > 0
        out2 = render_figure(specs, tmp_path / "figure1_again.png")
        assert out.read_bytes() == out2.read_bytes()

    def test_figure1_requires_all_three(self, tmp_path):
        manifest = load_manifest(write_manifest(tmp_path, "quartic", ["a"]))
        with pytest.raises(PlotDataError, match="pricing"):
            panels_for_preset("figure1", [manifest])

    def test_preset_experiment_mismatch(self, tmp_path):
        manifest = load_manifest(write_manifest(tmp_path, "pricing", ["a"]))
        with pytest.raises(PlotDataError, match="pricing"):
            panels_for_preset("quartic", [manifest])

    def test_unknown_preset(self, tmp_path):
        manifest = load_manifest(write_manifest(tmp_path, "pricing", ["a"]))
        with pytest.raises(PlotDataError, match="unknown preset"):
            panels_for_preset("figure2", [manifest])

    def test_diverged_only_labels_are_skipped(self, tmp_path):
        manifest_path = write_manifest(tmp_path, "pricing", ["dfo"])
        doc = json.loads(manifest_path.read_text())
        doc["algorithms"]["dead"] = {"aggregate_file": None}
        manifest_path.write_text(json.dumps(doc))
        spec = panels_for_preset("pricing", [load_manifest(manifest_path)])[0]
        assert [c.label for c in spec.curves] == ["dfo"]
