"""CLI behavior and exit codes."""

from __future__ import annotations

from plotkit.cli import main as cli_main

from test_panels import write_manifest


def test_plot_single_preset(tmp_path, capsys):
    manifest = write_manifest(tmp_path, "regression", ["dfo", "sgd"])
    out = tmp_path / "fig.png"
    code = cli_main(["plot", "--manifest", str(manifest), "--preset", "regression",
                     "--out", str(out)])
    assert code == 0
    assert out.stat().st_size > 0


def test_plot_figure1(tmp_path):
    args = ["plot", "--preset", "figure1", "--out", str(tmp_path / "figure1.png")]
    for name in ("quartic", "pricing", "regression"):
        sub = tmp_path / name
        sub.mkdir()
        args += ["--manifest", str(write_manifest(sub, name, ["dfo"]))]
    assert cli_main(args) == 0
    assert (tmp_path / "figure1.png").stat().st_size > 0


def test_missing_manifest_exits_2(tmp_path, capsys):
    code = cli_main(["plot", "--manifest", str(tmp_path / "nope.json"),
                     "--preset", "quartic", "--out", str(tmp_path / "f.png")])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_wrong_manifest_count_exits_2(tmp_path):
    manifest = write_manifest(tmp_path, "quartic", ["a"])
    code = cli_main(["plot", "--manifest", str(manifest), "--preset", "figure1",
                     "--out", str(tmp_path / "f.png")])
    assert code == 2
