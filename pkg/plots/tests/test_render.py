"""Renderer tests.

The acceptance check drives the simulator CLI (the sibling fdd-mimo package
must be installed) at small trial counts to obtain schema-true CSVs, renders
all three figures, and checks curve/overlay counts; the unit tests run on
handcrafted CSVs.
"""

import os
import subprocess
import sys

import pytest

from fdd_mimo_plots import FigureSpec, RenderError, render

HEADER = (
    "experiment,scheme,n_rx,n_tx,n_users,snr_db,coherence_block,feedback_bits,"
    "feedback_fraction,trials,mean_user_rate,sum_rate,stderr,bound_floor"
)


def write_csv(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def fig1_line(scheme, bits, rate):
    return f"fig1,{scheme},8,8,8,30.0,180,{bits},,10,{rate},{rate * 8},0.01,"


class TestUnitRendering:
    def test_fig1_three_curves(self, tmp_path):
        lines = [HEADER]
        for scheme in ("bf", "zf", "dp"):
            for bits, rate in ((0.0, 0.2), (100.0, 3.0), (200.0, 5.0)):
                lines.append(fig1_line(scheme, bits, rate))
        csv_path = write_csv(tmp_path / "fig1.csv", lines)
        out = tmp_path / "fig1.png"
        result = render(FigureSpec(figure="fig1", csv_paths=[csv_path], out_path=str(out)))
        assert out.exists() and out.stat().st_size > 1000
        assert sorted(result.series) == ["BF", "DP", "ZF"]
        assert result.overlays == 0
        assert not result.warnings

    def test_missing_column_named(self, tmp_path):
        bad_header = HEADER.replace(",mean_user_rate", "")
        csv_path = write_csv(
            tmp_path / "bad.csv",
            [bad_header, "fig1,bf,8,8,8,30.0,180,0.0,,10,1.6,0.01,"],
        )
        with pytest.raises(RenderError, match="mean_user_rate"):
            render(FigureSpec(figure="fig1", csv_paths=[csv_path], out_path=str(tmp_path / "x.png")))

    def test_empty_data_is_an_error(self, tmp_path):
        csv_path = write_csv(tmp_path / "empty.csv", [HEADER])
        out = tmp_path / "empty.png"
        with pytest.raises(RenderError, match="no plottable rows"):
            render(FigureSpec(figure="fig1", csv_paths=[csv_path], out_path=str(out)))
        assert not out.exists()

    def test_missing_schemes_warn_but_render(self, tmp_path):
        lines = [HEADER]
        for n, rate in ((4, 5.0), (128, 40.0)):
            lines.append(f"fig3,bf,{n},{n},8,30.0,180,,0.0556,10,{rate / 8},{rate},0.01,12.0")
        csv_path = write_csv(tmp_path / "fig3.csv", lines)
        out = tmp_path / "fig3.png"
        result = render(FigureSpec(figure="fig3", csv_paths=[csv_path], out_path=str(out)))
        assert out.exists() and out.stat().st_size > 1000
        assert len(result.series) == 1
        assert any("zf" in w and "dp" in w for w in result.warnings)
        assert result.overlays == 1

    def test_unknown_figure_id(self, tmp_path):
        csv_path = write_csv(tmp_path / "f.csv", [HEADER, fig1_line("bf", 0.0, 1.0)])
        with pytest.raises(RenderError, match="figure id"):
            render(FigureSpec(figure="fig9", csv_paths=[csv_path], out_path="x.png"))

    def test_cli_exit_codes(self, tmp_path):
        csv_path = write_csv(tmp_path / "f.csv", [HEADER, fig1_line("bf", 0.0, 1.0)])
        out = tmp_path / "out.png"
        from fdd_mimo_plots.render import main

        assert main(["--figure", "fig1", "--csv", csv_path, "--out", str(out)]) == 0
        assert out.exists()
        assert main(["--figure", "fig1", "--csv", str(tmp_path / "nope.csv"), "--out", "x.png"]) == 1


@pytest.fixture(scope="module")
def sim_csvs(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    commands = [
        ["fig1", "--trials", "10", "--seed", "7", "--b-list", "0,40,80,120,160,200"],
        ["fig2", "--trials", "5", "--seed", "7", "--n-list", "16,64"],
        ["fig3", "--trials", "5", "--seed", "7", "--n-list", "16,64"],
    ]
    for command in commands:
        proc = subprocess.run(
            [sys.executable, "-m", "fdd_mimo.cli", *command, "--out-dir", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
    return out


class TestAcceptanceRendering:
    """A11: render the three figures from simulator-produced CSVs."""

    def test_a11_plot_rendering(self, sim_csvs, tmp_path):
        results = {}
        for figure, expected_curves, expect_overlays in (
            ("fig1", 3, False),
            ("fig2", 3, True),   # one BF curve per antenna policy
            ("fig3", 9, True),
        ):
            png = tmp_path / f"{figure}.png"
            results[figure] = render(
                FigureSpec(
                    figure=figure,
                    csv_paths=[str(sim_csvs / f"{figure}.csv")],
                    out_path=str(png),
                )
            )
            assert png.exists() and png.stat().st_size > 1000
            assert len(results[figure].series) == expected_curves
            assert (results[figure].overlays > 0) == expect_overlays
        ok = all(
            (tmp_path / f"fig{i}.png").stat().st_size > 1000 for i in (1, 2, 3)
        )
        print(
            "A11 plot rendering: PASS ("
            + ", ".join(
                f"{fig}: {len(r.series)} curves/{r.overlays} overlays"
                for fig, r in sorted(results.items())
            )
            + ")"
        )
        assert ok
