"""Render the three rate-balancing figures from fdd-mimo result CSVs.

Rendering is read-only: rates are taken from the CSV as written by the
simulator CLI, never recomputed.  The feedback sweep (fig1) plots mean user
rate against the bit budget; the antenna sweeps (fig2, fig3) plot per-user or
sum rate against the receive-array size on a log2 axis, one curve per
(scheme, antenna policy), with dashed overlays wherever the bound_floor
column is populated.
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

REQUIRED_COLUMNS = (
    "experiment",
    "scheme",
    "n_rx",
    "n_tx",
    "n_users",
    "snr_db",
    "coherence_block",
    "feedback_bits",
    "feedback_fraction",
    "trials",
    "mean_user_rate",
    "sum_rate",
    "stderr",
    "bound_floor",
)

FIGURES = {
    "fig1": dict(
        x="feedback_bits",
        y="mean_user_rate",
        xlabel="feedback bits per coherence block",
        ylabel="average user rate [bits/symbol]",
        xscale="linear",
        split_policy=False,
        expected_schemes=("bf", "zf", "dp"),
    ),
    "fig2": dict(
        x="n_rx",
        y="mean_user_rate",
        xlabel="receive antennas N",
        ylabel="spectral efficiency per user [bits/symbol]",
        xscale="log2",
        split_policy=True,
        expected_schemes=("bf",),
    ),
    "fig3": dict(
        x="n_rx",
        y="sum_rate",
        xlabel="receive antennas N",
        ylabel="sum rate [bits/symbol]",
        xscale="log2",
        split_policy=True,
        expected_schemes=("bf", "zf", "dp"),
    ),
}


class RenderError(ValueError):
    pass


@dataclass
class FigureSpec:
    figure: str  # fig1 | fig2 | fig3
    csv_paths: list[str]
    out_path: str
    dpi: int = 150
    title: str | None = None


@dataclass
class RenderResult:
    out_path: str
    series: list[str] = field(default_factory=list)
    overlays: int = 0
    warnings: list[str] = field(default_factory=list)


def _read_rows(paths):
    rows = []
    for path in paths:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            missing = [col for col in REQUIRED_COLUMNS if col not in header]
            if missing:
                raise RenderError(f"{path}: missing required columns: {', '.join(missing)}")
            rows.extend(reader)
    return rows


def render(spec: FigureSpec) -> RenderResult:
    if spec.figure not in FIGURES:
        raise RenderError(f"unknown figure id {spec.figure!r}; expected one of {sorted(FIGURES)}")
    layout = FIGURES[spec.figure]
    rows = _read_rows(spec.csv_paths)
    rows = [r for r in rows if r[layout["x"]] != "" and r[layout["y"]] != ""]
    if not rows:
        raise RenderError("no plottable rows in the input CSVs")

    def series_key(row):
        policy = row.get("antenna_policy", "") if layout["split_policy"] else ""
        return (row["scheme"], policy)

    groups: dict[tuple, list] = {}
    for row in rows:
        groups.setdefault(series_key(row), []).append(row)

    result = RenderResult(out_path=spec.out_path)
    schemes_present = {key[0] for key in groups}
    missing_schemes = [s for s in layout["expected_schemes"] if s not in schemes_present]
    if missing_schemes:
        message = f"missing scheme curves: {', '.join(missing_schemes)}"
        result.warnings.append(message)
        print(f"warning: {message}", file=sys.stderr)

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for key in sorted(groups):
        scheme, policy = key
        data = sorted(groups[key], key=lambda r: float(r[layout["x"]]))
        xs = [float(r[layout["x"]]) for r in data]
        ys = [float(r[layout["y"]]) for r in data]
        label = scheme.upper() if not policy else f"{scheme.upper()} ({policy})"
        (line,) = ax.plot(xs, ys, marker="o", markersize=3, label=label)
        result.series.append(label)
        floors = [(x, float(r["bound_floor"])) for x, r in zip(xs, data) if r["bound_floor"] != ""]
        if floors:
            ax.plot(
                [f[0] for f in floors],
                [f[1] for f in floors],
                linestyle="--",
                color=line.get_color(),
                alpha=0.7,
                label=f"{label} floor",
            )
            result.overlays += 1

    ax.set_xlabel(layout["xlabel"])
    ax.set_ylabel(layout["ylabel"])
    if layout["xscale"] == "log2":
        ax.set_xscale("log", base=2)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=spec.dpi)
    plt.close(fig)
    return result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fdd-mimo-render",
        description="render a rate-balancing figure from fdd-mimo CSV results",
    )
    parser.add_argument("--figure", required=True, choices=sorted(FIGURES))
    parser.add_argument(
        "--csv", required=True, action="append", help="input CSV (repeat for several files)"
    )
    parser.add_argument("--out", required=True, help="output image path (PNG)")
    parser.add_argument("--dpi", type=int, default=150)
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        result = render(
            FigureSpec(
                figure=args.figure,
                csv_paths=args.csv,
                out_path=args.out,
                dpi=args.dpi,
                title=args.title,
            )
        )
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.out_path} ({len(result.series)} curves, {result.overlays} overlays)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
