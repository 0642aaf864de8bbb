"""Render the five report figures from leosim CSV output.

Each renderer validates the CSV schema first and refuses to draw an empty
plot. Axis labels reuse the CSV column names, which carry the units; legends
come from the variant columns. Rendering is read-only and reproducible: with
identical inputs the output bytes are identical (timestamps suppressed).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "leosim-figures"
matplotlib.rcParams["svg.fonttype"] = "none"

import matplotlib.pyplot as plt
import numpy as np

FIGURE_IDS = ("fig3", "fig4", "fig5", "fig6", "fig7")

EXPECTED_COLUMNS = {
    "fig3": ["p", "n", "link_class", "carrier_ghz", "p95_delay_ms", "p95_doppler_khz"],
    "fig4": ["p", "n", "link_class", "carrier_ghz", "median_rate_mbps", "p95_rate_mbps"],
    "fig5": ["beta_deg", "tx_power_dbm", "t_s", "elevation_deg", "distance_km", "se_bps_hz"],
    "fig6": ["n_s", "sum_eirp_dbw", "rate_bps_hz"],
    "fig7": ["k", "scheme", "p", "n", "mean_rate_bps", "p5_rate_bps", "p95_rate_bps"],
}


class RenderError(ValueError):
    """Raised for schema mismatches or empty inputs."""


@dataclass(frozen=True)
class FigureJob:
    input_csv: str
    figure_id: str
    output: str
    style: str = "plain"

    def __post_init__(self) -> None:
        if self.figure_id not in FIGURE_IDS:
            raise RenderError(f"unknown figure id '{self.figure_id}'")
        if self.style not in ("paper", "plain"):
            raise RenderError(f"unknown style '{self.style}'")


def read_rows(path: str, figure_id: str) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            rows = list(reader)
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from exc
    for column in EXPECTED_COLUMNS[figure_id]:
        if column not in header:
            raise RenderError(f"missing column '{column}' for {figure_id}")
    if not rows:
        raise RenderError(f"{path} has no data rows; refusing to draw an empty {figure_id}")
    return rows


def _apply_style(style: str) -> None:
    if style == "paper":
        plt.rcParams.update(
            {
                "font.size": 9,
                "axes.grid": True,
                "grid.alpha": 0.3,
                "grid.linestyle": ":",
                "figure.figsize": (5.0, 3.4),
                "lines.linewidth": 1.4,
            }
        )
    else:
        plt.rcParams.update({"axes.grid": True, "grid.alpha": 0.3})


def _variant_label(row: dict) -> str:
    return f"P={row['p']}, N={row['n']}"


def _grouped_bars(ax, rows, value_column):
    classes = sorted({row["link_class"] for row in rows})
    variants = sorted({_variant_label(row) for row in rows})
    width = 0.8 / max(len(variants), 1)
    x = np.arange(len(classes), dtype=float)
    for vi, variant in enumerate(variants):
        values = []
        for cls in classes:
            matches = [
                float(row[value_column])
                for row in rows
                if row["link_class"] == cls and _variant_label(row) == variant
            ]
            values.append(matches[0] if matches else np.nan)
        ax.bar(x + vi * width, values, width=width, label=variant)
    ax.set_xticks(x + width * (len(variants) - 1) / 2)
    ax.set_xticklabels(classes, rotation=20, ha="right")
    ax.set_ylabel(value_column)
    ax.legend()


def render_fig3(rows, output, style):
    _apply_style(style)
    fig, (ax_delay, ax_doppler) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    _grouped_bars(ax_delay, rows, "p95_delay_ms")
    _grouped_bars(ax_doppler, rows, "p95_doppler_khz")
    ax_doppler.set_yscale("log")
    ax_delay.set_xlabel("link_class")
    ax_doppler.set_xlabel("link_class")
    fig.tight_layout()
    _save(fig, output)


def render_fig4(rows, output, style):
    _apply_style(style)
    fig, (ax_median, ax_p95) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    _grouped_bars(ax_median, rows, "median_rate_mbps")
    _grouped_bars(ax_p95, rows, "p95_rate_mbps")
    ax_median.set_xlabel("link_class")
    ax_p95.set_xlabel("link_class")
    fig.tight_layout()
    _save(fig, output)


def render_fig5(rows, output, style):
    _apply_style(style)
    fig, ax = plt.subplots()
    series: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for row in rows:
        key = (row["beta_deg"], row["tx_power_dbm"])
        series.setdefault(key, []).append((float(row["t_s"]), float(row["se_bps_hz"])))
    for (beta, ptx), points in sorted(series.items()):
        points.sort()
        t = [p[0] / 60.0 for p in points]
        se = [p[1] for p in points]
        ax.plot(t, se, label=f"beta={beta} deg, Ptx={ptx} dBm")
    ax.set_xlabel("t_s / 60 (minutes)")
    ax.set_ylabel("se_bps_hz")
    ax.legend()
    fig.tight_layout()
    _save(fig, output)


def render_fig6(rows, output, style):
    _apply_style(style)
    fig, ax = plt.subplots()
    series: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        series.setdefault(row["n_s"], []).append(
            (float(row["sum_eirp_dbw"]), float(row["rate_bps_hz"]))
        )
    for n_s, points in sorted(series.items(), key=lambda kv: float(kv[0])):
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=f"N_s={n_s}")
    ax.set_xlabel("sum_eirp_dbw")
    ax.set_ylabel("rate_bps_hz")
    ax.legend()
    fig.tight_layout()
    _save(fig, output)


def _is_power_of_two(k: int) -> bool:
    return k >= 1 and (k & (k - 1)) == 0


def render_fig7(rows, output, style):
    _apply_style(style)
    fig, ax = plt.subplots()
    series: dict[tuple[str, str, str], list[tuple[int, float]]] = {}
    for row in rows:
        k = int(row["k"])
        scheme = row["scheme"]
        if scheme == "cdma" and not _is_power_of_two(k):
            continue  # not a feasible spreading factor
        key = (scheme, row["p"], row["n"])
        series.setdefault(key, []).append((k, float(row["mean_rate_bps"])))
    for (scheme, p, n), points in sorted(series.items()):
        points.sort()
        ax.plot(
            [k for k, _ in points],
            [rate for _, rate in points],
            marker="s" if scheme == "cdma" else "o",
            linestyle="--" if scheme == "cdma" else "-",
            label=f"{scheme}, P={p}, N={n}",
        )
    ax.set_xlabel("k")
    ax.set_ylabel("mean_rate_bps")
    ax.legend()
    fig.tight_layout()
    _save(fig, output)


def _save(fig, output: str) -> None:
    directory = os.path.dirname(os.path.abspath(output))
    os.makedirs(directory, exist_ok=True)
    if output.lower().endswith(".svg"):
        # A fixed creation date keeps re-renders byte-identical.
        fig.savefig(output, format="svg", metadata={"Date": None})
    else:
        fig.savefig(output)
    plt.close(fig)


_RENDERERS = {
    "fig3": render_fig3,
    "fig4": render_fig4,
    "fig5": render_fig5,
    "fig6": render_fig6,
    "fig7": render_fig7,
}


def render(job: FigureJob) -> str:
    """Render one figure job; returns the output path."""
    rows = read_rows(job.input_csv, job.figure_id)
    _RENDERERS[job.figure_id](rows, job.output, job.style)
    return job.output


_EXPERIMENT_FIGURES = {
    "fig3_delay_doppler": "fig3",
    "fig4_rates": "fig4",
    "fig5_pass": "fig5",
    "fig6_mimo": "fig6",
    "fig7_access": "fig7",
}


def render_for_experiment(experiment: str, out_dir: str) -> str:
    """Render the figure belonging to an experiment's CSV in ``out_dir``."""
    figure_id = _EXPERIMENT_FIGURES.get(experiment)
    if figure_id is None:
        raise RenderError(f"no figure renderer for experiment '{experiment}'")
    job = FigureJob(
        input_csv=os.path.join(out_dir, f"{figure_id}.csv"),
        figure_id=figure_id,
        output=os.path.join(out_dir, f"{figure_id}.svg"),
    )
    return render(job)
