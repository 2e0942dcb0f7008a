"""SVG renderings of barcodes and feature vectors, each paired with a numeric CSV."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .featurize import BS_FIELDS, FeatureVector  # noqa: E402
from .mciq import CHARACTERISTICS, N_BINS  # noqa: E402
from .persistence import PersistenceBarcode  # noqa: E402

plt.rcParams["svg.hashsalt"] = "morphtda"
_SVG_META = {"Date": None, "Creator": "morphtda"}


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def barcode_rows(barcode: PersistenceBarcode) -> list:
    rows = []
    for dim in (0, 1):
        for bar in barcode.bars(dim):
            rows.append({"dim": dim, "birth": bar.birth, "death": bar.death,
                         "essential": int(bar.essential)})
    return rows


def plot_barcode(barcode: PersistenceBarcode, svg_path, csv_path) -> list:
    """Horizontal interval plot, one panel per dimension."""
    rows = barcode_rows(barcode)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, ["dim", "birth", "death", "essential"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for dim, ax in zip((0, 1), axes):
        bars = barcode.bars(dim)
        for k, bar in enumerate(sorted(bars, key=lambda b: (b.birth, b.death))):
            ax.hlines(k, bar.birth, bar.death, color="tab:red" if bar.essential else "tab:blue", lw=1)
        ax.set_ylabel(f"H{dim} bars")
        ax.set_ylim(-1, max(len(bars), 1))
    axes[-1].set_xlim(0, barcode.threshold)
    axes[-1].set_xlabel("filtration value")
    _save(fig, Path(svg_path))
    return rows


def feature_rows(vectors: Sequence[FeatureVector]) -> list:
    rows = []
    for v in vectors:
        if v.kind == "MCIQ":
            for p, name in enumerate(CHARACTERISTICS):
                for b in range(N_BINS):
                    rows.append((v.sample_id, v.kind, name, b, v.values[p * N_BINS + b]))
        elif v.kind.startswith("BB"):
            rows.extend((v.sample_id, v.kind, "betti", x, val) for x, val in enumerate(v.values))
        else:
            rows.extend((v.sample_id, v.kind, BS_FIELDS[i], i, val) for i, val in enumerate(v.values))
    return rows


def plot_features(vectors: Sequence[FeatureVector], svg_path, csv_path) -> list:
    """MCIQ as five 10-bar panels, Betti binning as step curves, statistics as bars."""
    rows = feature_rows(vectors)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id", "kind", "series", "x", "value"])
        for r in rows:
            writer.writerow([r[0], r[1], r[2], r[3], repr(float(r[4]))])

    mciq = [v for v in vectors if v.kind == "MCIQ"]
    betti = [v for v in vectors if v.kind.startswith("BB")]
    stats = [v for v in vectors if v.kind.startswith("BS")]
    n_rows = bool(mciq) + bool(betti) + bool(stats)
    fig = plt.figure(figsize=(12, 3.2 * max(n_rows, 1)))
    grid = fig.add_gridspec(max(n_rows, 1), len(CHARACTERISTICS))
    row = 0
    if mciq:
        width = 0.8 / len(mciq)
        for p, name in enumerate(CHARACTERISTICS):
            ax = fig.add_subplot(grid[row, p])
            for k, v in enumerate(mciq):
                xs = [b + k * width for b in range(N_BINS)]
                ax.bar(xs, v.values[p * N_BINS:(p + 1) * N_BINS], width=width, label=v.sample_id)
            ax.set_title(name)
            ax.set_xticks(range(N_BINS))
        row += 1
    if betti:
        ax = fig.add_subplot(grid[row, :])
        for v in betti:
            ax.step(range(len(v.values)), v.values, where="post", label=f"{v.sample_id} {v.kind}")
        ax.set_xlabel("line v")
        ax.set_ylabel("bars alive")
        ax.legend(fontsize="small")
        row += 1
    if stats:
        ax = fig.add_subplot(grid[row, :])
        width = 0.8 / len(stats)
        for k, v in enumerate(stats):
            ax.bar([i + k * width for i in range(len(v.values))], v.values, width=width,
                   label=f"{v.sample_id} {v.kind}")
        ax.set_xticks(range(len(BS_FIELDS)))
        ax.set_xticklabels(BS_FIELDS, rotation=30, fontsize="small")
        ax.legend(fontsize="small")
    fig.tight_layout()
    _save(fig, Path(svg_path))
    return rows
