"""Fixed-length vectors from barcodes, and the shared feature CSV format."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParseError
from .persistence import PersistenceBarcode

DEFAULT_OMEGA = 24

KIND_LENGTHS = {"MCIQ": 50, "BB_D0": 25, "BB_D1": 25, "BS_D0": 10, "BS_D1": 10}
CLI_KINDS = {"mciq": "MCIQ", "bb0": "BB_D0", "bb1": "BB_D1", "bs0": "BS_D0", "bs1": "BS_D1"}
LABELS = ("genuine", "morph")

BS_FIELDS = (
    "mean_birth", "std_birth", "median_birth",
    "mean_death", "std_death", "median_death",
    "mean_life", "std_life", "median_life",
    "bar_count",
)


@dataclass(frozen=True)
class BettiBinningConfig:
    omega: int = DEFAULT_OMEGA

    def __post_init__(self):
        if self.omega < 1:
            raise ValueError(f"omega must be >= 1, got {self.omega}")


@dataclass
class FeatureVector:
    kind: str
    values: np.ndarray
    sample_id: str = ""
    label: str = "genuine"

    def __post_init__(self):
        if self.kind not in KIND_LENGTHS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        n = len(self.values)
        # BB length follows omega, the other kinds are fixed-size
        if (n != KIND_LENGTHS[self.kind]) if not self.kind.startswith("BB") else n < 2:
            raise ValueError(f"{self.kind} vector of length {n} is invalid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.sample_id}: non-finite feature value")


def betti_binning(barcode: PersistenceBarcode, dim: int,
                  cfg: BettiBinningConfig = BettiBinningConfig()) -> np.ndarray:
    """Bars alive at each integer line ``v = 0..omega``.

    A bar ``[b, d)`` is alive at ``v`` when ``b <= v < d``; an essential bar
    is alive at every ``v >= b``.
    """
    lines = np.arange(cfg.omega + 1, dtype=np.float64)
    counts = np.zeros(cfg.omega + 1)
    for bar in barcode.bars(dim):
        alive = lines >= bar.birth
        if not bar.essential:
            alive &= lines < bar.death
        counts += alive
    return counts


def _summary(values: np.ndarray) -> list:
    if len(values) == 0:
        return [0.0, 0.0, 0.0]
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return [float(np.mean(values)), std, float(np.median(values))]


def barcode_stats(barcode: PersistenceBarcode, dim: int) -> np.ndarray:
    """Mean/std/median of births, deaths and lifespans, then the bar count.

    Standard deviations use the n-1 denominator. Essential deaths are taken
    at the filtration threshold.
    """
    bars = barcode.bars(dim)
    if not bars:
        return np.zeros(10)
    births = np.array([b.birth for b in bars], dtype=np.float64)
    deaths = np.array([barcode.threshold if b.essential else b.death for b in bars],
                      dtype=np.float64)
    deaths = np.minimum(deaths, barcode.threshold)
    return np.array(
        _summary(births) + _summary(deaths) + _summary(deaths - births) + [float(len(bars))]
    )


def barcode_features(barcode: PersistenceBarcode, kind: str,
                     cfg: BettiBinningConfig = BettiBinningConfig()) -> np.ndarray:
    if kind == "BB_D0":
        return betti_binning(barcode, 0, cfg)
    if kind == "BB_D1":
        return betti_binning(barcode, 1, cfg)
    if kind == "BS_D0":
        return barcode_stats(barcode, 0)
    if kind == "BS_D1":
        return barcode_stats(barcode, 1)
    raise ValueError(f"{kind} is not a barcode feature")


def _fmt(x: float) -> str:
    # repr round-trips float64 exactly; integral values are written without ".0"
    return str(int(x)) if float(x).is_integer() and abs(x) < 2**53 else repr(float(x))


def write_feature_csv(vectors: Iterable[FeatureVector], fh) -> int:
    """Write ``sample_id,label,kind,v0..`` rows; shorter kinds leave trailing cells empty."""
    vectors = list(vectors)
    width = max((len(v.values) for v in vectors), default=0)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["sample_id", "label", "kind"] + [f"v{i}" for i in range(width)])
    for v in vectors:
        cells = [_fmt(x) for x in v.values]
        writer.writerow([v.sample_id, v.label, v.kind] + cells + [""] * (width - len(cells)))
    return len(vectors)


def read_feature_csv(fh) -> list:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration as exc:
        raise ParseError("feature CSV is empty") from exc
    if header[:3] != ["sample_id", "label", "kind"]:
        raise ParseError(f"unexpected feature CSV header {header[:3]}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        sample_id, label, kind = row[:3]
        if kind not in KIND_LENGTHS:
            raise ParseError(f"line {lineno}: unknown kind {kind!r}")
        cells = [c for c in row[3:] if c != ""]
        try:
            values = [float(c) for c in cells]
            out.append(FeatureVector(kind, values, sample_id, label))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    return out


def feature_csv_string(vectors: Iterable[FeatureVector]) -> str:
    buf = io.StringIO()
    write_feature_csv(vectors, buf)
    return buf.getvalue()

