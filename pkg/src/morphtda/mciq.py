"""Multi-characteristic image quality (MCIQ) histogram features.

The image is cut into a 6x6 block grid. For every unordered pair of blocks
five symmetric similarity indices are computed (correlation, luminance,
contrast, kurtosis, skewness), each lying in [-1, 1]. The 630 pair values of
each index are binned into 10 equal bins over [-1, 1] and the five count
histograms are concatenated into a 50-vector.

Moments follow the n-1 normalisation throughout, including the third and
fourth moment sums. Any index whose denominator vanishes, or that needs the
skewness/kurtosis of a constant block, is set to 0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BlockTooSmall, SizeMismatch
from .image_io import ImageLike, partition_blocks

log = logging.getLogger(__name__)

CHARACTERISTICS = ("correlation", "luminance", "contrast", "kurtosis", "skewness")
N_BINS = 10
HIST_RANGE = (-1.0, 1.0)


@dataclass(frozen=True)
class BlockStats:
    mean: float
    variance: float
    std: float
    skewness: Optional[float]  # None when the block is constant
    kurtosis: Optional[float]


@dataclass(frozen=True)
class PairIndices:
    correlation: float
    luminance: float
    contrast: float
    kurtosis_idx: float
    skewness_idx: float

    def as_tuple(self) -> tuple:
        return (self.correlation, self.luminance, self.contrast, self.kurtosis_idx, self.skewness_idx)


def block_stats(block) -> BlockStats:
    x = np.asarray(block, dtype=np.float64).reshape(-1)
    n = x.size
    if n < 2:
        raise BlockTooSmall(f"block needs at least 2 pixels, got {n}")
    mean = float(x.mean())
    dev = x - mean
    variance = float((dev**2).sum() / (n - 1))
    std = math.sqrt(variance)
    if std == 0.0:
        return BlockStats(mean, variance, std, None, None)
    skew = float((dev**3).sum() / ((n - 1) * std**3))
    kurt = float((dev**4).sum() / ((n - 1) * std**4))
    return BlockStats(mean, variance, std, skew, kurt)


def _ratio(a: Optional[float], b: Optional[float]) -> float:
    """2ab / (a^2 + b^2), or 0 when undefined."""
    if a is None or b is None:
        return 0.0
    den = a * a + b * b
    return 2.0 * a * b / den if den != 0 else 0.0


def pair_indices(x, y, sx: BlockStats | None = None, sy: BlockStats | None = None) -> PairIndices:
    """The five similarity indices of two equally sized blocks, paired positionally."""
    xa = np.asarray(x, dtype=np.float64).reshape(-1)
    ya = np.asarray(y, dtype=np.float64).reshape(-1)
    if xa.size != ya.size:
        raise SizeMismatch(f"blocks differ in size: {xa.size} vs {ya.size}")
    sx = sx or block_stats(xa)
    sy = sy or block_stats(ya)
    n = xa.size
    if sx.std > 0 and sy.std > 0:
        cov = float(((xa - sx.mean) * (ya - sy.mean)).sum() / (n - 1))
        correlation = cov / (sx.std * sy.std)
    else:
        correlation = 0.0
    var_sum = sx.variance + sy.variance
    contrast = 2.0 * sx.std * sy.std / var_sum if var_sum != 0 else 0.0
    values = (correlation, _ratio(sx.mean, sy.mean), contrast,
              _ratio(sx.kurtosis, sy.kurtosis), _ratio(sx.skewness, sy.skewness))
    # rounding can push a perfect match a few ulps past 1
    return PairIndices(*(min(1.0, max(-1.0, float(v))) for v in values))


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den != 0)
    return out


def index_matrices(img: ImageLike) -> dict:
    """36x36 matrix of each index over the block grid (unit diagonal unless degenerate)."""
    blocks = partition_blocks(img).stacked()
    n = blocks.shape[1]
    if n < 2:
        raise BlockTooSmall(f"blocks of {n} pixel cannot carry a variance")
    mean = blocks.mean(axis=1)
    dev = blocks - mean[:, None]
    var = (dev**2).sum(axis=1) / (n - 1)
    std = np.sqrt(var)
    flat = std == 0
    safe_std = np.where(flat, 1.0, std)
    skew = np.where(flat, 0.0, (dev**3).sum(axis=1) / ((n - 1) * safe_std**3))
    kurt = np.where(flat, 0.0, (dev**4).sum(axis=1) / ((n - 1) * safe_std**4))
    if flat.any():
        log.debug("%d constant block(s); their indices default to 0", int(flat.sum()))

    cov = dev @ dev.T / (n - 1)
    outer_std = np.outer(std, std)
    mats = {
        "correlation": _safe_div(cov, outer_std),
        "luminance": _safe_div(2 * np.outer(mean, mean), mean[:, None] ** 2 + mean[None, :] ** 2),
        "contrast": _safe_div(2 * outer_std, var[:, None] + var[None, :]),
        "kurtosis": _safe_div(2 * np.outer(kurt, kurt), kurt[:, None] ** 2 + kurt[None, :] ** 2),
        "skewness": _safe_div(2 * np.outer(skew, skew), skew[:, None] ** 2 + skew[None, :] ** 2),
    }
    return {k: np.clip(m, -1.0, 1.0) for k, m in mats.items()}


def histogram(values) -> np.ndarray:
    """10 equal bins over [-1, 1]; the last bin is closed on the right."""
    counts, _ = np.histogram(np.clip(values, *HIST_RANGE), bins=N_BINS, range=HIST_RANGE)
    return counts.astype(np.float64)


def mciq_vector(img: ImageLike) -> np.ndarray:
    """The 50-dim MCIQ vector: raw-count histograms in ``CHARACTERISTICS`` order."""
    mats = index_matrices(img)
    iu = np.triu_indices(mats["correlation"].shape[0], k=1)
    return np.concatenate([histogram(mats[name][iu]) for name in CHARACTERISTICS])
