"""Image -> feature vector pipelines shared by the CLI and the test-suite."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import EmptyCloud
from .featurize import BettiBinningConfig, FeatureVector, barcode_features
from .image_io import CANONICAL_HEIGHT, CANONICAL_WIDTH, GrayImage, ImageLike, resize_bilinear
from .mciq import mciq_vector
from .persistence import FiltrationParams, PersistenceBarcode, vr_barcode
from .ulbp import LbpConfig, extract_landmarks

log = logging.getLogger(__name__)

KIND_ORDER = ("MCIQ", "BB_D0", "BB_D1", "BS_D0", "BS_D1")


@dataclass(frozen=True)
class PipelineConfig:
    threshold: float = 25.0
    omega: int = 24
    resize: bool = True
    height: int = CANONICAL_HEIGHT
    width: int = CANONICAL_WIDTH
    lbp: LbpConfig = LbpConfig()


def canonical(img: ImageLike, cfg: PipelineConfig = PipelineConfig()) -> GrayImage:
    if cfg.resize:
        return resize_bilinear(img, cfg.height, cfg.width)
    return img if isinstance(img, GrayImage) else GrayImage(img)


def landmark_barcode(img: ImageLike, cfg: PipelineConfig = PipelineConfig(),
                     max_dim: int = 1) -> PersistenceBarcode:
    """Barcode of the ULBP landmark cloud; an image without landmarks gives an empty barcode."""
    cloud = extract_landmarks(img, cfg.lbp)
    try:
        return vr_barcode(cloud, FiltrationParams(max_dim=max_dim, threshold=cfg.threshold))
    except EmptyCloud:
        log.info("no landmarks found; barcode features default to zero")
        return PersistenceBarcode(threshold=cfg.threshold)


def image_features(img: ImageLike, kinds: Iterable[str], cfg: PipelineConfig = PipelineConfig(),
                   sample_id: str = "", label: str = "genuine") -> list:
    """Feature vectors of the requested kinds for one (already loaded) image."""
    kinds = [k for k in KIND_ORDER if k in set(kinds)]
    img = canonical(img, cfg)
    out = []
    barcode = None
    for kind in kinds:
        if kind == "MCIQ":
            values = mciq_vector(img)
        else:
            if barcode is None:
                needs_dim1 = any(k.endswith("D1") for k in kinds)
                barcode = landmark_barcode(img, cfg, max_dim=1 if needs_dim1 else 0)
            values = barcode_features(barcode, kind, BettiBinningConfig(cfg.omega))
        out.append(FeatureVector(kind, np.asarray(values, dtype=np.float64), sample_id, label))
    return out
