"""Synthetic stand-ins for face images and morphs.

These exist so the pipeline can be exercised end to end without the
access-restricted face databases. The "morph" here is a plain alpha blend of
two images followed by mild Gaussian smoothing; it is not a landmark-based
face morphing method and says nothing about real attack detection rates.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import AlphaOutOfRange
from .image_io import CANONICAL_HEIGHT, CANONICAL_WIDTH, GrayImage, ImageLike, as_pixels, round_half_up


def alpha_blend(a: ImageLike, b: ImageLike, alpha: float = 0.5) -> GrayImage:
    """``round(alpha * a + (1 - alpha) * b)`` pixelwise; images must share a shape."""
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {alpha}")
    pa = as_pixels(a).astype(np.float64)
    pb = as_pixels(b).astype(np.float64)
    if pa.shape != pb.shape:
        raise ValueError(f"cannot blend images of shape {pa.shape} and {pb.shape}")
    out = alpha * pa + (1.0 - alpha) * pb
    return GrayImage(np.clip(round_half_up(out), 0, 255).astype(np.uint8))


def smooth(img: ImageLike, sigma: float) -> GrayImage:
    if sigma <= 0:
        return GrayImage(as_pixels(img).copy())
    out = gaussian_filter(as_pixels(img).astype(np.float64), sigma, mode="reflect")
    return GrayImage(np.clip(round_half_up(out), 0, 255).astype(np.uint8))


def textured_face(rng: np.random.Generator, height: int = CANONICAL_HEIGHT,
                  width: int = CANONICAL_WIDTH) -> GrayImage:
    """A face-sized grayscale image with shading, blobs, gratings and sensor grain."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    cy = height * rng.uniform(0.42, 0.58)
    cx = width * rng.uniform(0.42, 0.58)
    ry = height * rng.uniform(0.30, 0.40)
    rx = width * rng.uniform(0.25, 0.35)
    face = np.exp(-(((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2) ** 2)
    img = 60.0 + 90.0 * face * rng.uniform(0.8, 1.2)
    img += rng.uniform(-25, 25) * (xx / width - 0.5) + rng.uniform(-25, 25) * (yy / height - 0.5)

    for _ in range(int(rng.integers(4, 9))):
        by, bx = rng.uniform(0, height), rng.uniform(0, width)
        r = rng.uniform(6, 22)
        img += rng.uniform(-35, 35) * np.exp(-((yy - by) ** 2 + (xx - bx) ** 2) / (2 * r * r))

    for _ in range(3):
        theta = rng.uniform(0, np.pi)
        freq = rng.uniform(0.05, 0.25)
        phase = rng.uniform(0, 2 * np.pi)
        img += rng.uniform(2, 8) * np.sin(freq * (xx * np.cos(theta) + yy * np.sin(theta)) + phase)

    grain = gaussian_filter(rng.normal(0.0, 1.0, (height, width)), 0.5)
    img += rng.uniform(6, 10) * grain / grain.std()
    return GrayImage(np.clip(round_half_up(img), 0, 255).astype(np.uint8))


def synthetic_dataset(n_genuine: int = 60, n_morph: int = 60, seed: int = 0,
                      alpha: float = 0.5, sigma: float = 0.8,
                      height: int = CANONICAL_HEIGHT, width: int = CANONICAL_WIDTH):
    """Lists ``(genuine, morph)`` of :class:`GrayImage`.

    Each morph blends a distinct random pair of genuine images and is then
    smoothed with a Gaussian of width ``sigma``.
    """
    if n_genuine < 2:
        raise ValueError("need at least two genuine images to form morph pairs")
    rng = np.random.default_rng(seed)
    genuine = [textured_face(rng, height, width) for _ in range(n_genuine)]
    morphs = []
    for _ in range(n_morph):
        i, j = rng.choice(n_genuine, size=2, replace=False)
        morphs.append(smooth(alpha_blend(genuine[i], genuine[j], alpha), sigma))
    return genuine, morphs
