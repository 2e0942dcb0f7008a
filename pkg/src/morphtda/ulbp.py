"""Local binary pattern codes and ULBP landmark extraction.

Codes are built from a 3x3 patch by visiting the 8 neighbours clockwise from
the top-left corner (TL, T, TR, R, BR, B, BL, L); the first neighbour is the
most significant bit. A neighbour contributes a 1 when it is >= the centre.
The default landmark code ``0b01111000`` is the fourth rotation of the
four-ones uniform class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ImageTooSmall
from .image_io import ImageLike, as_pixels

CLOCKWISE_FROM_TOP_LEFT = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))
G4_ROTATION_4 = 0b01111000


def circular_transitions(code: int, bits: int = 8) -> int:
    """Number of 0/1 changes met when walking the ``bits``-bit code in a circle."""
    rotated = ((code >> 1) | ((code & 1) << (bits - 1))) & ((1 << bits) - 1)
    return bin(code ^ rotated).count("1")


def is_uniform(code: int) -> bool:
    return circular_transitions(code) <= 2


def rotations(code: int, bits: int = 8) -> list[int]:
    mask = (1 << bits) - 1
    return [((code << k) | (code >> (bits - k))) & mask for k in range(bits)]


@dataclass(frozen=True)
class LbpConfig:
    target_code: int = G4_ROTATION_4
    neighbor_order: tuple = CLOCKWISE_FROM_TOP_LEFT

    def __post_init__(self):
        if not 0 <= self.target_code <= 255:
            raise ValueError("target_code must be an 8-bit value")
        if circular_transitions(self.target_code) != 2:
            raise ValueError(f"target code {self.target_code:08b} is not a 2-transition uniform code")
        moore = {(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)} - {(0, 0)}
        order = tuple(tuple(o) for o in self.neighbor_order)
        if len(order) != 8 or set(order) != moore:
            raise ValueError("neighbor_order must be a permutation of the 8 Moore offsets")
        object.__setattr__(self, "neighbor_order", order)


@dataclass(frozen=True)
class PointCloud:
    """Landmark coordinates as an ``(n, 2)`` integer array of ``(row, col)``."""

    points: np.ndarray
    source_dims: tuple = field(default=(0, 0))

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self) -> str:
        lines = ["row,col"]
        lines += [f"{r},{c}" for r, c in self.points]
        return "\n".join(lines) + "\n"


def lbp_code(patch, cfg: LbpConfig = LbpConfig()) -> int:
    patch = np.asarray(patch)
    if patch.shape != (3, 3):
        raise ValueError(f"patch must be 3x3, got {patch.shape}")
    center = patch[1, 1]
    code = 0
    for dr, dc in cfg.neighbor_order:
        code = (code << 1) | int(patch[1 + dr, 1 + dc] >= center)
    return code


def lbp_image(img: ImageLike, cfg: LbpConfig = LbpConfig()) -> np.ndarray:
    """LBP codes of all interior pixels, shape ``(H-2, W-2)``."""
    px = as_pixels(img)
    h, w = px.shape
    if h < 3 or w < 3:
        raise ImageTooSmall(f"LBP needs at least 3x3 pixels, got {h}x{w}")
    px = px.astype(np.int16)
    center = px[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.uint8)
    for bit, (dr, dc) in zip(range(7, -1, -1), cfg.neighbor_order):
        neighbor = px[1 + dr : h - 1 + dr, 1 + dc : w - 1 + dc]
        codes |= (neighbor >= center).astype(np.uint8) << bit
    return codes


def extract_landmarks(img: ImageLike, cfg: LbpConfig = LbpConfig()) -> PointCloud:
    """Raster-ordered ``(row, col)`` of interior pixels whose code is ``cfg.target_code``."""
    px = as_pixels(img)
    codes = lbp_image(px, cfg)
    rows, cols = np.nonzero(codes == cfg.target_code)
    return PointCloud(np.column_stack([rows + 1, cols + 1]), source_dims=px.shape)


def uniform_codes(ones: Sequence[int] | None = None) -> list[int]:
    """All 8-bit codes with exactly two circular transitions, optionally filtered by 1-bit count."""
    codes = [c for c in range(256) if circular_transitions(c) == 2]
    if ones is not None:
        codes = [c for c in codes if bin(c).count("1") in ones]
    return codes
