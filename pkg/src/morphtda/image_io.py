"""Grayscale image loading, saving, resizing and block partitioning.

Only two on-disk formats are understood: binary PGM (``P5``) and 8-bit PNG
(grayscale, gray+alpha, RGB, RGBA or palette). Color input is reduced to
luminance with the 0.299/0.587/0.114 luma weights.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from .errors import CorruptImage, ImageTooSmall, InvalidTarget, UnsupportedFormat

CANONICAL_HEIGHT = 280
CANONICAL_WIDTH = 270
GRID_SIDE = 6

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class GrayImage:
    """8-bit single-channel image, stored as a ``(height, width)`` uint8 array.

    Any non-empty size is representable; operations that need a 3x3
    neighbourhood or a 6x6 grid check their own minimum.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"expected a 2D pixel grid, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ImageTooSmall("image has no pixels")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("pixel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def from_list(cls, height: int, width: int, values) -> "GrayImage":
        values = np.asarray(values)
        if values.size != height * width:
            raise ValueError(f"{values.size} values cannot fill a {height}x{width} image")
        return cls(values.reshape(height, width))


@dataclass(frozen=True)
class BlockGrid:
    """The 36 equal blocks of an image, in row-major grid order."""

    blocks: tuple
    block_height: int
    block_width: int

    def stacked(self) -> np.ndarray:
        """Blocks as a ``(36, block_height * block_width)`` float array, each row-major flattened."""
        return np.stack([b.reshape(-1) for b in self.blocks]).astype(np.float64)


ImageLike = Union[GrayImage, np.ndarray]


def as_pixels(img: ImageLike) -> np.ndarray:
    if isinstance(img, GrayImage):
        return img.pixels
    return GrayImage(img).pixels


def round_half_up(values) -> np.ndarray:
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def luminance(rgb: np.ndarray) -> np.ndarray:
    """Luma of an ``(..., 3)`` RGB array, rounded to the nearest integer."""
    rgb = np.asarray(rgb, dtype=np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(round_half_up(y), 0, 255).astype(np.uint8)


def _parse_pgm(data: bytes) -> np.ndarray:
    fields = []
    pos = 2
    # Header: width, height, maxval separated by whitespace with optional comments.
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise CorruptImage("unterminated comment in PGM header")
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and data[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise CorruptImage("malformed PGM header")
        fields.append(int(data[start:pos]))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise CorruptImage("malformed PGM header")
    pos += 1
    width, height, maxval = fields
    if maxval <= 0 or maxval > 255:
        raise UnsupportedFormat(f"only 8-bit PGM is supported (maxval={maxval})")
    if width == 0 or height == 0:
        raise CorruptImage("PGM has zero size")
    body = data[pos : pos + width * height]
    if len(body) < width * height:
        raise CorruptImage(f"PGM truncated: expected {width * height} bytes, found {len(body)}")
    px = np.frombuffer(body, dtype=np.uint8).reshape(height, width)
    if maxval != 255:
        px = np.clip(round_half_up(px.astype(np.float64) * 255.0 / maxval), 0, 255).astype(np.uint8)
    return px


def _decode_png(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
                mode = im.mode
            if mode == "L":
                return np.array(im, dtype=np.uint8)
            if mode == "LA":
                return np.array(im, dtype=np.uint8)[..., 0]
            if mode in ("RGB", "RGBA"):
                return luminance(np.array(im, dtype=np.uint8)[..., :3])
            if mode == "1":
                return np.array(im.convert("L"), dtype=np.uint8)
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImage(f"cannot decode PNG: {exc}") from exc
    raise UnsupportedFormat(f"unsupported PNG mode {mode!r}")


def load_grayscale(path) -> GrayImage:
    """Read a PGM (P5) or PNG file as a grayscale image.

    Raises FileNotFoundError, UnsupportedFormat or CorruptImage.
    """
    path = Path(path)
    data = path.read_bytes()
    if data.startswith(_PNG_MAGIC):
        px = _decode_png(data)
    elif data.startswith(b"P5"):
        px = _parse_pgm(data)
    else:
        raise UnsupportedFormat(f"{path.name}: not a binary PGM or PNG file")
    if px.ndim != 2 or px.size == 0:
        raise CorruptImage(f"{path.name}: empty image")
    return GrayImage(px)


def save_image(img: ImageLike, path) -> None:
    """Write ``img`` as PGM or PNG, chosen by the file extension."""
    px = as_pixels(img)
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".pnm"):
        header = f"P5\n{px.shape[1]} {px.shape[0]}\n255\n".encode("ascii")
        path.write_bytes(header + px.tobytes())
    elif suffix == ".png":
        Image.fromarray(px, mode="L").save(path, format="PNG")
    else:
        raise UnsupportedFormat(f"cannot write {suffix!r}; use .pgm or .png")


def resize_bilinear(img: ImageLike, target_h: int = CANONICAL_HEIGHT,
                    target_w: int = CANONICAL_WIDTH) -> GrayImage:
    """Corner-aligned bilinear resize with half-up rounding."""
    if target_h < 3 or target_w < 3:
        raise InvalidTarget(f"target size must be at least 3x3, got {target_h}x{target_w}")
    src = as_pixels(img)
    h, w = src.shape
    if (h, w) == (target_h, target_w):
        return GrayImage(src.copy())
    f = src.astype(np.float64)

    ys = np.arange(target_h) * (h - 1) / (target_h - 1)
    xs = np.arange(target_w) * (w - 1) / (target_w - 1)
    y0 = np.clip(np.floor(ys).astype(np.intp), 0, max(h - 2, 0))
    x0 = np.clip(np.floor(xs).astype(np.intp), 0, max(w - 2, 0))
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    dy = (ys - y0)[:, None]
    dx = (xs - x0)[None, :]

    top = f[y0][:, x0] * (1 - dx) + f[y0][:, x1] * dx
    bottom = f[y1][:, x0] * (1 - dx) + f[y1][:, x1] * dx
    out = top * (1 - dy) + bottom * dy
    return GrayImage(np.clip(round_half_up(out), 0, 255).astype(np.uint8))


def partition_blocks(img: ImageLike) -> BlockGrid:
    """Cut the image into a 6x6 grid of equal blocks.

    Block size is ``floor(H/6) x floor(W/6)``; leftover bottom rows and right
    columns are dropped so that every block has the same shape.
    """
    px = as_pixels(img)
    h, w = px.shape
    if h < GRID_SIDE or w < GRID_SIDE:
        raise ImageTooSmall(f"need at least {GRID_SIDE}x{GRID_SIDE} pixels, got {h}x{w}")
    bh, bw = h // GRID_SIDE, w // GRID_SIDE
    blocks = tuple(
        px[r * bh : (r + 1) * bh, c * bw : (c + 1) * bw]
        for r in range(GRID_SIDE)
        for c in range(GRID_SIDE)
    )
    return BlockGrid(blocks=blocks, block_height=bh, block_width=bw)
