"""Pixel-level interventions: colored dots and geometric augmentation."""

from __future__ import annotations

import math

import numpy as np

from vcrank.rng import PCG32
from vcrank.synthgen.images import Image, disk_mask

DOT_COLOR = (60, 34, 112)
DOT_RADIUS = 30
DOT_COUNT = 4

MAX_ROTATION_DEG = 15.0
MAX_TRANSLATION_FRAC = 0.10
CROP_SCALE = (0.85, 1.0)


def apply_dot_intervention(
    img: Image,
    n_dots: int = DOT_COUNT,
    radius: int = DOT_RADIUS,
    color: tuple[int, int, int] = DOT_COLOR,
    seed: int = 0,
) -> Image:
    """Paint ``n_dots`` filled disks at uniformly drawn centres.

    Centres are integers in ``[radius, size - radius]`` so every disk lies
    fully inside the canvas; pixels outside the disks are untouched.
    """
    h, w, _ = img.pixels.shape
    if radius >= w / 2 or radius >= h / 2:
        raise ValueError(f"radius {radius} must be < half the image size")
    if n_dots < 0:
        raise ValueError("n_dots must be >= 0")
    if n_dots == 0:
        return img
    rng = PCG32(seed)
    out = img.pixels.copy()
    for _ in range(n_dots):
        cx = rng.randint(radius, w - radius)
        cy = rng.randint(radius, h - radius)
        out[disk_mask(cx, cy, radius)] = np.asarray(color, dtype=np.uint8)
    return img.replace_pixels(out)


def draw_augmentation(seed: int, width: int = 224, height: int = 224) -> dict:
    """Random rotation / translation / resized-crop parameters for ``seed``."""
    rng = PCG32(seed)
    angle = rng.uniform(-MAX_ROTATION_DEG, MAX_ROTATION_DEG)
    tx = rng.uniform(-MAX_TRANSLATION_FRAC, MAX_TRANSLATION_FRAC) * width
    ty = rng.uniform(-MAX_TRANSLATION_FRAC, MAX_TRANSLATION_FRAC) * height
    scale = rng.uniform(*CROP_SCALE)
    side = math.sqrt(scale)
    crop_x = rng.random() * (1.0 - side) * width
    crop_y = rng.random() * (1.0 - side) * height
    return {"angle": angle, "tx": tx, "ty": ty, "scale": scale, "crop_x": crop_x, "crop_y": crop_y}


def affine_resample(
    img: Image,
    angle: float = 0.0,
    tx: float = 0.0,
    ty: float = 0.0,
    scale: float = 1.0,
    crop_x: float = 0.0,
    crop_y: float = 0.0,
) -> Image:
    """Nearest-neighbour resample: area-``scale`` crop, then rotate/translate.

    Source coordinates falling outside the canvas are clamped to the border so
    no artificial fill color appears.
    """
    src = img.pixels
    h, w, _ = src.shape
    side = math.sqrt(scale)
    # crop window -> canvas coordinates, kept separable as a row and a column
    dx = (crop_x + (np.arange(w) + 0.5) * side - w / 2.0 - tx)[None, :]
    dy = (crop_y + (np.arange(h) + 0.5) * side - h / 2.0 - ty)[:, None]
    # undo the rotation about the centre and the translation
    theta = math.radians(angle)
    c, s = math.cos(theta), math.sin(theta)
    sx = c * dx + s * dy + w / 2.0
    sy = -s * dx + c * dy + h / 2.0
    ix = np.clip(np.floor(sx).astype(np.intp), 0, w - 1)
    iy = np.clip(np.floor(sy).astype(np.intp), 0, h - 1)
    return img.replace_pixels(src.reshape(-1, 3)[iy * w + ix])


def augment(img: Image, seed: int) -> Image:
    return affine_resample(img, **draw_augmentation(seed, img.width, img.height))
