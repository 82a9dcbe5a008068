"""Feature-pair image rendering.

Each of the eight feature pairs draws an "A" object when ``has_a`` is set and a
"B" object when ``has_b`` is set, on a neutral gray canvas. Rasterisation uses
integer pixel-centre coverage without anti-aliasing, so every output is a pure
function of ``(pair, has_a, has_b, seed)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vcrank.rng import PCG32

WIDTH = 224
HEIGHT = 224

RED = (220, 50, 50)
GREEN = (50, 180, 50)
OUTLINE_DARK = (40, 40, 40)
BLACK = (0, 0, 0)

_YS, _XS = np.mgrid[0:HEIGHT, 0:WIDTH].astype(np.float64) + 0.5


@dataclass(frozen=True)
class FeaturePairSpec:
    id: str
    concept_name_a: str
    concept_name_b: str
    positional: bool = False
    distractors: bool = False


PAIRS: dict[str, FeaturePairSpec] = {
    p.id: p
    for p in (
        FeaturePairSpec("red_green", "red", "green", distractors=True),
        FeaturePairSpec("left_right", "left", "right", positional=True),
        FeaturePairSpec("one_many", "one", "many"),
        FeaturePairSpec("horiz_vert", "horizontal", "vertical", distractors=True),
        FeaturePairSpec("square_circle", "square", "circle", distractors=True),
        FeaturePairSpec("empty_filled", "loops", "spots", distractors=True),
        FeaturePairSpec("striped_solid", "bars", "cube", distractors=True),
        FeaturePairSpec("top_bottom", "top", "bottom", positional=True),
    )
}
PAIR_IDS = tuple(PAIRS)
NON_POSITIONAL_IDS = tuple(p for p in PAIR_IDS if not PAIRS[p].positional)


def get_pair(pair: str | FeaturePairSpec) -> FeaturePairSpec:
    if isinstance(pair, FeaturePairSpec):
        return pair
    try:
        return PAIRS[pair]
    except KeyError:
        raise KeyError(f"unknown feature pair {pair!r}; expected one of {PAIR_IDS}") from None


@dataclass(frozen=True, eq=False)
class Image:
    """A 224x224 RGB raster with its ground-truth feature flags."""

    pixels: np.ndarray  # (H, W, 3) uint8, row-major
    has_a: bool
    has_b: bool
    seed: int

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return (
            self.has_a == other.has_a
            and self.has_b == other.has_b
            and self.seed == other.seed
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )

    def __hash__(self) -> int:
        return hash((self.has_a, self.has_b, self.seed, self.pixels.tobytes()))

    def replace_pixels(self, pixels: np.ndarray) -> "Image":
        return Image(pixels, self.has_a, self.has_b, self.seed)


# -- primitives -------------------------------------------------------------


def ellipse_mask(x0: float, y0: float, w: float, h: float) -> np.ndarray:
    """Pixels whose centres fall inside the ellipse inscribed in a w x h box."""
    cx, cy = x0 + w / 2.0, y0 + h / 2.0
    rx, ry = w / 2.0, h / 2.0
    return ((_XS - cx) / rx) ** 2 + ((_YS - cy) / ry) ** 2 <= 1.0


def disk_mask(cx: float, cy: float, r: float) -> np.ndarray:
    return (_XS - cx) ** 2 + (_YS - cy) ** 2 <= r * r


def rect_mask(x0: int, y0: int, w: int, h: int) -> np.ndarray:
    m = np.zeros((HEIGHT, WIDTH), dtype=bool)
    m[max(y0, 0) : y0 + h, max(x0, 0) : x0 + w] = True
    return m


def _dilate(mask: np.ndarray, r: int) -> np.ndarray:
    out = mask.copy()
    for _ in range(r):
        grown = out.copy()
        grown[1:, :] |= out[:-1, :]
        grown[:-1, :] |= out[1:, :]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        out = grown
    return out


def _paint(canvas: np.ndarray, mask: np.ndarray, color) -> None:
    canvas[mask] = np.asarray(color, dtype=np.uint8)


def _random_color(rng: PCG32) -> tuple[int, int, int]:
    return (rng.randint(50, 150), rng.randint(50, 150), rng.randint(50, 150))


# -- objects ----------------------------------------------------------------
# Each drawer receives the bounding region it may occupy and returns the union
# mask of the pixels it painted.

_QUADRANT = 112
_MARGIN = 6


def _place(rng: PCG32, region: tuple[int, int, int, int], w: int, h: int) -> tuple[int, int]:
    rx, ry, rw, rh = region
    x = rng.randint(rx + _MARGIN, rx + rw - _MARGIN - w)
    y = rng.randint(ry + _MARGIN, ry + rh - _MARGIN - h)
    return x, y


def _outlined_rect(canvas, x, y, w, h, fill, outline, t) -> np.ndarray:
    outer = rect_mask(x, y, w, h)
    _paint(canvas, outer, outline)
    _paint(canvas, rect_mask(x + t, y + t, w - 2 * t, h - 2 * t), fill)
    return outer


def _outlined_ellipse(canvas, x, y, w, h, fill, outline, t) -> np.ndarray:
    outer = ellipse_mask(x, y, w, h)
    inner = ellipse_mask(x + t, y + t, w - 2 * t, h - 2 * t)
    ring = outer & ~inner
    _paint(canvas, ring, outline)
    if fill is None:
        return ring
    _paint(canvas, inner, fill)
    return outer


def _draw_colored_rect(canvas, rng, region, color) -> np.ndarray:
    w, h = rng.randint(50, 70), rng.randint(35, 50)
    x, y = _place(rng, region, w, h)
    return _outlined_rect(canvas, x, y, w, h, color, OUTLINE_DARK, 2)


def _draw_single_blob(canvas, rng, region) -> np.ndarray:
    x, y = _place(rng, region, 50, 50)
    m = ellipse_mask(x, y, 50, 50)
    _paint(canvas, m, _random_color(rng))
    return m


def _draw_cluster(canvas, rng, region) -> np.ndarray:
    n = rng.randint(6, 10)
    color = _random_color(rng)
    painted = np.zeros((HEIGHT, WIDTH), dtype=bool)
    blocked = np.zeros_like(painted)
    placed = 0
    attempts = 0
    while placed < n and attempts < 500:
        attempts += 1
        w, h = rng.randint(18, 20), rng.randint(18, 20)
        x, y = _place(rng, region, w, h)
        m = ellipse_mask(x, y, w, h)
        if (m & blocked).any():
            continue
        _paint(canvas, m, color)
        painted |= m
        blocked |= _dilate(m, 3)
        placed += 1
    return painted


def _draw_bar(canvas, rng, region, horizontal: bool) -> np.ndarray:
    long_side, short_side = rng.randint(80, 100), rng.randint(14, 20)
    w, h = (long_side, short_side) if horizontal else (short_side, long_side)
    x, y = _place(rng, region, w, h)
    m = rect_mask(x, y, w, h)
    _paint(canvas, m, _random_color(rng))
    return m


def _draw_square(canvas, rng, region) -> np.ndarray:
    x, y = _place(rng, region, 60, 60)
    return _outlined_rect(canvas, x, y, 60, 60, _random_color(rng), BLACK, 3)


def _draw_circle(canvas, rng, region) -> np.ndarray:
    x, y = _place(rng, region, 60, 60)
    return _outlined_ellipse(canvas, x, y, 60, 60, _random_color(rng), BLACK, 3)


def _draw_ellipse(canvas, rng, region, hollow: bool) -> np.ndarray:
    w, h = rng.randint(50, 70), rng.randint(50, 70)
    x, y = _place(rng, region, w, h)
    color = _random_color(rng)
    if hollow:
        return _outlined_ellipse(canvas, x, y, w, h, None, color, 5)
    m = ellipse_mask(x, y, w, h)
    _paint(canvas, m, color)
    return m


STRIPE_WIDTH = 3
STRIPE_GAP = 8


def _draw_striped_rect(canvas, rng, region, striped: bool) -> np.ndarray:
    w, h = rng.randint(60, 80), rng.randint(50, 70)
    x, y = _place(rng, region, w, h)
    color = _random_color(rng)
    outer = rect_mask(x, y, w, h)
    if not striped:
        _paint(canvas, outer, color)
        return outer
    inner = rect_mask(x + 2, y + 2, w - 4, h - 4)
    m = outer & ~inner
    cols = np.arange(WIDTH)
    stripe_cols = ((cols - (x + 2)) % (STRIPE_WIDTH + STRIPE_GAP)) < STRIPE_WIDTH
    m |= inner & stripe_cols[None, :]
    _paint(canvas, m, color)
    return m


def _draw_positioned_ellipse(canvas, rng, xr, yr) -> np.ndarray:
    w, h = rng.randint(40, 50), rng.randint(40, 50)
    x = rng.randint(*xr(w))
    y = rng.randint(*yr(h))
    m = ellipse_mask(x, y, w, h)
    _paint(canvas, m, _random_color(rng))
    return m


def _add_distractors(canvas, rng, occupied: np.ndarray) -> None:
    n = rng.randbelow(4)
    blocked = _dilate(occupied, 4)
    for _ in range(n):
        for _attempt in range(50):
            d = rng.randint(8, 14)
            x = rng.randint(2, WIDTH - 2 - d)
            y = rng.randint(2, HEIGHT - 2 - d)
            m = ellipse_mask(x, y, d, d)
            if (m & blocked).any():
                continue
            _paint(canvas, m, _random_color(rng))
            blocked |= _dilate(m, 4)
            break


def _quadrants(rng: PCG32) -> list[tuple[int, int, int, int]]:
    corners = [(0, 0), (_QUADRANT, 0), (0, _QUADRANT), (_QUADRANT, _QUADRANT)]
    order = rng.permutation(4)
    return [(corners[i][0], corners[i][1], _QUADRANT, _QUADRANT) for i in order]


def render_feature_image(pair: str | FeaturePairSpec, has_a: bool, has_b: bool, seed: int) -> Image:
    """Render one synthetic image for ``pair`` with the requested features."""
    fpair = get_pair(pair)
    rng = PCG32(seed)
    gray = rng.randint(200, 235)
    canvas = np.full((HEIGHT, WIDTH, 3), gray, dtype=np.uint8)
    occupied = np.zeros((HEIGHT, WIDTH), dtype=bool)
    has_a, has_b = bool(has_a), bool(has_b)

    if fpair.id == "left_right":
        yr = lambda h: (10, HEIGHT - 10 - h)  # noqa: E731
        if has_a:
            occupied |= _draw_positioned_ellipse(canvas, rng, lambda w: (10, WIDTH // 2 - 60), yr)
        if has_b:
            occupied |= _draw_positioned_ellipse(canvas, rng, lambda w: (WIDTH // 2 + 10, WIDTH - 60), yr)
    elif fpair.id == "top_bottom":
        xr = lambda w: (10, WIDTH - 10 - w)  # noqa: E731
        if has_a:
            occupied |= _draw_positioned_ellipse(canvas, rng, xr, lambda h: (15, HEIGHT // 2 - 65))
        if has_b:
            occupied |= _draw_positioned_ellipse(canvas, rng, xr, lambda h: (HEIGHT // 2 + 15, HEIGHT - 65))
    else:
        slot_a, slot_b = _quadrants(rng)[:2]
        drawers = {
            "red_green": (
                lambda r: _draw_colored_rect(canvas, rng, r, RED),
                lambda r: _draw_colored_rect(canvas, rng, r, GREEN),
            ),
            "one_many": (
                lambda r: _draw_single_blob(canvas, rng, r),
                lambda r: _draw_cluster(canvas, rng, r),
            ),
            "horiz_vert": (
                lambda r: _draw_bar(canvas, rng, r, True),
                lambda r: _draw_bar(canvas, rng, r, False),
            ),
            "square_circle": (
                lambda r: _draw_square(canvas, rng, r),
                lambda r: _draw_circle(canvas, rng, r),
            ),
            "empty_filled": (
                lambda r: _draw_ellipse(canvas, rng, r, True),
                lambda r: _draw_ellipse(canvas, rng, r, False),
            ),
            "striped_solid": (
                lambda r: _draw_striped_rect(canvas, rng, r, True),
                lambda r: _draw_striped_rect(canvas, rng, r, False),
            ),
        }[fpair.id]
        if has_a:
            occupied |= drawers[0](slot_a)
        if has_b:
            occupied |= drawers[1](slot_b)
        if fpair.distractors:
            _add_distractors(canvas, rng, occupied)

    return Image(canvas, has_a, has_b, int(seed))


def blank_image(gray: int = 220, seed: int = 0) -> Image:
    return Image(np.full((HEIGHT, WIDTH, 3), gray, dtype=np.uint8), False, False, seed)
