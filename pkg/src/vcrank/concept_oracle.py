"""Descriptor-space stand-in for a vision-language model.

Images and concept names are both mapped into a 16-dimensional descriptor
space; the concept label matrix is the cosine similarity between the two.
Descriptor components are mostly "mass-like" (they add up when several
objects are present), which keeps the canonical concepts separable.

Component layout::

    0-2   chroma mass R, G, B        (sum of channel - gray, / 2000 px)
    3-5   std of R, G, B             (x 4)
    6     horizontal edge energy     (|dL/dy| summed, / 200 px)
    7     vertical edge energy       (|dL/dx| summed, / 200 px)
    8     foreground fill            (foreground pixels / 2000)
    9     outline-vs-fill            (enclosed background pixels / 2000)
    10    stripe periodicity         (extra runs per component row, / 200)
    11    connected components       (count / 8)
    12-13 centroid x, y              (in [-1, 1], 0 when empty)
    14    bounding-box aspect        (area-weighted log(w/h))
    15    bounding-box fill          (squareness mass, / 2000)
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.special import ndtri

from vcrank.rng import PCG32
from vcrank.synthgen.images import Image

DESCRIPTOR_DIM = 16
FOREGROUND_THRESHOLD = 30
MASS_UNIT = 2000.0
EDGE_UNIT = 200.0
COMPONENT_UNIT = 8.0

COMPONENT_NAMES = (
    "chroma_r",
    "chroma_g",
    "chroma_b",
    "std_r",
    "std_g",
    "std_b",
    "edge_horizontal",
    "edge_vertical",
    "fill",
    "outline_ratio",
    "stripe",
    "components",
    "centroid_x",
    "centroid_y",
    "aspect",
    "bbox_fill",
)
_IDX = {n: i for i, n in enumerate(COMPONENT_NAMES)}

# 4-neighbour connectivity
_FOUR = ndimage.generate_binary_structure(2, 1)


def foreground_mask(pixels: np.ndarray) -> np.ndarray:
    """Pixels differing from the modal color by more than the threshold in any channel."""
    px = pixels.astype(np.int32)
    packed = (px[..., 0] << 16) | (px[..., 1] << 8) | px[..., 2]
    values, counts = np.unique(packed, return_counts=True)
    mode = int(values[np.argmax(counts)])
    fg = np.abs(px[..., 0] - (mode >> 16)) > FOREGROUND_THRESHOLD
    fg |= np.abs(px[..., 1] - ((mode >> 8) & 255)) > FOREGROUND_THRESHOLD
    fg |= np.abs(px[..., 2] - (mode & 255)) > FOREGROUND_THRESHOLD
    return fg


def _hole_pixels(fg: np.ndarray) -> int:
    """Background pixels not 4-connected to the border."""
    bg_labels, n_bg = ndimage.label(~fg, structure=_FOUR)
    if n_bg == 0:
        return 0
    border = np.concatenate([bg_labels[0], bg_labels[-1], bg_labels[:, 0], bg_labels[:, -1]])
    outside = np.zeros(n_bg + 1, dtype=bool)
    outside[border] = True
    outside[0] = True
    return int((~outside[bg_labels]).sum())


@dataclass(frozen=True)
class DescriptorStats:
    """Raw quantities behind a descriptor, kept for diagnostics and tests."""

    n_components: int
    fill_pixels: int
    hole_pixels: int


def descriptor_with_stats(img: Image) -> tuple[np.ndarray, DescriptorStats]:
    h, w, _ = img.pixels.shape
    n = float(h * w)
    chans = [np.ascontiguousarray(img.pixels[..., c], dtype=np.int64) for c in range(3)]
    total = chans[0] + chans[1] + chans[2]  # 3 x luma, exact integers
    d = np.zeros(DESCRIPTOR_DIM)

    tsum = int(total.sum())
    for c in range(3):
        csum = int(chans[c].sum())
        # chroma: channel minus gray, summed exactly in integers
        d[c] = (3 * csum - tsum) / (3 * 255.0) / MASS_UNIT
        mean = csum / n
        var = max(int((chans[c] * chans[c]).sum()) / n - mean * mean, 0.0)
        d[3 + c] = math.sqrt(var) / 255.0 * 4.0
    d[6] = int(np.abs(np.diff(total, axis=0)).sum()) / (3 * 255.0) / EDGE_UNIT
    d[7] = int(np.abs(np.diff(total, axis=1)).sum()) / (3 * 255.0) / EDGE_UNIT

    fg = foreground_mask(img.pixels)
    n_fg = int(fg.sum())
    labels, n_comp = ndimage.label(fg, structure=_FOUR)
    holes = _hole_pixels(fg) if n_fg else 0
    d[8] = n_fg / MASS_UNIT
    d[9] = holes / MASS_UNIT
    d[11] = n_comp / COMPONENT_UNIT

    if n_fg:
        ys, xs = np.nonzero(fg)
        d[12] = (xs.mean() + 0.5 - w / 2.0) / (w / 2.0)
        d[13] = (ys.mean() + 0.5 - h / 2.0) / (h / 2.0)

        # extra runs per (row, component): run starts minus distinct (row, label) pairs
        starts = fg.copy()
        starts[:, 1:] &= ~fg[:, :-1]
        keys = ys.astype(np.int64) * (n_comp + 1) + labels[ys, xs]
        d[10] = (int(starts.sum()) - np.unique(keys).size) / EDGE_UNIT

        areas = np.bincount(labels.ravel(), minlength=n_comp + 1)[1:]
        aspect_num = 0.0
        square_mass = 0.0
        for k, sl in enumerate(ndimage.find_objects(labels)):
            bh = sl[0].stop - sl[0].start
            bw = sl[1].stop - sl[1].start
            area = float(areas[k])
            aspect_num += area * math.log(bw / bh)
            ratio = area / (bw * bh)
            square_mass += area * min(max((ratio - math.pi / 4) / (1 - math.pi / 4), 0.0), 1.0)
        d[14] = aspect_num / n_fg
        d[15] = square_mass / MASS_UNIT

    return d, DescriptorStats(n_comp, n_fg, holes)


def image_descriptor(img: Image) -> np.ndarray:
    """16-component descriptor (the image-side embedding)."""
    return descriptor_with_stats(img)[0]


def descriptor_matrix(images) -> np.ndarray:
    return np.stack([image_descriptor(img) for img in images]) if len(images) else np.zeros((0, DESCRIPTOR_DIM))


# -- concept side -------------------------------------------------------------


def _axes(**weights: float) -> np.ndarray:
    v = np.zeros(DESCRIPTOR_DIM)
    for name, wgt in weights.items():
        v[_IDX[name]] = wgt
    return v / np.linalg.norm(v)


# Sparse signed combinations of descriptor axes, two per feature pair. The
# cross terms cancel the partner object's contribution on shared axes.
CANONICAL_EMBEDDINGS: dict[str, np.ndarray] = {
    "red": _axes(chroma_r=1.0, chroma_b=-1.0),
    "green": _axes(chroma_g=1.0, chroma_b=-1.0),
    "left": _axes(centroid_x=-1.0),
    "right": _axes(centroid_x=1.0),
    "one": _axes(fill=1.0, components=-1.16),
    "many": _axes(components=1.0),
    "horizontal": _axes(edge_horizontal=1.0, edge_vertical=-0.19),
    "vertical": _axes(edge_vertical=1.0, edge_horizontal=-0.19),
    "square": _axes(bbox_fill=1.0),
    "circle": _axes(fill=1.0, bbox_fill=-1.0),
    "loops": _axes(outline_ratio=1.0),
    "spots": _axes(fill=1.0, outline_ratio=-0.5),
    "bars": _axes(stripe=1.0),
    "cube": _axes(bbox_fill=1.0, stripe=-0.3),
    "top": _axes(centroid_y=-1.0),
    "bottom": _axes(centroid_y=1.0),
}
CANONICAL_NAMES = tuple(CANONICAL_EMBEDDINGS)


def hashed_embeddings(names) -> np.ndarray:
    """Unit vectors derived from BLAKE2b digests of the names (one row per name)."""
    if not names:
        return np.zeros((0, DESCRIPTOR_DIM))
    raw = b"".join(hashlib.blake2b(n.encode("utf-8"), digest_size=64).digest() for n in names)
    words = np.frombuffer(raw, dtype="<u4").reshape(len(names), DESCRIPTOR_DIM).astype(np.float64)
    gauss = ndtri((words + 0.5) / 4294967296.0)
    return gauss / np.linalg.norm(gauss, axis=1, keepdims=True)


@dataclass(frozen=True)
class ConceptVocabulary:
    names: tuple[str, ...]
    embeddings: np.ndarray  # (K, 16), unit rows
    canonical: tuple[bool, ...]
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("concept names must be unique")
        self.embeddings.setflags(write=False)
        self._index.update({n: i for i, n in enumerate(self.names)})

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"concept {name!r} not in vocabulary") from None

    def subset(self, names) -> "ConceptVocabulary":
        idx = [self.index(n) for n in names]
        return ConceptVocabulary(
            tuple(self.names[i] for i in idx),
            self.embeddings[idx].copy(),
            tuple(self.canonical[i] for i in idx),
        )


def vocabulary_from_names(names) -> ConceptVocabulary:
    """Canonical names get their fixed embeddings, everything else is hashed."""
    names = tuple(names)
    canonical = tuple(n in CANONICAL_EMBEDDINGS for n in names)
    emb = np.zeros((len(names), DESCRIPTOR_DIM))
    others = [i for i, c in enumerate(canonical) if not c]
    if others:
        emb[others] = hashed_embeddings([names[i] for i in others])
    for i, c in enumerate(canonical):
        if c:
            emb[i] = CANONICAL_EMBEDDINGS[names[i]]
    return ConceptVocabulary(names, emb, canonical)


_ONSETS = ("b", "br", "c", "ch", "d", "f", "g", "gr", "h", "j", "k", "l", "m", "n", "p", "pl", "r", "s", "sh", "st", "t", "tr", "v", "w", "z")
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ea", "oo")
_CODAS = ("", "", "n", "r", "s", "t", "l", "m", "ck", "nd")
_NAME_BLOCK = 256


def distractor_names(count: int, seed: int = 0) -> list[str]:
    """Deterministic pronounceable pseudo-words, none of them canonical.

    Draws come in fixed blocks, so a shorter list is always a prefix of a
    longer one with the same seed.
    """
    rng = PCG32(seed, stream=0xD15)
    out: list[str] = []
    seen = set(CANONICAL_EMBEDDINGS)
    n_vo = len(_VOWELS)
    syllable = [o + v for o in _ONSETS for v in _VOWELS]
    while len(out) < count:
        u = rng.next_u32_array(_NAME_BLOCK * 8).reshape(_NAME_BLOCK, 8)
        syl = (u[:, 1:7:2] % len(_ONSETS)) * n_vo + u[:, 2:7:2] % n_vo
        three = (u[:, 0] % 2).astype(bool).tolist()
        coda = (u[:, 7] % len(_CODAS)).tolist()
        for (s0, s1, s2), t, c in zip(syl.tolist(), three, coda):
            word = syllable[s0] + syllable[s1] + (syllable[s2] if t else "") + _CODAS[c]
            if word not in seen:
                seen.add(word)
                out.append(word)
                if len(out) == count:
                    break
    return out


def default_vocabulary(n_distractors: int = 984, include_canonical: bool = True) -> ConceptVocabulary:
    names = list(CANONICAL_NAMES) if include_canonical else []
    return vocabulary_from_names(names + distractor_names(n_distractors))


def concept_embedding(name: str, vocab: ConceptVocabulary) -> np.ndarray:
    return vocab.embeddings[vocab.index(name)].copy()


def read_vocabulary(path: str | os.PathLike) -> ConceptVocabulary:
    """One concept name per line; blank lines and ``#`` comments are skipped."""
    with open(path, encoding="utf-8") as fh:
        names = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    return vocabulary_from_names(names)


def write_vocabulary(vocab: ConceptVocabulary, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("".join(n + "\n" for n in vocab.names))


# -- concept labels ------------------------------------------------------


@dataclass
class ConceptLabelMatrix:
    values: np.ndarray  # (N, K)
    image_ids: list
    concept_names: tuple[str, ...]
    zero_norm_rows: np.ndarray  # bool (N,), rows whose descriptor had zero norm


def normalize_rows(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(x, axis=1)
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    return x / safe[:, None], zero


def cosine_labels(descriptors: np.ndarray, vocab: ConceptVocabulary) -> tuple[np.ndarray, np.ndarray]:
    """Cosine similarity matrix from precomputed descriptors; zero-norm rows give 0."""
    unit, zero = normalize_rows(np.asarray(descriptors, dtype=np.float64))
    emb, _ = normalize_rows(vocab.embeddings)
    y = unit @ emb.T
    np.clip(y, -1.0, 1.0, out=y)
    return y, zero


def concept_label_matrix(images, vocab: ConceptVocabulary) -> ConceptLabelMatrix:
    if not len(images) or not len(vocab):
        raise ValueError("need at least one image and one concept")
    y, zero = cosine_labels(descriptor_matrix(images), vocab)
    return ConceptLabelMatrix(y, [img.seed for img in images], vocab.names, zero)


def write_label_matrix(y: ConceptLabelMatrix, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["image_id", *y.concept_names])
        for img_id, row in zip(y.image_ids, y.values):
            w.writerow([img_id, *(repr(float(v)) for v in row)])
