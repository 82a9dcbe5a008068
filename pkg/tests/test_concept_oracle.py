from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from vcrank.concept_oracle import (
    CANONICAL_NAMES,
    DESCRIPTOR_DIM,
    FOREGROUND_THRESHOLD,
    concept_embedding,
    concept_label_matrix,
    cosine_labels,
    default_vocabulary,
    descriptor_with_stats,
    distractor_names,
    image_descriptor,
    read_vocabulary,
    vocabulary_from_names,
    write_label_matrix,
    write_vocabulary,
)
from vcrank.synthgen import PAIR_IDS, PAIRS, DatasetConfig, build_balanced_test_set, render_feature_image
from vcrank.synthgen.images import Image, blank_image


def _brute_foreground(px: np.ndarray) -> np.ndarray:
    colors, counts = np.unique(px.reshape(-1, 3), axis=0, return_counts=True)
    mode = colors[np.argmax(counts)].astype(int)
    return np.any(np.abs(px.astype(int) - mode) > FOREGROUND_THRESHOLD, axis=2)


def _flood_fill_count(fg: np.ndarray) -> int:
    seen = np.zeros_like(fg)
    h, w = fg.shape
    count = 0
    for y0 in range(h):
        for x0 in range(w):
            if fg[y0, x0] and not seen[y0, x0]:
                count += 1
                seen[y0, x0] = True
                q = deque([(y0, x0)])
                while q:
                    y, x = q.popleft()
                    for v, u in ((y + 1, x), (y - 1, x), (y, x + 1), (y, x - 1)):
                        if 0 <= v < h and 0 <= u < w and fg[v, u] and not seen[v, u]:
                            seen[v, u] = True
                            q.append((v, u))
    return count


def test_uniform_gray_descriptor():
    d, st_ = descriptor_with_stats(blank_image(217))
    assert st_.n_components == 0 and st_.fill_pixels == 0
    assert d[8] == 0 and d[11] == 0
    assert np.all(np.isfinite(d)) and d.shape == (DESCRIPTOR_DIM,)


@pytest.mark.parametrize(("pair", "a", "b", "seed"), [(p, a, b, s) for p in PAIR_IDS for a, b in ((1, 0), (0, 1), (1, 1)) for s in (0,)])
def test_component_count_matches_flood_fill(pair, a, b, seed):
    img = render_feature_image(pair, bool(a), bool(b), seed)
    _, st_ = descriptor_with_stats(img)
    fg = _brute_foreground(img.pixels)
    assert st_.fill_pixels == int(fg.sum())
    assert st_.n_components == _flood_fill_count(fg)


@pytest.mark.parametrize("seed", range(5))
def test_red_image_has_more_red_than_green(seed):
    d = image_descriptor(render_feature_image("red_green", True, False, seed))
    assert d[0] > d[1]


@pytest.mark.parametrize("seed", range(5))
def test_cluster_has_many_components(seed):
    _, st_ = descriptor_with_stats(render_feature_image("one_many", False, True, seed))
    assert st_.n_components >= 6


def test_hollow_ellipse_has_enclosed_background():
    _, st_ = descriptor_with_stats(render_feature_image("empty_filled", True, False, 2))
    assert st_.hole_pixels > 500


def test_canonical_embeddings():
    vocab = default_vocabulary()
    assert len(vocab) == 1000 and sum(vocab.canonical) == 16
    left, right = concept_embedding("left", vocab), concept_embedding("right", vocab)
    assert np.array_equal(left, concept_embedding("left", vocab))
    assert float(left @ right) == pytest.approx(-1.0, abs=1e-15)
    for p in PAIRS.values():
        assert p.concept_name_a in CANONICAL_NAMES and p.concept_name_b in CANONICAL_NAMES
    with pytest.raises(KeyError):
        concept_embedding("not-a-concept", vocab)


@settings(max_examples=50, deadline=None)
@given(st.text(min_size=1, max_size=20).filter(lambda s: s not in CANONICAL_NAMES))
def test_hashed_embeddings_are_unit_and_stable(name):
    v = vocabulary_from_names([name])
    assert np.linalg.norm(v.embeddings[0]) == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(v.embeddings, vocabulary_from_names([name]).embeddings)


def test_zebra_unit_norm():
    v = vocabulary_from_names(["zebra"]).embeddings[0]
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12


def test_duplicate_names_rejected():
    with pytest.raises(ValueError):
        vocabulary_from_names(["red", "red"])


def test_distractor_names_unique_and_deterministic():
    names = distractor_names(300, seed=0)
    assert len(set(names)) == 300 and names == distractor_names(300, seed=0)
    assert not set(names) & set(CANONICAL_NAMES)


def test_label_matrix_matches_explicit_cosine():
    rng = np.random.default_rng(0)
    imgs = [render_feature_image(PAIR_IDS[i % 8], bool(rng.integers(2)), bool(rng.integers(2)), i) for i in range(30)]
    vocab = default_vocabulary(34)
    y = concept_label_matrix(imgs, vocab)
    for i, img in enumerate(imgs):
        d = image_descriptor(img)
        assert y.zero_norm_rows[i] == (np.linalg.norm(d) == 0)
        for k in range(len(vocab)):
            e = vocab.embeddings[k]
            nd = np.linalg.norm(d)
            expected = d @ e / (nd * np.linalg.norm(e)) if nd else 0.0
            assert y.values[i, k] == pytest.approx(expected, abs=1e-12)
    assert np.all(np.abs(y.values) <= 1.0)


def test_duplicate_rows_identical_and_zero_norm_flagged():
    img = render_feature_image("red_green", True, False, 0)
    vocab = default_vocabulary(10)
    y = concept_label_matrix([img, img], vocab)
    assert np.array_equal(y.values[0], y.values[1])
    vals, zero = cosine_labels(np.zeros((2, DESCRIPTOR_DIM)), vocab)
    assert np.all(vals == 0) and zero.all()
    with pytest.raises(ValueError):
        concept_label_matrix([], vocab)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.floats(-1e6, 1e6), min_size=16, max_size=16), min_size=1, max_size=10))
def test_cosine_bounds(rows):
    vals, _ = cosine_labels(np.array(rows), default_vocabulary(20))
    assert np.all(np.abs(vals) <= 1.0)


@pytest.fixture(scope="module")
def balanced_sets():
    return {p: build_balanced_test_set(DatasetConfig(p, base_seed=1)) for p in PAIR_IDS}


@pytest.mark.parametrize("pair", PAIR_IDS)
def test_canonical_concepts_are_discriminative(pair, balanced_sets):
    data = balanced_sets[pair]
    fpair = PAIRS[pair]
    vocab = vocabulary_from_names([fpair.concept_name_a, fpair.concept_name_b])
    y = concept_label_matrix(data.images, vocab).values
    assert y[data.has_a, 0].mean() - y[~data.has_a, 0].mean() > 0
    assert y[data.has_b, 1].mean() - y[~data.has_b, 1].mean() > 0


def test_distractor_labels_independent_of_class(balanced_sets):
    # on balanced sets the label is independent of the rendered content
    vocab = vocabulary_from_names(distractor_names(40, seed=3))
    rejections = 0
    for pair in ("red_green", "square_circle"):
        data = balanced_sets[pair]
        y = concept_label_matrix(data.images, vocab).values
        pos = data.labels == 1
        for k in range(len(vocab)):
            rejections += stats.ttest_ind(y[pos, k], y[~pos, k]).pvalue < 0.01
    assert rejections <= 2  # 80 tests at alpha = 0.01


def test_vocabulary_file_round_trip(tmp_path):
    vocab = default_vocabulary(5)
    p = tmp_path / "v.txt"
    write_vocabulary(vocab, p)
    p.write_text("# comment\n\n" + p.read_text())
    back = read_vocabulary(p)
    assert back.names == vocab.names and np.array_equal(back.embeddings, vocab.embeddings)


def test_label_matrix_csv(tmp_path):
    vocab = vocabulary_from_names(["red", "green"])
    y = concept_label_matrix([render_feature_image("red_green", True, False, 0)], vocab)
    p = tmp_path / "y.csv"
    write_label_matrix(y, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "image_id,red,green" and len(lines) == 2


def test_foreground_ignores_small_deviations():
    px = np.full((224, 224, 3), 210, dtype=np.uint8)
    px[10:20, 10:20] = 235  # within threshold
    px[50:60, 50:60] = 100
    d, st_ = descriptor_with_stats(Image(px, False, False, 0))
    assert st_.fill_pixels == 100 and st_.n_components == 1
