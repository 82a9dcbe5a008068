import numpy as np

from vcrank.evaluation.benchmark import ExperimentRow
from vcrank.evaluation.figures import (
    plot_concordance,
    plot_dot_effect,
    plot_grid_scatter,
    plot_per_pair_r,
    plot_timing,
    plot_top_concepts,
)
from vcrank.timing import TimingBreakdown
from vcrank.vcr_core import SensitivityRecord


def _recs():
    return [
        SensitivityRecord("red", np.array([1.0, 1.2, 0.9]), 1.03, 10.0, 1e-5, True, 1),
        SensitivityRecord("green", np.array([-0.5, -0.6, -0.4]), -0.5, -8.0, 1e-4, True, -1),
        SensitivityRecord("zork", np.array([0.1, -0.1, 0.0]), 0.0, 0.0, 1.0, False, 0),
    ]


def test_top_concepts_svg_is_deterministic(tmp_path):
    meta = {"config": {"a": 1}}
    assert plot_top_concepts(_recs(), tmp_path / "a.svg", description=meta) == 2
    plot_top_concepts(_recs(), tmp_path / "b.svg", description=meta)
    a, b = (tmp_path / "a.svg").read_bytes(), (tmp_path / "b.svg").read_bytes()
    assert a == b and a.lstrip().startswith(b"<?xml") and b"<svg" in a
    assert b"red" in a and b"zork" not in a and b"<dc:description>{\"config\": {\"a\": 1}}" in a


def test_empty_top_concepts(tmp_path):
    assert plot_top_concepts(_recs()[2:], tmp_path / "e.svg") == 0


def test_other_figures_render(tmp_path):
    rows = [ExperimentRow("red_green", r, 0, f, "red", r * s, r, r * 0.5, 1) for r in (-1.0, 1.0) for f, s in (("A", 1), ("B", -1))]
    plot_grid_scatter(rows, tmp_path / "g.svg")
    plot_per_pair_r({"per_pair": {"red_green": {"vcr_r": 0.9, "clip_r": None}}}, tmp_path / "p.svg")
    plot_concordance({"vcr_reliable": 1, "vcr_spurious": 0.9, "clip_reliable": 1, "clip_spurious": 0.2}, tmp_path / "c.svg")
    plot_timing({"K=500": TimingBreakdown(1, 2, 3, 4, 5), "K=20000": TimingBreakdown(1, 3, 3, 4, 5)}, tmp_path / "t.svg")
    plot_dot_effect(
        {"correlated": {"delta": 1.0, "replicate_deltas": [0.9, 1.1]}, "uncorrelated": {"delta": 0.0, "replicate_deltas": [0.01, -0.01]}},
        tmp_path / "d.svg",
    )
    for name in "gpctd":
        assert (tmp_path / f"{name}.svg").stat().st_size > 1000
