import csv
import math

import pytest

from vcrank.evaluation import (
    ADVERSARIAL_COLUMNS,
    GRID_COLUMNS,
    BenchmarkConfig,
    BenchmarkError,
    adversarial_summary,
    grid_summary,
    run_adversarial_benchmark,
    run_correlation_grid,
    write_rows_csv,
)
from vcrank.evaluation import benchmark as bm
from vcrank.evaluation.benchmark import fisher_z_mean
from vcrank.toy_lmm import TrainConfig
from vcrank.vcr_core import VcrConfig

SMALL = dict(n_train=40, n_test=40, train=TrainConfig(epochs=2), vcr=VcrConfig(bootstrap_B=3))


def test_grid_rows_shape_and_determinism():
    cfg = BenchmarkConfig(replicates=1, pairs=("red_green",), rhos=(-1.0, 1.0), **SMALL)
    rows = run_correlation_grid(cfg)
    assert len(rows) == 4
    assert {(r.rho_a, r.feature) for r in rows} == {(-1.0, "A"), (-1.0, "B"), (1.0, "A"), (1.0, "B")}
    assert {r.concept for r in rows} == {"red", "green"}
    bm.clear_caches()
    assert run_correlation_grid(cfg) == rows
    other = run_correlation_grid(BenchmarkConfig(seed=1, replicates=1, pairs=("red_green",), rhos=(-1.0, 1.0), **SMALL))
    assert [r.train_seed for r in other] != [r.train_seed for r in rows]
    s = grid_summary(rows)
    assert s["n_rows"] == 4 and "red_green" in s["per_pair"]


def test_grid_parallel_matches_serial():
    cfg = BenchmarkConfig(replicates=2, pairs=("red_green",), rhos=(1.0,), **SMALL)
    assert run_correlation_grid(cfg) == run_correlation_grid(BenchmarkConfig(jobs=2, replicates=2, pairs=("red_green",), rhos=(1.0,), **SMALL))


def test_adversarial_rows():
    cfg = BenchmarkConfig(replicates=1, pairs=("red_green", "left_right"), **SMALL)
    rows = run_adversarial_benchmark(cfg)
    assert len(rows) == 2 and {r.designation for r in rows} == {"reliable", "spurious"}
    s = adversarial_summary(rows)
    for key in ("vcr_reliable", "vcr_spurious", "clip_reliable", "clip_spurious"):
        assert 0.0 <= s[key] <= 1.0


def test_condition_failure_reports_completed(monkeypatch):
    real = bm.run_grid_condition

    def flaky(cfg, pair, rho, rep):
        if rho == 1.0:
            raise RuntimeError("boom")
        return real(cfg, pair, rho, rep)

    monkeypatch.setattr(bm, "run_grid_condition", flaky)
    cfg = BenchmarkConfig(replicates=1, pairs=("red_green",), rhos=(0.0, 1.0), **SMALL)
    with pytest.raises(BenchmarkError) as info:
        bm.run_correlation_grid(cfg)
    assert info.value.completed == [("red_green", 0.0, 0)]
    assert info.value.condition == ("red_green", 1.0, 0)


def test_rows_csv(tmp_path):
    cfg = BenchmarkConfig(replicates=1, pairs=("red_green",), rhos=(1.0,), **SMALL)
    rows = run_correlation_grid(cfg)
    write_rows_csv(rows, tmp_path / "g.csv", GRID_COLUMNS, comment="meta")
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[0] == "# meta" and lines[1] == ",".join(GRID_COLUMNS)
    parsed = list(csv.DictReader(lines[1:]))
    assert float(parsed[0]["vcr_psi"]) == rows[0].vcr_psi
    assert len(ADVERSARIAL_COLUMNS) == 9


def test_fisher_z_mean():
    assert fisher_z_mean([0.5, 0.5]) == pytest.approx(0.5)
    assert fisher_z_mean([None]) is None
    assert fisher_z_mean([0.2, 0.8]) == pytest.approx(math.tanh((math.atanh(0.2) + math.atanh(0.8)) / 2))


def test_config_validation():
    with pytest.raises(ValueError):
        BenchmarkConfig(replicates=0)
    with pytest.raises(KeyError):
        BenchmarkConfig(pairs=("nope",))
