import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vcrank.vcr_core import (
    DegenerateConceptError,
    SingularSystemError,
    factorized_directions,
    fit_cav,
    ridge_dual,
    ridge_primal,
    ridge_solve,
)


def conjugate_gradient_ridge(a, y, lam, iters=500):
    """Minimise |y - A w|^2 + lam |w|^2 by conjugate gradients on the objective."""
    w = np.zeros(a.shape[1])
    r = a.T @ y - (a.T @ (a @ w) + lam * w)  # negative gradient / 2
    p = r.copy()
    for _ in range(iters):
        hp = a.T @ (a @ p) + lam * p
        denom = p @ hp
        if denom <= 0 or r @ r < 1e-30:
            break
        step = (r @ r) / denom
        w = w + step * p
        r_new = r - step * hp
        p = r_new + (r_new @ r_new) / (r @ r) * p
        r = r_new
    return w


def test_scalar_example():
    cav = fit_cav(np.array([[1.0], [2.0]]), np.array([1.0, 2.0]), lam=1.0, center=False)
    assert cav.raw_weights[0] == pytest.approx(5 / 6, abs=1e-15)
    assert cav.unit_vector[0] == pytest.approx(1.0)


def test_heavy_shrinkage():
    rng = np.random.default_rng(0)
    a, y = rng.normal(size=(30, 5)), rng.normal(size=30)
    assert np.linalg.norm(fit_cav(a, y, lam=1e12).raw_weights) < 1e-6


@pytest.mark.parametrize("seed", range(50))
def test_closed_form_equals_iterative_minimiser(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(2, 21)), int(rng.integers(1, 9))
    a, y = rng.normal(size=(n, d)), rng.normal(size=n)
    lam = float(rng.uniform(0.1, 3.0))
    center = bool(seed % 2)
    cav = fit_cav(a, y, lam=lam, center=center)
    ac, yc = (a - a.mean(0), y - y.mean()) if center else (a, y)
    assert np.max(np.abs(cav.raw_weights - conjugate_gradient_ridge(ac, yc, lam))) < 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_primal_dual_agree(seed):
    rng = np.random.default_rng(seed)
    a, y = rng.normal(size=(20, 64)), rng.normal(size=20)
    assert np.max(np.abs(ridge_primal(a, y, 1.0) - ridge_dual(a, y, 1.0))) < 1e-8
    a2 = rng.normal(size=(80, 10))
    y2 = rng.normal(size=80)
    assert np.max(np.abs(ridge_primal(a2, y2, 0.5) - ridge_dual(a2, y2, 0.5))) < 1e-8


def test_solver_dispatch():
    rng = np.random.default_rng(3)
    a, y = rng.normal(size=(5, 12)), rng.normal(size=5)
    assert np.allclose(ridge_solve(a, y, 1.0), ridge_dual(a, y, 1.0), atol=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.01, 100))
def test_unit_norm_and_label_scaling(seed, c):
    rng = np.random.default_rng(seed)
    a, y = rng.normal(size=(15, 6)), rng.normal(size=15)
    v = fit_cav(a, y).unit_vector
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(fit_cav(a, c * y).unit_vector, v, atol=1e-9)
    w = fit_cav(a, y).raw_weights
    assert np.allclose(v, w / np.linalg.norm(w), atol=1e-12)


def test_singular_at_zero_penalty():
    a = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(SingularSystemError):
        fit_cav(a, np.array([1.0, 2.0, 3.0]), lam=0.0, center=False)
    # nonsingular systems are fine at lam = 0
    a2 = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    cav = fit_cav(a2, np.array([1.0, 2.0, 3.0]), lam=0.0, center=False)
    assert np.allclose(cav.raw_weights, np.linalg.lstsq(a2, [1.0, 2.0, 3.0], rcond=None)[0])


def test_input_validation():
    a = np.ones((4, 3))
    with pytest.raises(ValueError):
        fit_cav(a, np.array([1.0, np.nan, 0.0, 1.0]))
    with pytest.raises(ValueError):
        fit_cav(np.array([[np.nan, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        fit_cav(a, np.ones(3))
    with pytest.raises(ValueError):
        fit_cav(np.ones((1, 3)), np.ones(1))
    with pytest.raises(ValueError):
        fit_cav(np.eye(3), np.ones(3), lam=-1.0)
    with pytest.raises(DegenerateConceptError):
        fit_cav(np.random.default_rng(0).normal(size=(5, 2)), np.ones(5))


def test_r2_perfect_fit():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(50, 3))
    y = a @ np.array([1.0, -2.0, 0.5])
    assert fit_cav(a, y, lam=1e-10).fit_r2 == pytest.approx(1.0, abs=1e-9)


def test_factorized_matches_per_column_fits():
    rng = np.random.default_rng(5)
    a, u = rng.normal(size=(25, 8)), rng.normal(size=(25, 4))
    g = factorized_directions(a, u, 1.0)
    for j in range(4):
        assert np.allclose(g[:, j], fit_cav(a, u[:, j]).raw_weights, atol=1e-12)
