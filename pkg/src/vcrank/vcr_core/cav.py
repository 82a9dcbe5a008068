"""Ridge-regression concept activation vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg


class SingularSystemError(ValueError):
    """The ridge normal equations have no unique solution."""


class DegenerateConceptError(ValueError):
    """The fitted weights are exactly zero, so no unit direction exists."""


@dataclass(frozen=True)
class ConceptVector:
    concept_name: str
    raw_weights: np.ndarray
    unit_vector: np.ndarray
    lam: float
    fit_r2: float


def _as_matrix(a) -> np.ndarray:
    values = getattr(a, "values", a)
    return np.asarray(values, dtype=np.float64)


def _cholesky(m: np.ndarray):
    try:
        c, lower = linalg.cho_factor(m, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularSystemError("ridge system is not positive definite") from exc
    diag = np.abs(np.diag(c))
    scale = max(float(np.max(np.diag(m))), np.finfo(float).tiny)
    if float(np.min(diag)) ** 2 <= m.shape[0] * np.finfo(float).eps * scale:
        raise SingularSystemError("ridge system is numerically singular")
    return c, lower


def ridge_primal(a: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """(A^T A + lam I)^{-1} A^T y; ``y`` may hold several right-hand sides."""
    m = a.T @ a
    m[np.diag_indices_from(m)] += lam
    return linalg.cho_solve(_cholesky(m), a.T @ y, check_finite=False)


def ridge_dual(a: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """A^T (A A^T + lam I)^{-1} y, the same solution via the N x N Gram matrix."""
    k = a @ a.T
    k[np.diag_indices_from(k)] += lam
    return a.T @ linalg.cho_solve(_cholesky(k), y, check_finite=False)


def ridge_solve(a: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Pick whichever normal-equation form has the smaller system."""
    n, d = a.shape
    return ridge_dual(a, y, lam) if d > n else ridge_primal(a, y, lam)


def _validate(a: np.ndarray, lam: float) -> None:
    if a.ndim != 2:
        raise ValueError("activation matrix must be 2-D")
    if a.shape[0] < 2:
        raise ValueError("need at least two rows to fit a concept vector")
    if not np.isfinite(a).all():
        raise ValueError("activations contain NaN or infinite values")
    if not lam >= 0 or not np.isfinite(lam):
        raise ValueError(f"ridge penalty must be a finite value >= 0, got {lam}")


def fit_cav(a, y, lam: float = 1.0, center: bool = True, concept_name: str = "") -> ConceptVector:
    """Fit the ridge direction mapping activations to concept labels.

    With ``center`` the columns of ``a`` and the labels are mean-centred first,
    which makes the fit intercept-free.
    """
    a = _as_matrix(a)
    y = np.asarray(y, dtype=np.float64).ravel()
    _validate(a, lam)
    if y.shape[0] != a.shape[0]:
        raise ValueError(f"label length {y.shape[0]} != activation rows {a.shape[0]}")
    if not np.isfinite(y).all():
        raise ValueError("labels contain NaN or infinite values")
    if center:
        a = a - a.mean(axis=0)
        y = y - y.mean()
    w = ridge_solve(a, y, lam)
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        raise DegenerateConceptError(f"concept {concept_name!r}: labels carry no signal, direction undefined")
    resid = y - a @ w
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 0.0
    return ConceptVector(concept_name, w, w / norm, float(lam), r2)


def factorized_directions(a: np.ndarray, u: np.ndarray, lam: float, center: bool = True) -> np.ndarray:
    """Ridge weights for every label column of ``Y = u @ phi.T`` at once.

    Because the solution is linear in the labels, W = G @ phi.T with
    G = ridge(a, u). Returns G (D x r); the caller projects onto concept
    embeddings without materialising the N x K label matrix.
    """
    a = np.asarray(a, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    _validate(a, lam)
    if center:
        a = a - a.mean(axis=0)
        u = u - u.mean(axis=0)
    return ridge_solve(a, u, lam)
