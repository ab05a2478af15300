"""Numeric nullspaces of sampled linear operators (SVD thresholding)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from odelie.expr import Expr, add, mul, num


class InsufficientSamples(ValueError):
    pass


@dataclass
class NullspaceResult:
    basis: list
    vectors: np.ndarray  # (dimension, len(basis)), orthonormal rows
    singular_values: np.ndarray
    reports: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[0])

    def combination(self, i: int) -> Expr:
        return combine(self.basis, self.vectors[i])

    def all_verified(self) -> bool:
        return all(r.passed for r in self.reports)


def combine(basis, coeffs, cutoff: float = 1e-12) -> Expr:
    """Sum c_j * basis_j with the float coefficients converted exactly."""
    coeffs = np.asarray(coeffs, dtype=float)
    big = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    terms = [mul(num(float(c)), b) for c, b in zip(coeffs, basis) if abs(c) > cutoff * big]
    return add(*terms) if terms else num(0)


def sampled_nullspace(values: np.ndarray, mags: np.ndarray, rank_tol: float = 1e-8):
    """Orthonormal basis of the numeric nullspace of a sampled matrix.

    ``values[i, j]`` is basis function j's residual at sample i and ``mags`` the
    matching rounding-error magnitudes.  Each column is scaled to unit RMS,
    but never by less than sqrt(rank_tol) times its largest magnitude, so a
    column that is zero up to rounding stays far below the threshold while
    genuinely nonzero columns are equilibrated.  Singular values below
    ``rank_tol * max(sigma_max, 1)`` count as null.
    """
    good = np.all(np.isfinite(values), axis=1) & np.all(np.isfinite(mags), axis=1)
    values, mags = values[good], mags[good]
    rows, cols = values.shape
    if rows < cols + 5:
        raise InsufficientSamples(f"{rows} finite samples for {cols} unknowns; need at least {cols + 5}")
    rms = np.sqrt(np.mean(values**2, axis=0))
    scale = np.maximum(rms, np.sqrt(rank_tol) * np.max(1.0 + mags, axis=0))
    A = values / scale / np.sqrt(rows)
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    thresh = rank_tol * max(s.max() if s.size else 0.0, 1.0)
    null = vt[int(np.sum(s > thresh)) :]  # rows span the scaled nullspace
    if null.shape[0] == 0:
        return np.zeros((0, cols)), s
    # columns with negligible weight in every null vector only leak noise
    # (amplified by the unscaling below); solve again without them
    keep = np.linalg.norm(null, axis=0) > np.sqrt(rank_tol)
    if not keep.all():
        null = _scaled_null(A[:, keep], rank_tol)
    out = np.zeros((null.shape[0], cols))
    if null.shape[0] == 0:
        return out, s
    # undo column scaling, then re-orthonormalize over the kept columns only
    q, _ = np.linalg.qr((null / scale[keep]).T)
    out[:, keep] = q.T
    return out, s


def _scaled_null(A: np.ndarray, rank_tol: float) -> np.ndarray:
    if A.shape[1] == 0:
        return np.zeros((0, 0))
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    thresh = rank_tol * max(s.max(), 1.0)
    return vt[int(np.sum(s > thresh)) :]


def span_residual(vectors: np.ndarray, target) -> float:
    """Relative distance of ``target`` from the row span of ``vectors``."""
    t = np.asarray(target, dtype=float)
    nt = np.linalg.norm(t)
    if nt == 0:
        return 0.0
    if vectors.shape[0] == 0:
        return 1.0
    q, _ = np.linalg.qr(vectors.T)
    proj = q @ (q.T @ t)
    return float(np.linalg.norm(t - proj) / nt)
