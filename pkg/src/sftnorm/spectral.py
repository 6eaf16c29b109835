"""Dominant eigenvalue and eigenvectors of nonnegative irreducible matrices.

Plain power iteration with the all-ones start vector (never orthogonal to
the dominant eigenvector of a nonnegative irreducible matrix).  Matrices
that are irreducible but periodic make plain iteration oscillate; in that
case the iteration restarts on M + I, which has the same eigenvectors and
shifts the eigenvalue by exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .sft import ShiftSpec, is_irreducible

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1_000_000
_PLAIN_ITER = 20_000


@dataclass(frozen=True)
class PerronData:
    """Dominant eigenvalue with positive left/right eigenvectors.

    Vectors are scaled so that left @ right == 1; residual is the larger of
    the two infinity-norm eigen-equation defects on the stored vectors.
    """

    eigenvalue: float
    left: np.ndarray
    right: np.ndarray
    residual: float
    iterations: int
    used_shift: bool


def perron(spec: ShiftSpec, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> PerronData:
    """Power-iterate M and its transpose until eigenvalue and residual settle."""
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    if not is_irreducible(spec):
        raise ValidationError("matrix is not irreducible")
    m = spec.matrix_array().astype(np.float64)

    used_shift = False
    try:
        lam_r, right, it_r = _power_iterate(m, tol, min(_PLAIN_ITER, max_iter))
        lam_l, left, it_l = _power_iterate(m.T, tol, min(_PLAIN_ITER, max_iter))
    except ConvergenceError:
        # Oscillation (periodic matrix): iterate on M + I, same eigenvectors.
        shifted = m + np.eye(m.shape[0])
        lam_r, right, it_r = _power_iterate(shifted, tol, max_iter)
        lam_l, left, it_l = _power_iterate(shifted.T, tol, max_iter)
        lam_r -= 1.0
        lam_l -= 1.0
        used_shift = True

    lam = 0.5 * (lam_r + lam_l)
    scale = float(left @ right)
    if scale <= 0:
        raise ConvergenceError("left/right eigenvector scaling degenerate")
    left = left / scale

    residual = max(
        float(np.max(np.abs(m @ right - lam * right))),
        float(np.max(np.abs(left @ m - lam * left))),
    )
    # Loose factor: the left vector is amplified by the 1/scale rescaling.
    if residual > tol * max(4.0, 2.0 / scale):
        raise ConvergenceError(f"residual {residual:.3e} above tolerance {tol:.3e}")
    return PerronData(
        eigenvalue=lam,
        left=left,
        right=right,
        residual=residual,
        iterations=it_r + it_l,
        used_shift=used_shift,
    )


def _power_iterate(m: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray, int]:
    n = m.shape[0]
    v = np.ones(n) / n
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = m @ v
        norm = float(w.sum())  # positive vectors: 1-norm is the plain sum
        if norm == 0.0:
            raise ConvergenceError("matrix annihilated the iterate")
        new_lam = float(v @ w) / float(v @ v)
        v = w / norm
        if abs(new_lam - lam) < tol and float(np.max(np.abs(m @ v - new_lam * v))) < tol:
            return new_lam, v, it
        lam = new_lam
    raise ConvergenceError(f"no convergence in {max_iter} iterations")
