"""Cone machinery on the nonnegative orthant.

For ``K = R^n_+`` a matrix leaves ``K`` invariant iff it is entrywise
nonnegative, and the cone linear absolute norm with weight ``f > 0`` is the
weighted L1 norm ``sum_i f_i |x_i|``.
"""

from __future__ import annotations

import numpy as np


class ConeWeight(np.ndarray):
    """A strictly positive weight vector ``f`` (an interior point of the dual cone)."""

    def __new__(cls, f):
        arr = np.array(f, dtype=float).reshape(-1)
        if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError(f"cone weight must be finite and strictly positive, got {arr}")
        arr.setflags(write=False)
        return arr.view(cls)


def is_k_nonnegative(a, tol=0.0):
    """True iff ``a`` maps the orthant into itself, up to a slack of ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return bool(np.all(np.asarray(a) >= -tol))


def is_k_positive(a):
    return bool(np.all(np.asarray(a) > 0))


def cone_norm(x, w):
    """Weighted L1 norm ``sum_i w_i |x_i|``; works on stacked vectors along the last axis."""
    w = ConeWeight(w)
    return np.abs(np.asarray(x, dtype=float)) @ np.asarray(w)


def cone_operator_norm(a, w):
    """Norm of ``a`` induced by :func:`cone_norm`.

    Closed form ``max_j sum_i w_i |a_ij| / w_j``; for nonnegative ``a`` the
    supremum over the orthant is attained on the coordinate rays, which gives
    the same expression.
    """
    w = np.asarray(ConeWeight(w))
    a = np.asarray(a, dtype=float)
    return float(np.max((w @ np.abs(a)) / w))


def left_perron_vector(m):
    """Positive left eigenvector of a nonnegative matrix for its spectral radius.

    Normalized so the last component is 1.  Only meaningful when the Perron
    vector is strictly positive (e.g. ``m`` entrywise positive).
    """
    m = np.asarray(m, dtype=float)
    vals, vecs = np.linalg.eig(m.T)
    i = int(np.argmax(vals.real))
    v = np.abs(vecs[:, i].real)
    return v / v[-1]
