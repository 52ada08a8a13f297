"""Kronecker powers and symmetric p-lifts.

The p-lift of a vector x in R^n is the vector of length C(n+p-1, p) whose
entries are sqrt(alpha!) * x**alpha over exponents alpha with |alpha| = p,
ordered lexicographically descending (``(p, 0, ..., 0)`` first).  The lift of
a matrix is the unique matrix with ``lift(A x) = lift(A) lift(x)``.

Two exact routes to the lifted matrix exist here.  The symmetrizer route
restricts the Kronecker power to the symmetric subspace, ``S A^{(x)p} S^T``,
and is used while ``n**p`` stays small.  The monomial route expands
``prod_r (a_r . x)**alpha_r`` directly; it only needs entry moments, so the
same code computes ``E[A^{[p]}]`` for matrices with independent entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionCapError

#: Largest side length allowed for a dense Kronecker power.
KRON_SIDE_CAP = 2**20

#: Above this side length ``lift_matrix`` switches to the monomial route.
SYMMETRIZER_SIDE_LIMIT = 1024


def kron(a, b):
    """Kronecker product with block ``(i, j)`` equal to ``a[i, j] * b``."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def kron_power(a, p, cap=KRON_SIDE_CAP):
    """Return ``a (x) a (x) ... (x) a`` with ``p`` factors.

    Raises :class:`DimensionCapError` when ``n**p`` exceeds ``cap``; callers
    should then work with :func:`lift_matrix` instead.
    """
    a = np.asarray(a, dtype=float)
    if p < 1:
        raise ValueError(f"p must be a positive integer, got {p}")
    n = a.shape[0]
    if n**p > cap:
        raise DimensionCapError(
            f"n**p = {n}**{p} exceeds the Kronecker side cap {cap}; use the symmetric lift"
        )
    out = a
    for _ in range(p - 1):
        out = np.kron(out, a)
    return out


def kron_power_vector(x, p):
    """``x (x) ... (x) x`` with ``p`` factors, applied along the last axis of a stack."""
    x = np.asarray(x, dtype=float)
    out = x
    for _ in range(p - 1):
        out = (out[..., :, None] * x[..., None, :]).reshape(x.shape[:-1] + (-1,))
    return out


def lift_dim(n, p):
    """Number of degree-``p`` monomials in ``n`` variables."""
    return math.comb(n + p - 1, p)


@lru_cache(maxsize=None)
def _compositions(n, k):
    # All exponent vectors of length n summing to k, lexicographically descending.
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for first in range(remaining, -1, -1):
            rec(prefix + (first,), remaining - first, slots - 1)

    rec((), k, n)
    arr = np.array(out, dtype=np.int64).reshape(len(out), n)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _multinomials(n, k):
    comps = _compositions(n, k)
    fk = math.factorial(k)
    vals = np.array(
        [fk // math.prod(math.factorial(int(e)) for e in row) for row in comps],
        dtype=float,
    )
    vals.setflags(write=False)
    return vals


@dataclass(frozen=True)
class LiftIndex:
    """One coordinate of a p-lift: its exponent, position and sqrt-multinomial weight."""

    exponent: tuple
    position: int
    weight: float


def lift_indices(n, p):
    comps = _compositions(n, p)
    weights = np.sqrt(_multinomials(n, p))
    return [
        LiftIndex(tuple(int(e) for e in row), i, float(w))
        for i, (row, w) in enumerate(zip(comps, weights))
    ]


def lift_vector(x, p):
    """p-lift of a vector: entries ``sqrt(alpha!) * x**alpha``."""
    x = np.asarray(x, dtype=float)
    if p < 1:
        raise ValueError(f"p must be a positive integer, got {p}")
    n = x.shape[-1]
    comps = _compositions(n, p)
    w = np.sqrt(_multinomials(n, p))
    # x[..., None, :] ** comps -> (..., n_p, n)
    return w * np.prod(x[..., None, :] ** comps, axis=-1)


def tensor_digits(n, p):
    """Row ``i`` holds the base-``n`` digits (most significant first) of tensor index ``i``."""
    idx = np.arange(n**p, dtype=np.int64)
    powers = n ** np.arange(p - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % n


@lru_cache(maxsize=64)
def _symmetrizer_cached(n, p):
    comps = _compositions(n, p)
    lookup = {tuple(row): i for i, row in enumerate(comps.tolist())}
    side = n**p
    digits = tensor_digits(n, p)
    counts = np.zeros((side, n), dtype=np.int64)
    for c in range(n):
        counts[:, c] = (digits == c).sum(axis=1)
    rows = np.array([lookup[tuple(row)] for row in counts.tolist()])
    mult = _multinomials(n, p)
    S = np.zeros((len(comps), side))
    S[rows, np.arange(side)] = 1.0 / np.sqrt(mult[rows])
    S.setflags(write=False)
    return S


def symmetrizer(n, p):
    """Isometry ``S`` (n_p x n**p) onto the symmetric tensors.

    Row ``alpha`` is the normalized sum of the tensor basis vectors whose index
    multiset has counts ``alpha``, so ``S @ kron_power_vector(x, p)`` equals
    ``lift_vector(x, p)`` and ``S @ S.T`` is the identity.
    """
    return _symmetrizer_cached(n, p)


def _product_index(n, j, k):
    # Position in degree-(j+k) order of e_a + e_b for every degree-j e_a, degree-k e_b.
    return _product_index_cached(n, j, k)


@lru_cache(maxsize=4096)
def _product_index_cached(n, j, k):
    base = j + k + 1
    if base ** n >= 2**62:
        raise OverflowError("monomial keys do not fit in int64")
    w = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    target = _compositions(n, j + k) @ w  # strictly descending
    keys = (_compositions(n, j) @ w)[:, None] + (_compositions(n, k) @ w)[None, :]
    idx = len(target) - 1 - np.searchsorted(target[::-1], keys)
    idx.setflags(write=False)
    return idx


def _poly_mul(a, j, b, k, n):
    if j == 0:
        return a[0] * b
    if k == 0:
        return b[0] * a
    idx = _product_index(n, j, k)
    return np.bincount(
        idx.ravel(), weights=np.outer(a, b).ravel(), minlength=lift_dim(n, j + k)
    )


def lift_from_moments(moments, p):
    """Expected p-lift of a random matrix with independent entries.

    ``moments[r, c, m]`` must hold ``E[a_rc**m]`` for ``m = 0..p``.  For a
    deterministic matrix pass ``A[..., None] ** arange(p + 1)``; the result is
    then exactly ``lift_matrix(A, p)``.
    """
    moments = np.asarray(moments, dtype=float)
    n = moments.shape[0]
    if moments.shape[2] < p + 1:
        raise ValueError("moments must cover exponents 0..p")
    # row_polys[r][k]: coefficients of E[(a_r . x)**k] in the degree-k basis
    row_polys = []
    for r in range(n):
        polys = []
        for k in range(p + 1):
            comps = _compositions(n, k)
            coef = _multinomials(n, k) * np.prod(
                moments[r, np.arange(n)[None, :], comps], axis=1
            )
            polys.append(coef)
        row_polys.append(polys)

    comps_p = _compositions(n, p)
    sqrt_mult = np.sqrt(_multinomials(n, p))
    out = np.empty((len(comps_p), len(comps_p)))
    for i, alpha in enumerate(comps_p.tolist()):
        acc, deg = np.ones(1), 0
        for r, k in enumerate(alpha):
            acc = _poly_mul(acc, deg, row_polys[r][k], k, n)
            deg += k
        out[i] = acc * sqrt_mult[i] / sqrt_mult
    return out


def lift_matrix(a, p, method="auto"):
    """p-lift of a square matrix, satisfying ``lift_vector(a @ x) == lift_matrix(a) @ lift_vector(x)``.

    ``method`` is ``"symmetrizer"`` (``S a^{(x)p} S^T``), ``"monomial"``
    (direct expansion) or ``"auto"``, which picks the symmetrizer while
    ``n**p <= SYMMETRIZER_SIDE_LIMIT``.
    """
    a = np.asarray(a, dtype=float)
    if p < 1:
        raise ValueError(f"p must be a positive integer, got {p}")
    n = a.shape[0]
    if method == "auto":
        method = "symmetrizer" if n**p <= SYMMETRIZER_SIDE_LIMIT else "monomial"
    if method == "symmetrizer":
        S = symmetrizer(n, p)
        return S @ kron_power(a, p) @ S.T
    if method == "monomial":
        return lift_from_moments(a[..., None] ** np.arange(p + 1), p)
    raise ValueError(f"unknown method {method!r}")
