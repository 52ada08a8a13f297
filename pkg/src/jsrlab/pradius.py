"""p-radius of a matrix distribution.

Exact values use ``rho(E[A^{(x)p}])**(1/p)``, which is valid when ``p`` is
even (A1) or the support leaves the nonnegative orthant invariant (A2).  The
Monte Carlo estimator evaluates the defining limit at a finite horizon.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import tensor
from .dist import (
    FINITE,
    expected_kron_power,
    expected_lift_matrix,
    rng_stream,
    sample_many,
    support_is_cone_invariant,
)
from .errors import AssumptionViolated, EigensolverFailure

EXACT_EVEN = "ExactEven"
EXACT_CONE = "ExactCone"
EXACT_LIFTED = "ExactLifted"
MONTE_CARLO = "MonteCarloDefinitional"

DENSE_EIG_LIMIT = 512
RESCALE_EVERY = 8


@dataclass
class PRadiusResult:
    p: int
    value: float
    method: str
    assumption_used: str  # "A1", "A2" or "none"
    diagnostics: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


def spectral_radius(m, dense_limit=DENSE_EIG_LIMIT, tol=1e-10, max_iters=10_000):
    """Spectral radius by a dense eigensolve, or power iteration for large matrices.

    Power iteration starts from the all-ones vector and, for nonnegative
    matrices, runs on ``m + s I`` so that the Perron root is strictly
    dominant even for periodic matrices.
    """
    m = np.asarray(m, dtype=float)
    side = m.shape[0]
    nonneg = bool(np.all(m >= 0))
    if side <= dense_limit:
        if not side:
            return 0.0
        if nonneg:
            return _perron_root_dense(m)
        return float(np.max(np.abs(np.linalg.eigvals(m))))
    shift = float(np.abs(m).sum(axis=1).max()) * 0.5 if nonneg else 0.0
    x = np.ones(side) / math.sqrt(side)
    prev = None
    for _ in range(max_iters):
        y = m @ x + shift * x
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        est = float(x @ y) - shift if nonneg else float(ny)
        x = y / ny
        if prev is not None and abs(est - prev) <= tol * max(1.0, abs(est)):
            return abs(est)
        prev = est
    raise EigensolverFailure(f"power iteration did not converge in {max_iters} iterations")


CW_RTOL = 1e-12
MAX_SQUARINGS = 64


def _perron_root_dense(m):
    # A dense eigensolver is only normwise accurate, and near-defective
    # clusters (common in Kronecker powers) lose up to eps**(1/size).  The
    # Perron root of a nonnegative matrix is well conditioned entrywise, so
    # accept the eigenvalue only when Collatz-Wielandt bounds from its
    # eigenvector certify it, else fall back to repeated squaring.
    vals, vecs = np.linalg.eig(m)
    i = int(np.argmax(np.abs(vals)))
    rho = float(abs(vals[i]))
    x = np.abs(vecs[:, i].real)
    if rho > 0 and np.all(x > 0):
        r = (m @ x) / x
        lo, hi = float(r.min()), float(r.max())
        if hi - lo <= CW_RTOL * hi:
            return min(max(rho, lo), hi)
    return _perron_root_squaring(m)


def _perron_root_squaring(m):
    """``rho = lim ||M^k||**(1/k)`` along ``k = 2**j`` for nonnegative ``M``.

    Products of nonnegative matrices keep entrywise relative accuracy, and
    the relative error of the root stays near ``n * eps``.  Each square is
    rescaled by its largest entry and the scale is carried in log space.
    """
    P = np.array(m, dtype=float)
    ell = 0.0  # log of the scale removed so far, divided by the current power
    est = None
    for j in range(MAX_SQUARINGS + 1):
        s = float(P.max())
        if s == 0.0:
            return 0.0
        P /= s
        ell += math.log(s) / 2.0**j
        new = math.exp(ell + math.log(float(P.sum(axis=1).max())) / 2.0**j)
        if est is not None and abs(new - est) <= 4 * np.finfo(float).eps * new:
            return new
        est = new
        P = P @ P
    return est


def _check_assumptions(d, p):
    even = p % 2 == 0
    cone = support_is_cone_invariant(d)
    if not (even or cone):
        raise AssumptionViolated(
            f"p = {p} is odd (A1 fails) and the support does not leave the "
            "nonnegative orthant invariant (A2 fails)"
        )
    return even, cone


def _pair_matrix(d, p):
    # E[B (x) B] with B = A^{[p/2]}; its spectral radius is rho_{p,mu}**p
    q = p // 2
    if d.kind == FINITE:
        lifts = [tensor.lift_matrix(a, q) for a in d.atoms]
        return sum(w * np.kron(b, b) for w, b in zip(d.probs, lifts))
    S = tensor.symmetrizer(d.dim, q)
    SS = np.kron(S, S)
    return SS @ expected_kron_power(d, p) @ SS.T


def p_radius_exact(d, p, method="auto", dense_kron_limit=DENSE_EIG_LIMIT):
    """Exact p-radius under A1 or A2.

    ``method``: ``"kron"`` uses ``E[A^{(x)p}]``; ``"lifted"`` uses ``E[A^{[p]}]``
    (needs A2); ``"pair"`` uses ``E[A^{[p/2]} (x) A^{[p/2]}]`` (needs even p).
    ``"auto"`` takes the full Kronecker power while ``n**p <= dense_kron_limit``
    and otherwise the smallest valid reduction.
    """
    if p < 1 or int(p) != p:
        raise ValueError(f"p must be a positive integer, got {p}")
    p = int(p)
    even, cone = _check_assumptions(d, p)
    # rho_p(c mu) = c rho_p(mu); a power-of-two rescale is exact and keeps
    # E[A^{(x)p}] away from underflow and overflow at large p
    e = _scale_exponent(d)
    if e:
        d = d.scaled(2.0**-e)
    if method == "auto":
        if d.dim**p <= dense_kron_limit:
            method = "kron"
        else:
            method = "lifted" if cone else "pair"
    if method == "kron":
        mat = expected_kron_power(d, p)
        label = EXACT_EVEN if even else EXACT_CONE
    elif method == "lifted":
        if not cone:
            raise AssumptionViolated("the lifted formula needs cone invariance (A2)")
        mat = expected_lift_matrix(d, p)
        label = EXACT_LIFTED
    elif method == "pair":
        if not even:
            raise AssumptionViolated("the paired-lift formula needs even p (A1)")
        mat = _pair_matrix(d, p)
        label = EXACT_EVEN
    else:
        raise ValueError(f"unknown method {method!r}")
    rho = spectral_radius(mat)
    try:
        rho_unscaled = math.ldexp(rho, e * p)
    except OverflowError:
        rho_unscaled = math.inf
    return PRadiusResult(
        p=p,
        value=math.ldexp(rho ** (1.0 / p), e),
        method=label,
        assumption_used="A1" if even else "A2",
        diagnostics={"route": method, "side": mat.shape[0], "rho": rho_unscaled, "scale_exp": e},
    )


def _scale_exponent(d):
    # exponent of the power of two nearest the largest entry magnitude in the support
    parts = [np.abs(a).max() for a in d.atoms]
    if d.lo is not None:
        parts += [np.abs(d.lo).max(), np.abs(d.hi).max()]
    big = float(max(parts))
    # clamped so that 2.0**-e itself stays finite
    return min(max(int(round(math.log2(big))), -1000), 1000) if big > 0 else 0


def _batch_norm(P, norm, weight):
    if norm == "spectral":
        return np.linalg.norm(P, ord=2, axis=(-2, -1))
    if norm == "cone":
        w = np.asarray(weight, dtype=float)
        return np.max((w @ np.abs(P)) / w, axis=-1)
    raise ValueError(f"unknown norm {norm!r}")


def _product_lognorms(d, k, size, rng, norm="spectral", weight=None):
    n = d.dim
    P = np.broadcast_to(np.eye(n), (size, n, n)).copy()
    logscale = np.zeros(size)
    for step in range(1, k + 1):
        P = sample_many(d, rng, size) @ P
        if step % RESCALE_EVERY == 0 and step < k:
            s = _batch_norm(P, norm, weight)
            pos = s > 0
            P[pos] /= s[pos, None, None]
            logscale[pos] += np.log(s[pos])
    with np.errstate(divide="ignore"):
        return np.log(_batch_norm(P, norm, weight)) + logscale


def p_radius_montecarlo(
    d, p, k, n_samples, seed=0, norm="spectral", weight=None, chunk=10_000, threads=1
):
    """Estimate ``(E ||A_k ... A_1||**p)**(1/(p k))`` by sampling.

    Products are renormalized every few steps and the scale is carried in log
    space.  Samples are drawn in chunks with streams keyed by
    ``(seed, chunk index)``, so the result does not depend on ``threads``.
    ``norm="cone"`` uses the weighted-L1 induced norm with ``weight``.
    """
    if k < 1 or n_samples < 1:
        raise ValueError("k and n_samples must be positive")
    if norm == "cone" and weight is None:
        weight = np.ones(d.dim)
    sizes = [min(chunk, n_samples - start) for start in range(0, n_samples, chunk)]

    def run(i):
        return _product_lognorms(d, k, sizes[i], rng_stream(seed, i), norm, weight)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    lognorms = np.concatenate(parts)
    log_mean = logsumexp(p * lognorms) - math.log(n_samples)
    return PRadiusResult(
        p=int(p),
        value=float(math.exp(log_mean / (p * k))),
        method=MONTE_CARLO,
        assumption_used="none",
        diagnostics={"k": k, "n_samples": n_samples, "seed": seed, "norm": norm},
    )


def p_radius_sequence(d, p_list, **kwargs):
    """Exact p-radii for ascending ``p``; inadmissible entries come back flagged."""
    out = []
    for p in sorted(p_list):
        try:
            out.append(p_radius_exact(d, p, **kwargs))
        except (AssumptionViolated, EigensolverFailure, tensor.DimensionCapError) as exc:
            out.append(PRadiusResult(int(p), math.nan, "skipped", "none", error=str(exc)))
    return out

