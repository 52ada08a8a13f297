"""Stochastic Lyapunov functions: synthesis and verification.

Two certificate forms are produced.

* Quadratic, for even degree ``p = 2q``: ``V(x) = y^T H y`` with ``y`` the
  degree-``q`` lift (or Kronecker power) of ``x``.  ``H`` is the Neumann sum
  ``sum_k gamma^{-pk} T^k(I)`` of the second-moment map
  ``T(X) = E[B^T X B]``, ``B = A^{[q]}``.  Truncating that sum leaves
  ``T(H) - gamma^p H = gamma^p (T^{K+1}(I) gamma^{-p(K+1)} - I)``, negative
  definite once the last increment is below one, and ``H >= I``.
* Cone norm, under orthant invariance: ``V(x) = sum g_a |y_a|`` with ``y``
  the degree-``p`` lift of ``x`` and ``g`` a left Perron vector of
  ``E[A^{[p]}]`` (perturbed to ``E[A^{[p]}] + delta * ones`` when needed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg

from . import tensor
from .cone import ConeWeight, cone_norm, cone_operator_norm, is_k_positive, left_perron_vector
from .dist import (
    FINITE,
    expected_kron_power,
    expected_lift_matrix,
    rng_stream,
    sample_many,
    support_is_cone_invariant,
)
from .errors import AssumptionViolated, GammaTooSmall, SpecError
from .pradius import p_radius_exact

QUADRATIC = "quadratic"
CONE_NORM = "cone_norm"

TOL_SERIES = 1e-12
MAX_TERMS = 100_000
STALL_LIMIT = 10
TOL_PSD = 1e-8
DELTA_SCHEDULE = tuple(10.0**-e for e in range(3, 11))


@dataclass
class LyapunovCertificate:
    degree: int
    gamma: float
    form: str
    dim: int
    H: np.ndarray | None = None
    g: np.ndarray | None = None
    lifted: bool = True
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.form == QUADRATIC:
            if self.degree % 2:
                raise AssumptionViolated("quadratic certificates need an even degree")
            H = np.array(self.H, dtype=float)
            if H.shape != (self.side, self.side):
                raise ValueError(f"H must be {self.side}x{self.side}, got {H.shape}")
            self.H = (H + H.T) / 2
        elif self.form == CONE_NORM:
            self.g = np.asarray(ConeWeight(self.g))
            if self.g.shape != (self.side,):
                raise ValueError(f"g must have length {self.side}, got {self.g.shape}")
        else:
            raise ValueError(f"unknown certificate form {self.form!r}")

    @property
    def lift_degree(self):
        return self.degree // 2 if self.form == QUADRATIC else self.degree

    @property
    def side(self):
        k = self.lift_degree
        return tensor.lift_dim(self.dim, k) if self.lifted else self.dim**k

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        k = self.lift_degree
        if k == 1:
            return x
        if self.lifted:
            return tensor.lift_vector(x, k)
        return tensor.kron_power_vector(x, k)

    def __call__(self, x):
        """Evaluate ``V`` on a vector or a stack of vectors (last axis)."""
        y = self.lift(x)
        if self.form == QUADRATIC:
            return np.einsum("...i,ij,...j->...", y, self.H, y)
        return cone_norm(y, self.g)

    def min_eig(self):
        return float(np.linalg.eigvalsh(self.H)[0]) if self.form == QUADRATIC else float(self.g.min())

    def to_dict(self):
        doc = {
            "degree": self.degree,
            "gamma": self.gamma,
            "form": self.form,
            "dim": self.dim,
            "lifted": self.lifted,
            "provenance": self.provenance,
        }
        if self.form == QUADRATIC:
            doc["H"] = self.H.tolist()
        else:
            doc["g"] = self.g.tolist()
        return doc

    @classmethod
    def from_dict(cls, doc):
        try:
            form = doc["form"]
            kwargs = dict(
                degree=int(doc["degree"]),
                gamma=float(doc["gamma"]),
                form=form,
                lifted=bool(doc.get("lifted", True)),
                provenance=dict(doc.get("provenance", {})),
            )
            key = "H" if form == QUADRATIC else "g"
            kwargs[key] = np.array(doc[key], dtype=float)
        except KeyError as exc:
            raise SpecError("missing field", exc.args[0]) from None
        except (TypeError, ValueError) as exc:
            raise SpecError(str(exc)) from None
        dim = doc.get("dim", kwargs["provenance"].get("dim"))
        if dim is None:
            raise SpecError("missing field", "dim")
        try:
            return cls(dim=int(dim), **kwargs)
        except (ValueError, AssumptionViolated) as exc:
            raise SpecError(str(exc)) from None

    def save(self, path):
        # repr-exact floats: json round-trips doubles bit for bit
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path):
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from None


def euclidean_norm(x):
    return np.linalg.norm(np.asarray(x, dtype=float), axis=-1)


euclidean_norm.degree = 1


def _check_gamma(gamma):
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")


def _lift_atom(a, k, lifted):
    return tensor.lift_matrix(a, k) if lifted else tensor.kron_power(a, k)


def second_moment_map(d, q, lifted):
    """Return ``T(X) = E[B^T X B]`` with ``B`` the degree-``q`` lift (or Kronecker power) of ``A``."""
    if d.kind == FINITE:
        lifts = [_lift_atom(a, q, lifted) for a in d.atoms]
        probs = d.probs

        def T(X):
            return sum(w * (B.T @ X @ B) for w, B in zip(probs, lifts))

        return T
    # row-major vec: vec(B^T X B) = (B (x) B)^T vec(X), and E[B (x) B] is
    # E[A^{(x)2q}] sandwiched by the symmetrizer when lifted
    E = expected_kron_power(d, 2 * q)
    if lifted:
        S = tensor.symmetrizer(d.dim, q)
        SS = np.kron(S, S)
        E = SS @ E @ SS.T
    op = E.T

    def T(X):
        m = X.shape[0]
        return (op @ X.reshape(-1)).reshape(m, m)

    return T


def _side(d, k, lifted):
    return tensor.lift_dim(d.dim, k) if lifted else d.dim**k


def synth_quadratic(d, p, gamma, lifted=None, tol_series=TOL_SERIES, max_terms=MAX_TERMS):
    """Quadratic certificate of even degree ``p`` with rate ``gamma``.

    ``lifted`` defaults to storing ``H`` on the symmetric lift when the
    support is cone invariant and on the full tensor space otherwise.
    """
    if p % 2:
        raise AssumptionViolated(f"quadratic certificates need an even degree (A1), got p = {p}")
    _check_gamma(gamma)
    rho = p_radius_exact(d, p).value
    if gamma <= rho:
        raise GammaTooSmall(f"gamma = {gamma} does not exceed the p-radius {rho:.12g}")
    q = p // 2
    if lifted is None:
        lifted = support_is_cone_invariant(d)
    T = second_moment_map(d, q, lifted)
    scale = gamma ** (-p)
    m = _side(d, q, lifted)
    term = np.eye(m)
    H = term.copy()
    prev = 1.0
    stall = 0
    for n_terms in range(1, max_terms + 1):
        term = scale * T(term)
        term = (term + term.T) / 2
        size = float(np.linalg.norm(term, 2))
        H += term
        if size < tol_series:
            break
        stall = stall + 1 if size >= prev else 0
        if stall >= STALL_LIMIT and n_terms > 2 * STALL_LIMIT:
            raise GammaTooSmall(f"Neumann series stopped decreasing after {n_terms} terms")
        prev = size
    else:
        raise GammaTooSmall(f"Neumann series did not converge in {max_terms} terms")
    eig = np.linalg.eigvalsh(H)
    return LyapunovCertificate(
        degree=p,
        gamma=gamma,
        form=QUADRATIC,
        dim=d.dim,
        H=H,
        lifted=lifted,
        provenance={
            "method": "neumann_series",
            "terms": n_terms,
            "tol_series": tol_series,
            "p_radius": rho,
            "C1": 1.0,
            "C2": float(eig[-1]),
        },
    )


def solve_quadratic_direct(d, p, gamma, lifted=None):
    """Quadratic certificate from the linear system ``H - gamma^{-p} T(H) = I``.

    This is the exact limit of the Neumann series, obtained by a dense solve
    over all ``m x m`` matrices; used to cross-check :func:`synth_quadratic`.
    """
    if p % 2:
        raise AssumptionViolated(f"quadratic certificates need an even degree (A1), got p = {p}")
    _check_gamma(gamma)
    rho = p_radius_exact(d, p).value
    if gamma <= rho:
        raise GammaTooSmall(f"gamma = {gamma} does not exceed the p-radius {rho:.12g}")
    q = p // 2
    if lifted is None:
        lifted = support_is_cone_invariant(d)
    T = second_moment_map(d, q, lifted)
    m = _side(d, q, lifted)
    basis = np.eye(m * m)
    Tmat = np.column_stack([T(b.reshape(m, m)).reshape(-1) for b in basis])
    H = linalg.solve(np.eye(m * m) - gamma ** (-p) * Tmat, np.eye(m).reshape(-1)).reshape(m, m)
    return LyapunovCertificate(
        degree=p, gamma=gamma, form=QUADRATIC, dim=d.dim, H=H, lifted=lifted,
        provenance={"method": "direct_solve", "p_radius": rho},
    )


def synth_cone_norm(d, p, gamma, lifted=True):
    """Cone-norm certificate of degree ``p`` with rate ``gamma``.

    Works on the lifted system ``A -> A^{[p]}`` (identity for ``p = 1``), which
    stays entrywise nonnegative.  ``g`` is the left Perron vector of the mean
    lifted matrix, or of its perturbation by ``delta * ones`` for the first
    ``delta`` in ``DELTA_SCHEDULE`` that brings the induced norm below
    ``gamma**p``.  ``g`` is normalized to last component 1.
    """
    if not support_is_cone_invariant(d):
        raise AssumptionViolated(
            "cone-norm certificates need the support to leave the nonnegative orthant invariant (A2)"
        )
    _check_gamma(gamma)
    rho = p_radius_exact(d, p).value
    if gamma <= rho:
        raise GammaTooSmall(f"gamma = {gamma} does not exceed the p-radius {rho:.12g}")
    M = _mean_lift(d, p, lifted)
    target = gamma**p
    delta = 0.0
    g = None
    if is_k_positive(M):
        g = left_perron_vector(M)
        if cone_operator_norm(M, g) >= target:
            g = None
    if g is None:
        ones = np.ones_like(M)
        for delta in DELTA_SCHEDULE:
            cand = left_perron_vector(M + delta * ones)
            if np.all(cand > 0) and cone_operator_norm(M, cand) < target:
                g = cand
                break
        else:
            raise GammaTooSmall(
                f"no perturbation in {DELTA_SCHEDULE[0]:g}..{DELTA_SCHEDULE[-1]:g} "
                f"brings the induced norm below gamma**p = {target:.12g}"
            )
    return LyapunovCertificate(
        degree=p,
        gamma=gamma,
        form=CONE_NORM,
        dim=d.dim,
        g=g,
        lifted=lifted,
        provenance={
            "method": "perron",
            "delta": delta,
            "p_radius": rho,
            "induced_norm": cone_operator_norm(M, g),
        },
    )


def _mean_lift(d, k, lifted):
    if k == 1:
        return expected_kron_power(d, 1)
    return expected_lift_matrix(d, k) if lifted else expected_kron_power(d, k)


@dataclass
class VerificationReport:
    passed: bool
    status: str  # "pass", "fail" or "inconclusive"
    mode: str
    target: float  # gamma**p
    residual: float | None = None
    min_eig: float | None = None
    max_ratio: float | None = None
    max_ratio_se: float | None = None
    C1: float | None = None
    C2: float | None = None
    notes: list = field(default_factory=list)


def _norm_constants(cert, rng, n_vec=2000):
    x = rng.standard_normal((n_vec, cert.dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    v = cert(x)
    return float(v.min()), float(v.max())


def verify_certificate(d, cert, mode="exact", n_x=200, n_A=10_000, seed=0, tol_psd=TOL_PSD):
    """Check ``E[V(Ax)] <= gamma**p V(x)`` for a certificate.

    ``mode="exact"`` evaluates the expectation in closed form: the largest
    eigenvalue of ``T(H) - gamma**p H`` for quadratic certificates, and
    ``g^T E[A^{[p]}] <= gamma**p g^T`` componentwise for cone norms.
    ``mode="montecarlo"`` samples ``n_x`` states and ``n_A`` matrices and
    compares the worst ratio ``mean V(Ax) / V(x)`` against ``gamma**p`` with a
    three-standard-error slack.  Both modes also report empirical ``C1, C2``
    over random unit vectors.
    """
    if cert.dim != d.dim:
        raise ValueError(f"certificate is for dimension {cert.dim}, distribution has {d.dim}")
    target = cert.gamma**cert.degree
    C1, C2 = _norm_constants(cert, rng_stream(seed, 2))
    if mode == "exact":
        if cert.form == QUADRATIC:
            T = second_moment_map(d, cert.lift_degree, cert.lifted)
            R = T(cert.H) - target * cert.H
            residual = float(np.linalg.eigvalsh((R + R.T) / 2)[-1])
            min_eig = cert.min_eig()
            ok = residual <= tol_psd and min_eig > 0
            notes = [] if min_eig > 0 else ["H is not positive definite"]
            return VerificationReport(
                ok, "pass" if ok else "fail", mode, target, residual=residual,
                min_eig=min_eig, C1=C1, C2=C2, notes=notes,
            )
        notes = []
        cone = support_is_cone_invariant(d)
        if not cone:
            notes.append("support is not cone invariant; the cone-norm argument does not apply")
        M = _mean_lift(d, cert.lift_degree, cert.lifted)
        residual = float(np.max(cert.g @ M - target * cert.g))
        ok = cone and residual <= 1e-10
        return VerificationReport(
            ok, "pass" if ok else "fail", mode, target, residual=residual,
            min_eig=cert.min_eig(), C1=C1, C2=C2, notes=notes,
        )
    if mode != "montecarlo":
        raise ValueError(f"unknown mode {mode!r}")
    x = rng_stream(seed, 0).standard_normal((n_x, d.dim))
    A = sample_many(d, rng_stream(seed, 1), n_A)
    Vx = cert(x)
    VAx = cert(np.einsum("kij,sj->ksi", A, x))  # (n_A, n_x)
    ratio = VAx.mean(axis=0) / Vx
    se = VAx.std(axis=0, ddof=1) / math.sqrt(n_A) / Vx
    worst = int(np.argmax(ratio - target))
    if np.all(ratio <= target):
        status = "pass"
    elif np.all(ratio <= target + 3 * se):
        status = "inconclusive"
    else:
        status = "fail"
    return VerificationReport(
        status == "pass", status, mode, target,
        max_ratio=float(ratio.max()), max_ratio_se=float(se[worst]),
        min_eig=cert.min_eig(), C1=C1, C2=C2,
    )


# --- the definitional construction ------------------------------------------

EXACT_PRODUCT_LIMIT = 4096


class DefinitionalLyapunov:
    """``V(x) = sum_{k<k0} E||A_k...A_1 x||^p / gamma^{pk}`` for the first ``k0`` with ``h_k0 <= gamma``.

    ``h_k = E[||A_k...A_1||^p]^{1/(pk)}`` (spectral norm).  Expectations are
    exact for finite distributions while the number of products stays below
    ``EXACT_PRODUCT_LIMIT``; otherwise a fixed set of sampled product chains
    is reused for every evaluation, so ``V`` is a deterministic function.
    """

    degree: int

    def __init__(self, d, p, gamma, k0=None, k_cap=50, n_samples=20_000, seed=0):
        _check_gamma(gamma)
        self.d, self.degree, self.gamma = d, p, gamma
        self.exact = d.kind == FINITE
        self._prods, self._weights = self._chains(d, k_cap, n_samples, seed, k0)
        h = [1.0]
        for k in range(1, len(self._prods)):
            norms = np.linalg.norm(self._prods[k], ord=2, axis=(1, 2))
            h.append(float(self._weights[k] @ norms**p) ** (1.0 / (p * k)))
        if k0 is None:
            k0 = next((k for k in range(1, len(h)) if h[k] <= gamma), None)
            if k0 is None:
                raise GammaTooSmall(f"no k0 <= {len(h) - 1} has h_k0 <= gamma = {gamma}")
        self.k0 = k0
        self.h = h[: k0 + 1]
        self.C1 = 1.0
        self.C2 = float(sum((h[k] / gamma) ** (p * k) for k in range(k0)))

    def _chains(self, d, k_cap, n_samples, seed, k0):
        n = d.dim
        depth = k_cap if k0 is None else k0
        prods = [np.eye(n)[None]]
        weights = [np.ones(1)]
        if self.exact and len(d.atoms) ** depth <= EXACT_PRODUCT_LIMIT:
            atoms = np.stack(d.atoms)
            for _ in range(depth):
                P = np.einsum("jab,mbc->jmac", atoms, prods[-1]).reshape(-1, n, n)
                w = np.outer(d.probs, weights[-1]).reshape(-1)
                prods.append(P)
                weights.append(w)
            return prods, weights
        self.exact = False
        rng = rng_stream(seed, 0)
        P = np.broadcast_to(np.eye(n), (n_samples, n, n)).copy()
        w = np.full(n_samples, 1.0 / n_samples)
        for _ in range(depth):
            P = sample_many(d, rng, n_samples) @ P
            prods.append(P)
            weights.append(w)
        return prods, weights

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for k in range(self.k0):
            y = np.einsum("mij,...j->...mi", self._prods[k], x)
            total = total + (np.linalg.norm(y, axis=-1) ** self.degree) @ self._weights[k] / self.gamma ** (
                self.degree * k
            )
        return total


def definitional_lyapunov(d, p, gamma, k0=None, **kwargs):
    return DefinitionalLyapunov(d, p, gamma, k0=k0, **kwargs)
