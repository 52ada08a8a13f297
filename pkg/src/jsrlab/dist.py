"""Bounded matrix distributions: finite atoms, uniform boxes, and their mixtures.

Interval distributions draw every entry independently and uniformly from
``[lo_ij, hi_ij]``.  A mixture draws from its interval part with probability
``w_continuous`` and from its atoms otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import tensor
from .cone import is_k_nonnegative
from .errors import SpecError

FINITE = "finite"
INTERVAL = "interval"
MIXTURE = "mixture"

PROB_TOL = 1e-12


def rng_stream(seed, *ids):
    """Independent generator for ``(seed, *ids)``.

    Every draw is determined by the key and the number of draws already
    taken, so workers keyed by path or chunk id reproduce bit-for-bit
    regardless of scheduling.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, ids)])))


@dataclass(frozen=True, eq=False)
class MatrixDistribution:
    dim: int
    kind: str
    atoms: tuple = ()
    probs: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    w_continuous: float = 0.0

    @classmethod
    def finite(cls, atoms, probs=None):
        mats = [np.array(m, dtype=float, ndmin=2) for m in atoms]
        if not mats:
            raise SpecError("at least one atom is required", "atoms")
        n = mats[0].shape[0]
        for i, m in enumerate(mats):
            if m.shape != (n, n):
                raise SpecError(f"atom {i} has shape {m.shape}, expected {(n, n)}", "atoms")
            if not np.all(np.isfinite(m)):
                raise SpecError(f"atom {i} has non-finite entries", "atoms")
            m.setflags(write=False)
        if probs is None:
            probs = np.full(len(mats), 1.0 / len(mats))
        probs = np.array(probs, dtype=float).reshape(-1)
        if probs.shape != (len(mats),):
            raise SpecError("one probability per atom is required", "prob")
        if np.any(~np.isfinite(probs)) or np.any(probs <= 0):
            raise SpecError("probabilities must be positive", "prob")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise SpecError(f"probabilities sum to {probs.sum()!r}, not 1", "prob")
        probs = probs / probs.sum()
        probs.setflags(write=False)
        return cls(dim=n, kind=FINITE, atoms=tuple(mats), probs=probs)

    @classmethod
    def point_mass(cls, a):
        return cls.finite([a], [1.0])

    @classmethod
    def interval(cls, lo, hi):
        lo = np.array(lo, dtype=float, ndmin=2)
        hi = np.array(hi, dtype=float, ndmin=2)
        n = lo.shape[0]
        if lo.shape != (n, n):
            raise SpecError(f"expected a square array, got shape {lo.shape}", "lo")
        if hi.shape != lo.shape:
            raise SpecError(f"shape {hi.shape} does not match lo {lo.shape}", "hi")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise SpecError("bounds must be finite", "lo")
        if np.any(lo > hi):
            raise SpecError("lo must not exceed hi entrywise", "hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        return cls(dim=n, kind=INTERVAL, lo=lo, hi=hi)

    @classmethod
    def mixture(cls, continuous, atomic, w_continuous):
        if continuous.kind != INTERVAL or atomic.kind != FINITE:
            raise SpecError("a mixture combines one interval part and one finite part", "kind")
        if continuous.dim != atomic.dim:
            raise SpecError("parts have different dimensions", "dim")
        w = float(w_continuous)
        if not 0.0 < w < 1.0:
            raise SpecError("continuous weight must lie strictly between 0 and 1", "w_continuous")
        return cls(
            dim=continuous.dim,
            kind=MIXTURE,
            atoms=atomic.atoms,
            probs=atomic.probs,
            lo=continuous.lo,
            hi=continuous.hi,
            w_continuous=w,
        )

    # parts of a mixture, usable on their own
    @property
    def continuous_part(self):
        return MatrixDistribution(dim=self.dim, kind=INTERVAL, lo=self.lo, hi=self.hi)

    @property
    def atomic_part(self):
        return MatrixDistribution(dim=self.dim, kind=FINITE, atoms=self.atoms, probs=self.probs)

    def scaled(self, c):
        """Distribution of ``c * A`` for ``c > 0``."""
        if c <= 0:
            raise ValueError("scale must be positive")
        if self.kind == FINITE:
            return MatrixDistribution.finite([c * m for m in self.atoms], self.probs)
        part = MatrixDistribution.interval(c * self.lo, c * self.hi)
        if self.kind == INTERVAL:
            return part
        return MatrixDistribution.mixture(part, self.atomic_part.scaled(c), self.w_continuous)

    def mean(self):
        return expected_kron_power(self, 1)


@dataclass(frozen=True, eq=False)
class SupportDescriptor:
    """Atoms and/or the interval box making up the support."""

    atoms: tuple | None = None
    box: tuple | None = None


def sample(d, rng):
    """Draw one matrix."""
    return sample_many(d, rng, 1)[0]


def sample_many(d, rng, size):
    """Draw ``size`` independent matrices as a ``(size, n, n)`` array."""
    n = d.dim
    if d.kind == FINITE:
        if len(d.atoms) == 1:
            return np.broadcast_to(d.atoms[0], (size, n, n)).copy()
        idx = rng.choice(len(d.atoms), size=size, p=d.probs)
        return np.stack(d.atoms)[idx]
    if d.kind == INTERVAL:
        return d.lo + (d.hi - d.lo) * rng.random((size, n, n))
    use_cont = rng.random(size) < d.w_continuous
    cont = sample_many(d.continuous_part, rng, size)
    atom = sample_many(d.atomic_part, rng, size)
    return np.where(use_cont[:, None, None], cont, atom)


def uniform_moments(lo, hi, m_max):
    """``E[a**m]`` for ``a ~ U[lo, hi]`` and ``m = 0..m_max``, stacked on the last axis.

    Uses ``(hi**(m+1) - lo**(m+1)) / ((m+1)(hi-lo)) = mean_j hi**j lo**(m-j)``,
    which is free of cancellation and equals ``hi**m`` when ``lo == hi``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    out = np.empty(lo.shape + (m_max + 1,))
    out[..., 0] = 1.0
    # running sum of hi**j lo**(m-j), j = 0..m
    s = np.ones_like(lo)
    hi_pow = np.ones_like(hi)
    for m in range(1, m_max + 1):
        hi_pow = hi_pow * hi
        s = s * lo + hi_pow
        out[..., m] = s / (m + 1)
    return out


def _interval_kron_power(lo, hi, p):
    n = lo.shape[0]
    side = n**p
    mom = uniform_moments(lo, hi, p)
    digits = tensor.tensor_digits(n, p)
    onehot = [(digits == r).astype(np.int32) for r in range(n)]
    out = np.ones((side, side))
    for r in range(n):
        for c in range(n):
            # number of tensor factors using entry (r, c) at each position of A^{(x)p}
            count = onehot[r] @ onehot[c].T
            out *= mom[r, c][count]
    return out


def expected_kron_power(d, p, cap=tensor.KRON_SIDE_CAP):
    """Exact ``E[A^{(x)p}]``.

    For interval entries each entry of the Kronecker power is a monomial in
    independent matrix entries, so its mean is a product of uniform moments
    (repeated entries contribute a higher moment, not a product of means).
    """
    if p < 1:
        raise ValueError(f"p must be a positive integer, got {p}")
    n = d.dim
    if n**p > cap:
        raise tensor.DimensionCapError(
            f"n**p = {n}**{p} exceeds the Kronecker side cap {cap}; use expected_lift_matrix"
        )
    if d.kind == FINITE:
        return sum(w * tensor.kron_power(m, p, cap) for w, m in zip(d.probs, d.atoms))
    if d.kind == INTERVAL:
        return _interval_kron_power(d.lo, d.hi, p)
    w = d.w_continuous
    return w * _interval_kron_power(d.lo, d.hi, p) + (1 - w) * expected_kron_power(
        d.atomic_part, p, cap
    )


def expected_lift_matrix(d, p):
    """Exact ``E[A^{[p]}]`` on the symmetric lift (side ``C(n+p-1, p)``)."""
    if p < 1:
        raise ValueError(f"p must be a positive integer, got {p}")
    if d.kind == FINITE:
        return sum(w * tensor.lift_matrix(m, p) for w, m in zip(d.probs, d.atoms))
    cont = tensor.lift_from_moments(uniform_moments(d.lo, d.hi, p), p)
    if d.kind == INTERVAL:
        return cont
    w = d.w_continuous
    return w * cont + (1 - w) * expected_lift_matrix(d.atomic_part, p)


def support(d):
    atoms = d.atoms if d.kind in (FINITE, MIXTURE) else None
    box = (d.lo, d.hi) if d.kind in (INTERVAL, MIXTURE) else None
    return SupportDescriptor(atoms=atoms, box=box)


def support_is_cone_invariant(d, tol=0.0):
    """Sufficient test for the whole support leaving the nonnegative orthant invariant."""
    ok = True
    if d.kind in (FINITE, MIXTURE):
        ok = all(is_k_nonnegative(m, tol) for m in d.atoms)
    if d.kind in (INTERVAL, MIXTURE):
        ok = ok and is_k_nonnegative(d.lo, tol)
    return ok


def pushforward_kron(d, m):
    """Image of a finite distribution under ``A -> A^{(x)m}``."""
    if d.kind != FINITE:
        raise ValueError("pushforward is only represented exactly for finite distributions")
    return MatrixDistribution.finite([tensor.kron_power(a, m) for a in d.atoms], d.probs)


def pushforward_lift(d, m):
    """Image of a finite distribution under ``A -> A^{[m]}``."""
    if d.kind != FINITE:
        raise ValueError("pushforward is only represented exactly for finite distributions")
    return MatrixDistribution.finite([tensor.lift_matrix(a, m) for a in d.atoms], d.probs)


# --- JSON documents -------------------------------------------------------


def _matrix(doc, key, n):
    if key not in doc:
        raise SpecError("missing field", key)
    try:
        arr = np.array(doc[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"not a numeric matrix ({exc})", key) from None
    if arr.shape != (n, n):
        raise SpecError(f"expected shape {(n, n)}, got {arr.shape}", key)
    return arr


def _atoms(doc, n):
    if "atoms" not in doc or not isinstance(doc["atoms"], list):
        raise SpecError("expected a list of {matrix, prob} objects", "atoms")
    mats, probs = [], []
    for i, item in enumerate(doc["atoms"]):
        if not isinstance(item, dict) or "matrix" not in item or "prob" not in item:
            raise SpecError(f"entry {i} needs 'matrix' and 'prob'", "atoms")
        mats.append(_matrix(item, "matrix", n))
        try:
            probs.append(float(item["prob"]))
        except (TypeError, ValueError):
            raise SpecError(f"entry {i} has a non-numeric probability", "prob") from None
    return MatrixDistribution.finite(mats, probs)


def from_dict(doc):
    if not isinstance(doc, dict):
        raise SpecError("top level must be an object")
    try:
        n = int(doc["dim"])
    except KeyError:
        raise SpecError("missing field", "dim") from None
    except (TypeError, ValueError):
        raise SpecError("must be a positive integer", "dim") from None
    if n < 1:
        raise SpecError("must be a positive integer", "dim")
    kind = doc.get("kind")
    if kind == FINITE:
        return _atoms(doc, n)
    if kind == INTERVAL:
        return MatrixDistribution.interval(_matrix(doc, "lo", n), _matrix(doc, "hi", n))
    if kind == MIXTURE:
        if "w_continuous" not in doc:
            raise SpecError("missing field", "w_continuous")
        try:
            w = float(doc["w_continuous"])
        except (TypeError, ValueError):
            raise SpecError("must be a number", "w_continuous") from None
        cont = MatrixDistribution.interval(_matrix(doc, "lo", n), _matrix(doc, "hi", n))
        return MatrixDistribution.mixture(cont, _atoms(doc, n), w)
    raise SpecError(f"unknown kind {kind!r}", "kind")


def to_dict(d):
    doc = {"dim": d.dim, "kind": d.kind}
    if d.kind in (FINITE, MIXTURE):
        doc["atoms"] = [
            {"matrix": m.tolist(), "prob": float(w)} for m, w in zip(d.atoms, d.probs)
        ]
    if d.kind in (INTERVAL, MIXTURE):
        doc["lo"] = d.lo.tolist()
        doc["hi"] = d.hi.tolist()
    if d.kind == MIXTURE:
        doc["w_continuous"] = d.w_continuous
    return doc


def load(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from None
    return from_dict(doc)


def save(d, path):
    Path(path).write_text(json.dumps(to_dict(d), indent=2) + "\n")


def example5():
    """The 2x2 box distribution with entries U[0,1.5], U[0,1.8], U[0,0.15], U[0,1.2]."""
    return MatrixDistribution.interval(np.zeros((2, 2)), [[1.5, 1.8], [0.15, 1.2]])


def uniform_scalar(gamma=1.0):
    return MatrixDistribution.interval([[0.0]], [[gamma]])
