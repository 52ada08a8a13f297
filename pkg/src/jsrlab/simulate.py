"""Simulation of switched linear systems and ensemble statistics."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .dist import rng_stream, sample_many
from .errors import AssumptionViolated, DegenerateFit
from .pradius import p_radius_exact

LEVEL_POINTS = 256


@dataclass
class PathEnsemble:
    n_paths: int
    horizon: int
    seed: int
    x0: np.ndarray
    states: np.ndarray  # (horizon + 1, n_paths, n)
    mean_norm: np.ndarray  # (horizon + 1,)
    mean_V: list = field(default_factory=list)
    averaged_path: np.ndarray | None = None


@dataclass
class GrowthEstimate:
    p: int
    rate: float
    band: tuple
    log_means: np.ndarray
    window: tuple
    exact: float | None = None


def _draw_paths(d, horizon, n_paths, seed, threads=1):
    # one stream per path, keyed by (seed, path id)
    def draw(i):
        return sample_many(d, rng_stream(seed, i), horizon)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            draws = list(pool.map(draw, range(n_paths)))
    else:
        draws = [draw(i) for i in range(n_paths)]
    return np.stack(draws)  # (n_paths, horizon, n, n)


def _propagate(d, x0, horizon, n_paths, seed, threads=1):
    """Unit-direction states and log norms of every path, renormalized each step."""
    x0 = np.asarray(x0, dtype=float)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if not np.any(x0):
        raise ValueError("x0 must be nonzero")
    draws = _draw_paths(d, horizon, n_paths, seed, threads)
    n = d.dim
    unit = np.empty((horizon + 1, n_paths, n))
    lognorm = np.empty((horizon + 1, n_paths))
    r0 = np.linalg.norm(x0)
    unit[0] = x0 / r0
    lognorm[0] = math.log(r0)
    x = unit[0].copy()
    with np.errstate(divide="ignore"):
        for k in range(horizon):
            x = np.einsum("mij,mj->mi", draws[:, k], x)
            r = np.linalg.norm(x, axis=1)
            pos = r > 0
            x[pos] /= r[pos, None]
            unit[k + 1] = x
            lognorm[k + 1] = lognorm[k] + np.log(r)
    return unit, lognorm


def simulate_stochastic(d, x0, horizon, n_paths, seed=0, evaluators=(), threads=1):
    """Sample ``n_paths`` trajectories of ``x(k+1) = A_k x(k)`` with i.i.d. ``A_k``.

    ``evaluators`` are vectorized callables ``V(x)`` (last axis is the state);
    their per-step sample means are stored in ``mean_V`` in order.
    """
    unit, lognorm = _propagate(d, x0, horizon, n_paths, seed, threads)
    norms = np.exp(lognorm)
    states = unit * norms[..., None]
    mean_V = [np.ascontiguousarray(V(states)).mean(axis=1) for V in evaluators]
    return PathEnsemble(
        n_paths=n_paths,
        horizon=horizon,
        seed=seed,
        x0=np.asarray(x0, dtype=float),
        states=states,
        mean_norm=np.ascontiguousarray(norms).mean(axis=1),
        mean_V=mean_V,
        averaged_path=states.mean(axis=1),
    )


def count_increases(series):
    return int(np.sum(np.diff(np.asarray(series)) > 0))


def estimate_pth_mean_rate(d, x0, p, horizon, n_paths, seed=0, threads=1):
    """Fit ``log E||x(k)||^p`` against ``k`` over ``k in [horizon/2, horizon]``.

    The rate is ``exp(slope / p)``; ``band`` is the rate at slope +/- two
    standard errors of the fit.
    """
    _, lognorm = _propagate(d, x0, horizon, n_paths, seed, threads)
    log_means = logsumexp(p * lognorm, axis=1) - math.log(n_paths)
    lo_k = horizon // 2
    ks = np.arange(lo_k, horizon + 1)
    window = log_means[lo_k:]
    if len(ks) < 2 or not np.all(np.isfinite(window)):
        raise DegenerateFit("sample means vanish or overflow inside the fit window")
    if len(ks) > 2:
        coef, cov = np.polyfit(ks, window, 1, cov=True)
        se = math.sqrt(max(cov[0, 0], 0.0))
    else:
        coef, se = np.polyfit(ks, window, 1), 0.0
    slope = coef[0]
    try:
        exact = p_radius_exact(d, p).value
    except AssumptionViolated:
        exact = None
    return GrowthEstimate(
        p=p,
        rate=math.exp(slope / p),
        band=(math.exp((slope - 2 * se) / p), math.exp((slope + 2 * se) / p)),
        log_means=log_means,
        window=(lo_k, horizon),
        exact=exact,
    )


@dataclass
class WorstCasePath:
    sequence: list
    states: np.ndarray
    growth: float
    final_growth: float


def simulate_worst_case(matrices, x0, horizon, beam_width=64):
    """Beam search for a switching sequence that makes ``||x(k)||`` large.

    Keeps the ``beam_width`` largest states per step.  ``growth`` is
    ``max_k (||x(k)|| / ||x0||)**(1/k)`` along the returned sequence: a witness
    of fast growth, never an upper bound on the joint spectral radius.
    """
    mats = np.array([np.asarray(m, dtype=float) for m in matrices])
    if mats.ndim != 3 or len(mats) == 0:
        raise ValueError("need a nonempty list of square matrices")
    x0 = np.asarray(x0, dtype=float)
    r0 = np.linalg.norm(x0)
    if r0 == 0:
        raise ValueError("x0 must be nonzero")
    N = len(mats)
    unit = (x0 / r0)[None]
    logn = np.zeros(1)
    parents, choices = [], []
    with np.errstate(divide="ignore"):
        for _ in range(horizon):
            cand = np.einsum("jab,mb->mja", mats, unit).reshape(-1, x0.size)
            r = np.linalg.norm(cand, axis=1)
            cand_log = np.repeat(logn, N) + np.log(r)
            order = np.argsort(-cand_log, kind="stable")[:beam_width]
            pos = r[order] > 0
            unit = cand[order]
            unit[pos] /= r[order][pos, None]
            logn = cand_log[order]
            parents.append(order // N)
            choices.append(order % N)
    # walk back from the best final state
    idx = 0
    seq = []
    for k in range(horizon - 1, -1, -1):
        seq.append(int(choices[k][idx]))
        idx = int(parents[k][idx])
    seq.reverse()
    states = [x0]
    for j in seq:
        states.append(mats[j] @ states[-1])
    states = np.array(states)
    norms = np.linalg.norm(states, axis=1) / r0
    ks = np.arange(1, horizon + 1)
    growth = norms[1:] ** (1.0 / ks)
    return WorstCasePath(seq, states, float(growth.max()), float(growth[-1]))


def level_set(V, c, degree=None, n_points=LEVEL_POINTS):
    """Vertices of the planar contour ``V(x) = c`` for a positively homogeneous ``V``."""
    degree = degree if degree is not None else getattr(V, "degree", 1)
    theta = np.linspace(0.0, 2 * math.pi, n_points, endpoint=False)
    u = np.column_stack([np.cos(theta), np.sin(theta)])
    r = (c / np.asarray(V(u), dtype=float)) ** (1.0 / degree)
    return u * r[:, None]


def _fmt(v):
    return f"{v:.12g}"


def write_paths_csv(ens, path):
    n = ens.states.shape[2]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "path_id"] + [f"x{i + 1}" for i in range(n)])
        for k in range(ens.horizon + 1):
            for i in range(ens.n_paths):
                w.writerow([k, i] + [_fmt(v) for v in ens.states[k, i]])


def write_stats_csv(ens, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "mean_norm"] + [f"mean_V_{j + 1}" for j in range(len(ens.mean_V))])
        for k in range(ens.horizon + 1):
            w.writerow([k, _fmt(ens.mean_norm[k])] + [_fmt(m[k]) for m in ens.mean_V])


def write_levels_csv(levels, path):
    """``levels`` is a list of ``(evaluator_id, c, vertices)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["evaluator_id", "c", "vertex_x", "vertex_y"])
        for ev_id, c, verts in levels:
            for vx, vy in verts:
                w.writerow([ev_id, _fmt(c), _fmt(vx), _fmt(vy)])
