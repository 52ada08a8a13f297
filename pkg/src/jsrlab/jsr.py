"""Joint spectral radius: brute-force bounds and the p-radius limit formula."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dist import FINITE, support_is_cone_invariant
from .errors import AssumptionViolated, BudgetExceeded, JsrlabError
from .pradius import p_radius_exact

DEFAULT_BUDGET = 2_000_000
PRUNE_CUTOFF = 1e-3
MONOTONE_SLACK = 1e-9


@dataclass
class BruteForceBounds:
    """``lower <= JSR <= upper`` from products of length at most ``k_max``.

    ``upper`` is only guaranteed when ``certified`` is true; pruning the
    enumeration drops products whose norms could still matter for the max.
    """

    lower: float
    upper: float
    certified: bool
    k_max: int
    n_products: int
    certified_upper: float = math.inf


def jsr_brute_force(matrices, k_max, budget=DEFAULT_BUDGET, cutoff=PRUNE_CUTOFF):
    """Enumerate all products up to length ``k_max``.

    ``lower`` is the largest ``rho(P)**(1/k)``, ``upper`` the smallest over
    ``k`` of ``max ||P||**(1/k)`` (spectral norm).  If the next level would
    push the total product count past ``budget``, products with
    ``||P|| < lower**k * cutoff`` are dropped first; if that is not enough,
    :class:`BudgetExceeded` is raised.
    """
    mats = np.array([np.asarray(m, dtype=float) for m in matrices])
    if mats.ndim != 3 or len(mats) == 0:
        raise ValueError("need a nonempty list of square matrices")
    N = len(mats)
    level = mats.copy()
    lower, upper, certified_upper = 0.0, math.inf, math.inf
    pruned = False
    total = 0
    for k in range(1, k_max + 1):
        total += len(level)
        norms = np.linalg.norm(level, ord=2, axis=(1, 2))
        rhos = np.max(np.abs(np.linalg.eigvals(level)), axis=1)
        lower = max(lower, float(rhos.max()) ** (1.0 / k))
        up_k = float(norms.max()) ** (1.0 / k)
        upper = min(upper, up_k)
        if not pruned:
            certified_upper = min(certified_upper, up_k)
        if k == k_max:
            break
        if total + N * len(level) > budget:
            keep = norms >= lower**k * cutoff
            if total + N * int(keep.sum()) > budget:
                raise BudgetExceeded(
                    f"level {k + 1} needs {N * int(keep.sum())} products after pruning; "
                    f"budget {budget}, already used {total}"
                )
            if not keep.all():
                pruned = True
            level = level[keep]
        # next level: M_j @ P for every current product P
        level = np.einsum("jab,mbc->jmac", mats, level).reshape(-1, *mats.shape[1:])
    return BruteForceBounds(
        lower=lower,
        upper=upper,
        certified=not pruned,
        k_max=k_max,
        n_products=total,
        certified_upper=certified_upper,
    )


@dataclass
class TableRow:
    p: int
    estimate: float
    method: str
    seconds: float


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)
    brute_force_bounds: BruteForceBounds | None = None
    heuristic: bool = False
    even_only: bool = False

    @property
    def final(self):
        return self.rows[-1].estimate

    def estimates(self):
        return np.array([r.estimate for r in self.rows])

    def is_monotone(self, slack=MONOTONE_SLACK):
        e = self.estimates()
        return bool(np.all(np.diff(e) >= -slack))

    def extrapolated(self):
        """Richardson-style guess assuming the error decays like 1/p.

        A diagnostic only: no convergence rate is known for the sequence.
        """
        if len(self.rows) < 2:
            return self.final
        (p1, e1), (p2, e2) = [(r.p, r.estimate) for r in self.rows[-2:]]
        return (p2 * e2 - p1 * e1) / (p2 - p1)

    def summary(self):
        note = " heuristic: outside stated assumptions" if self.heuristic else ""
        line = (
            f"final p={self.rows[-1].p} estimate={self.final:.12g} "
            f"extrapolated={self.extrapolated():.12g} monotone={self.is_monotone()}"
        )
        if self.brute_force_bounds is not None:
            b = self.brute_force_bounds
            line += f" brute_force=[{b.lower:.12g}, {b.upper:.12g}] certified={b.certified}"
        return line + note

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["p", "estimate", "method", "seconds"])
            for r in self.rows:
                w.writerow([r.p, f"{r.estimate:.12g}", r.method, f"{r.seconds:.6g}"])


def jsr_limit_formula(d, p_max, use_even_only=None, p_min=1):
    """Table of ``rho(E[A^{(x)p}])**(1/p)`` for ``p = p_min..p_max``.

    Each entry is a lower bound on the joint spectral radius of the support
    and the sequence converges to it under cone invariance.  Without cone
    invariance only even ``p`` are admissible (``use_even_only`` then defaults
    to true); that route is exact for finite atom sets and is flagged
    ``heuristic`` for interval and mixture distributions.
    """
    cone = support_is_cone_invariant(d)
    if use_even_only is None:
        use_even_only = not cone
    if not use_even_only and not cone:
        raise AssumptionViolated(
            "odd p needs the support to leave the nonnegative orthant invariant (A2); "
            "use even p only"
        )
    ps = [p for p in range(max(1, p_min), p_max + 1) if not use_even_only or p % 2 == 0]
    if not ps:
        raise ValueError("no admissible p in range")
    table = ConvergenceTable(
        heuristic=use_even_only and not cone and d.kind != FINITE, even_only=use_even_only
    )
    for p in ps:
        t0 = time.perf_counter()
        res = p_radius_exact(d, p)
        table.rows.append(TableRow(p, res.value, res.method, time.perf_counter() - t0))
    return table


@dataclass
class GapReport:
    bounds: BruteForceBounds
    table: ConvergenceTable
    residual: float

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["quantity", "value"])
            w.writerow(["brute_force_lower", f"{self.bounds.lower:.12g}"])
            w.writerow(["brute_force_upper", f"{self.bounds.upper:.12g}"])
            w.writerow(["upper_certified", str(self.bounds.certified).lower()])
            w.writerow(["limit_estimate", f"{self.table.final:.12g}"])
            w.writerow(["residual", f"{self.residual:.12g}"])


class GapViolation(JsrlabError):
    pass


def jsr_gap_report(d, p_max, k_max, use_even_only=None, budget=DEFAULT_BUDGET):
    """Compare the limit-formula estimate against brute-force bounds on the atoms."""
    if d.kind != FINITE:
        raise ValueError("the gap report needs a finite distribution")
    bounds = jsr_brute_force(d.atoms, k_max, budget=budget)
    table = jsr_limit_formula(d, p_max, use_even_only)
    table.brute_force_bounds = bounds
    if bounds.certified and table.final > bounds.upper + 1e-9:
        raise GapViolation(
            f"limit estimate {table.final!r} exceeds brute-force upper bound {bounds.upper!r}"
        )
    return GapReport(bounds=bounds, table=table, residual=bounds.upper - table.final)
