import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import finite_dists, random_nonneg_finite, square, nonneg_entries
from jsrlab import dist, tensor
from jsrlab.dist import MatrixDistribution
from jsrlab.errors import AssumptionViolated, BudgetExceeded
from jsrlab.jsr import (
    ConvergenceTable,
    TableRow,
    jsr_brute_force,
    jsr_gap_report,
    jsr_limit_formula,
)

PAIR = [np.diag([0.9, 0.2]), np.diag([0.2, 0.9])]


def test_brute_force_diagonal_pair():
    b = jsr_brute_force(PAIR, 8)
    assert b.lower == pytest.approx(0.9) and b.upper == pytest.approx(0.9)
    assert b.certified and b.n_products == sum(2**k for k in range(1, 9))


def test_brute_force_singleton_and_zero():
    a = np.array([[0.5, 1.0], [0.0, 0.5]])
    b = jsr_brute_force([a], 30)
    assert b.lower == pytest.approx(0.5)
    assert 0.5 <= b.upper < 0.7
    z = jsr_brute_force([np.zeros((2, 2))], 4)
    assert z.lower == 0.0 and z.upper == 0.0


def test_brute_force_budget():
    with pytest.raises(BudgetExceeded):
        jsr_brute_force([np.eye(2)] * 3, 12, budget=1000)
    # pruning removes tiny products and drops certification
    mats = [np.diag([1.0, 0.0]), np.diag([1e-5, 0.0])]
    b = jsr_brute_force(mats, 10, budget=100)
    assert not b.certified and b.lower == pytest.approx(1.0)


def test_brute_force_known_pair():
    # classic pair with JSR equal to the golden ratio
    mats = [np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([[1.0, 0.0], [1.0, 1.0]])]
    b = jsr_brute_force(mats, 12)
    phi = (1 + math.sqrt(5)) / 2
    assert b.lower <= phi + 1e-12 and phi <= b.upper + 1e-12
    assert b.lower == pytest.approx(phi, rel=1e-12)


def test_limit_formula_scalar_uniform():
    t = jsr_limit_formula(dist.uniform_scalar(), 100)
    assert len(t.rows) == 100
    assert np.allclose(t.estimates(), (1 / (np.arange(1, 101) + 1)) ** (1 / np.arange(1, 101)))
    assert t.is_monotone() and not t.heuristic


def test_limit_formula_point_mass_constant():
    a = np.array([[0.4, 0.3], [0.2, 0.1]])
    t = jsr_limit_formula(MatrixDistribution.point_mass(a), 10)
    assert np.allclose(t.estimates(), max(abs(np.linalg.eigvals(a))))


def test_limit_formula_pair_even():
    t = jsr_limit_formula(MatrixDistribution.finite(PAIR), 16, use_even_only=True)
    assert [r.p for r in t.rows] == list(range(2, 17, 2))
    assert t.is_monotone()
    assert abs(t.final - 0.9) < 0.05


def test_limit_formula_signed_defaults_even():
    signed = MatrixDistribution.finite([[[0.5, -0.6], [0.3, 0.4]], [[0.2, 0.7], [-0.5, 0.1]]])
    t = jsr_limit_formula(signed, 8)
    assert t.even_only and all(r.p % 2 == 0 for r in t.rows) and not t.heuristic
    with pytest.raises(AssumptionViolated):
        jsr_limit_formula(signed, 8, use_even_only=False)
    box = MatrixDistribution.interval([[-1.0, 0.0], [0.0, 0.0]], [[1.0, 1.0], [1.0, 1.0]])
    assert jsr_limit_formula(box, 4).heuristic


def test_extrapolation_is_diagnostic():
    t = ConvergenceTable([TableRow(1, 0.5, "x", 0.0), TableRow(2, 0.75, "x", 0.0)])
    assert t.extrapolated() == pytest.approx(1.0)
    assert "extrapolated" in t.summary()


@given(st.lists(square(2, nonneg_entries), min_size=1, max_size=3))
def test_sandwich_nonnegative(mats):
    d = MatrixDistribution.finite(mats)
    b = jsr_brute_force(mats, 6)
    t = jsr_limit_formula(d, 6)
    assert np.all(t.estimates() >= 0)
    assert np.all(t.estimates() <= b.upper + 1e-9)
    assert t.is_monotone(slack=1e-9 * max(1.0, b.upper))


@given(st.lists(square(2), min_size=1, max_size=3), st.floats(0.1, 3.0))
def test_brute_force_scaling_equivariance(mats, c):
    b = jsr_brute_force(mats, 5)
    bc = jsr_brute_force([c * m for m in mats], 5)
    assert bc.lower == pytest.approx(c * b.lower, rel=1e-9, abs=1e-12)
    assert bc.upper == pytest.approx(c * b.upper, rel=1e-9, abs=1e-12)


@given(st.lists(square(2), min_size=1, max_size=3), st.integers(-6, 6))
def test_limit_formula_scaling_by_powers_of_two(mats, e):
    # scaling by 2**e is exact in floating point, so the tables scale exactly
    c = 2.0**e
    d = MatrixDistribution.finite(mats)
    t, tc = jsr_limit_formula(d, 4), jsr_limit_formula(d.scaled(c), 4)
    assert np.allclose(tc.estimates(), c * t.estimates(), rtol=1e-12, atol=0)


@given(st.lists(square(2), min_size=1, max_size=3), st.floats(0.1, 3.0))
def test_limit_formula_scaling_symmetric(mats, c):
    # near-defective spectra make rho ill conditioned under rounding, so a
    # general scale factor is only checked on symmetric atoms
    d = MatrixDistribution.finite([m + m.T for m in mats])
    t, tc = jsr_limit_formula(d, 4), jsr_limit_formula(d.scaled(c), 4)
    assert np.allclose(tc.estimates(), c * t.estimates(), rtol=1e-8, atol=1e-12)


@given(st.lists(square(2, nonneg_entries), min_size=1, max_size=3), st.floats(0.1, 3.0))
def test_limit_formula_scaling_nonnegative(mats, c):
    # the Perron root is entrywise well conditioned, even for near-defective atoms
    d = MatrixDistribution.finite(mats)
    t, tc = jsr_limit_formula(d, 6), jsr_limit_formula(d.scaled(c), 6)
    assert np.allclose(tc.estimates(), c * t.estimates(), rtol=1e-10, atol=0)


def test_lift_consistency_small():
    rng = np.random.default_rng(0)
    for _ in range(5):
        mats = [rng.standard_normal((2, 2)) for _ in range(2)]
        b = jsr_brute_force(mats, 8)
        bl = jsr_brute_force([tensor.lift_matrix(m, 2) for m in mats], 8)
        assert bl.lower == pytest.approx(b.lower**2, rel=1e-9)
        assert bl.lower <= b.upper**2 + 1e-9


def test_gap_report(tmp_path):
    r = jsr_gap_report(MatrixDistribution.finite(PAIR), 16, 12)
    assert 0.85 <= r.table.final <= r.bounds.upper + 1e-9
    assert r.residual == pytest.approx(r.bounds.upper - r.table.final)
    r.write_csv(tmp_path / "gap.csv")
    assert (tmp_path / "gap.csv").read_text().startswith("quantity,value\n")
    with pytest.raises(ValueError):
        jsr_gap_report(dist.example5(), 4, 4)


def test_gap_residual_shrinks_singleton():
    a = np.array([[0.6, 0.3], [0.1, 0.5]])
    d = MatrixDistribution.point_mass(a)
    r1 = jsr_gap_report(d, 2, 2).residual
    r2 = jsr_gap_report(d, 8, 20).residual
    assert 0 <= r2 < r1


def test_table_csv_format(tmp_path):
    t = jsr_limit_formula(dist.uniform_scalar(), 3)
    t.write_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_bytes().split(b"\n")
    assert lines[0] == b"p,estimate,method,seconds"
    assert lines[1].startswith(b"1,0.5,")
    assert b"\r" not in (tmp_path / "t.csv").read_bytes()
