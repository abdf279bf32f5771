"""Transversal data on the first cone and the singular-point recursion."""
from fractions import Fraction

import numpy as np
import pytest

from rarefaction.background import ConstantBackground, PerturbationSpec, PerturbedBackground
from rarefaction.boundary_data import build_table, singular_series, vanishing_orders
from rarefaction.constant_oracle import QUANTITIES, closed_form


def test_table_matches_closed_forms(const_table, eos):
    ts = np.array([1.5, 2.0, np.e, 3.0])
    for q, col in QUANTITIES.items():
        exact = closed_form(q, ts, eos)
        got = const_table.at(ts, col)
        assert np.max(np.abs(got - exact)) <= 1e-8 * max(1.0, np.max(np.abs(exact))), q


def test_spec_examples(const_table):
    assert const_table.at(np.e, "kappa") == pytest.approx(1.0, rel=1e-8)
    assert const_table.at(2.0, "T1wbar") == pytest.approx(-0.41667, abs=1e-5)
    assert np.max(np.abs(const_table["T1w"])) <= 1e-14
    # the closed form gives 1/((g+1) e^2) = 0.0563897...
    assert const_table.at(np.e, "T2w") == pytest.approx(0.056388, abs=2e-6)


def test_consistency_identity(const_table):
    assert const_table.consistency_defect() <= 1e-12


def test_perturbed_table_L_columns_match_differences(eos):
    """The stored L-derivatives against differences of the stored columns."""
    bg = PerturbedBackground(PerturbationSpec(1e-2, 0.1), 1, eos)
    tab = build_table(bg, 4, 4.0, step=1e-3)
    assert tab.consistency_defect() <= 1e-10
    m = (tab.t > 1.5) & (tab.t < 3.9)
    for name in ("T1w", "T1wbar", "T2wbar", "T3w", "T2kappa", "T4w", "T3kappa"):
        fd = np.gradient(tab[name], tab.t, edge_order=2)
        assert np.max(np.abs(fd[m] - tab["L" + name][m])) <= 1e-6, name


def test_singular_series_gamma3():
    s = singular_series(1, 3.0, c0=1, N=3)
    assert s.g[1:4] == (Fraction(-1, 2), Fraction(0), Fraction(-1, 8))


def test_singular_series_zero_seed():
    s = singular_series(0, 1.4, N=10)
    assert all(x == 0 for x in s.g)


def test_singular_series_bounded():
    s = singular_series(1, 1.4, N=30)
    assert max(s.a) <= 2 * s.a[0] + 1
    assert s.bound_holds()


def test_singular_series_rejects_bad_N():
    with pytest.raises(ValueError):
        singular_series(1, 1.4, N=0)


@pytest.fixture(scope="module")
def near_table(eos):
    return build_table(ConstantBackground(eos), 2, 1.1, step=1e-5)


def test_vanishing_orders(near_table):
    fits = vanishing_orders(near_table)
    assert fits["Tw"].exact_zero
    for name, p in (("Twbar+2/(g+1)", 1), ("kappa-t", 2), ("T2wbar", 1), ("T1kappa", 2)):
        assert fits[name].exponent == pytest.approx(p, abs=0.1), name


def test_vanishing_orders_grid_independent(eos, near_table):
    coarse = build_table(ConstantBackground(eos), 2, 1.1, step=2e-5)
    a, b = vanishing_orders(near_table), vanishing_orders(coarse)
    for name in ("kappa-t", "T2wbar", "T1kappa"):
        assert a[name].exponent == pytest.approx(b[name].exponent, abs=1e-2)


def test_out_of_range_lookup(const_table):
    with pytest.raises(ValueError):
        const_table.at(10.0, "kappa")
