"""Energies, fluxes, stencils and convergence tools."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manufactured import manufactured
from rarefaction.background import ConstantBackground
from rarefaction.diagnostics import (RunTooShortError, delta_convergence, energy, energy_balance,
                                     fd_weights, flux, global_energy, kappa_growth, multiplier,
                                     psi_field, t_derivative)
from rarefaction.evolution import constant_state_data, march


@settings(max_examples=80, deadline=None)
@given(xs=st.lists(st.floats(-1, 1), min_size=4, max_size=7, unique=True),
       x0=st.floats(-1, 1), m=st.integers(0, 3))
def test_fd_weights_exact_on_polynomials(xs, x0, m):
    xs = np.array(sorted(xs))
    if np.min(np.diff(xs)) < 0.05:
        return
    w = fd_weights(x0, xs, m)
    for p in range(len(xs)):
        exact = 0.0 if p < m else np.prod(np.arange(p, p - m, -1)) * x0 ** (p - m)
        assert w @ xs ** p == pytest.approx(exact, abs=1e-8 * max(1, np.sum(np.abs(w))))


def test_t_derivative_order():
    errs = []
    for n in (20, 40, 80):
        u = np.linspace(0, 1, n + 1)
        errs.append(np.max(np.abs(t_derivative(np.sin(3 * u), u, 2) + 9 * np.sin(3 * u))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.8)


@pytest.fixture(scope="module")
def const_grid():
    from rarefaction.core_state import GammaLaw
    bg = ConstantBackground(GammaLaw(1.4))
    return march(constant_state_data(bg, 1e-2, np.linspace(0, 0.1, 21)), bg, 2.0)


def test_constant_state_energy_vanishes(const_grid):
    for kind in ("local", "global_w", "global_wbar"):
        rep = energy(const_grid, "T3w", kind)
        assert np.max(np.abs(rep.E)) <= 1e-18
        assert np.max(np.abs(rep.F)) <= 1e-18
    assert np.max(np.abs(flux(const_grid, ("wbar", 2), "local", u=0.05))) <= 1e-18


def test_multipliers(const_grid):
    a, b = multiplier(const_grid, "local")
    assert np.allclose(a, 1.0) and np.allclose(b, 1.0)
    a, _ = multiplier(const_grid, "global_w", s=0.5)
    assert np.allclose(a[:, 0], const_grid.t ** 1.5)
    with pytest.raises(KeyError):
        multiplier(const_grid, "bogus")
    with pytest.raises(ValueError):
        multiplier(const_grid, "local", s=1.5)


def test_psi_selector_errors(const_grid):
    with pytest.raises(KeyError):
        psi_field(const_grid, "r", 1)
    with pytest.raises(KeyError):
        energy(const_grid, "Tfoo")


def test_energy_balance_closes():
    d = []
    for n in (20, 40):
        grid, psi, a, b = manufactured(n, n)
        rep = energy_balance(grid, psi, a, b)
        d.append(abs(rep.defect))
        assert abs(rep.defect) <= 0.05 * rep.scale
    assert np.log2(d[0] / d[1]) > 1.8


def test_energy_report_sum(const_grid):
    rep = global_energy(const_grid, n=2)
    assert rep.kind == "global_w+global_wbar"
    assert rep.E.shape == const_grid.t.shape


def test_kappa_growth_needs_long_run(const_grid):
    with pytest.raises(RunTooShortError):
        kappa_growth(const_grid)


def test_delta_convergence_needs_three_runs(const_grid):
    with pytest.raises(ValueError):
        delta_convergence([const_grid, const_grid], [1e-2, 5e-3])


def test_growth_exponent_decimation_invariant(const_table):
    from rarefaction.evolution import build_taylor_data
    u = np.linspace(0.0, 0.1, 21)
    d = build_taylor_data(const_table, 1e-2, 3, u)
    full = march(d, const_table, 3.0)
    half = march(d, const_table, 3.0, store_every=2)
    e1 = energy(full, "T1wbar", "local").fits["growth_exponent"]
    e2 = energy(half, "T1wbar", "local").fits["growth_exponent"]
    assert abs(e1 - e2) <= 0.05
