"""Initial data and the characteristic march."""
import numpy as np
import pytest

from rarefaction.background import ConstantBackground, PerturbationSpec, PerturbedBackground
from rarefaction.boundary_data import build_table
from rarefaction.diagnostics import t_derivative
from rarefaction.evolution import (CFLError, FoldError, build_taylor_data, constant_state_data,
                                   default_u_star, first_node_discrepancy, march, march_commuted,
                                   residuals)


def test_default_u_star(eos):
    assert default_u_star(eos.gamma) == pytest.approx(0.6)


def test_constant_state_is_preserved(eos):
    bg = ConstantBackground(eos)
    u = np.linspace(0.0, 0.1, 21)
    data = constant_state_data(bg, 1e-2, u)
    grid = march(data, bg, 1.5)
    for name in ("w", "wbar"):
        f = grid.field(name)
        assert np.max(np.abs(f - f[0])) <= 1e-12
    assert np.max(np.abs(grid.r - (grid.t[:, None] - u))) <= 1e-12


def test_taylor_data_satisfies_equations(const_table):
    u = np.linspace(0.0, 0.05, 41)
    d = build_taylor_data(const_table, 0.05, 3, u)
    c, v = d.c, d.v
    assert np.max(np.abs(d.Lwbar + c * v / d.r)) <= 1e-12
    assert np.max(np.abs(d.Lr - (v + c))) <= 1e-12
    # second route for T w: high-order differences of the polynomial
    Tw = t_derivative(d.w, u, 1, accuracy=6)
    assert np.max(np.abs(2 * Tw + d.kappa / c * d.Lw + d.kappa * v / d.r)) <= 1e-10
    # kappa is -d r/du of the data
    assert np.max(np.abs(-t_derivative(d.r, u, 1, accuracy=6) - d.kappa)) <= 1e-10


def test_taylor_data_rejects_bad_input(const_table):
    with pytest.raises(ValueError):
        build_taylor_data(const_table, 1e-2, 9, np.linspace(0, 0.1, 5))
    with pytest.raises(ValueError):
        build_taylor_data(const_table, -1.0, 2, np.linspace(0, 0.1, 5))


def test_fold_error(const_table):
    # T^2 kappa < 0 turns kappa_3 negative far out in u
    with pytest.raises(FoldError):
        build_taylor_data(const_table, 1e-3, 3, np.linspace(0.0, 300.0, 31))


def test_cfl_error(const_table):
    d = build_taylor_data(const_table, 1e-2, 2, np.linspace(0.0, 0.1, 21))
    with pytest.raises(CFLError):
        march(d, const_table, 1.5, dt=0.5)


@pytest.fixture(scope="module")
def perturbed_run(eos):
    bg = PerturbedBackground(PerturbationSpec(1e-2, 0.1), 1, eos)
    tab = build_table(bg, 4, 3.0, step=1e-4)
    u = np.linspace(0.0, 0.1, 41)
    grid = march(build_taylor_data(tab, 1e-2, 3, u), tab, 3.0)
    return tab, grid


def test_smooth_run_residuals(perturbed_run):
    _, grid = perturbed_run
    rep = residuals(grid)
    assert max(rep.max.values()) <= 1e-3
    assert rep.kappa_discrepancy <= 1e-4
    assert np.all(grid.kappa > 0)


def test_first_node_follows_taylor_prediction(perturbed_run):
    tab, grid = perturbed_run
    du = grid.u[1]
    assert first_node_discrepancy(grid, tab) <= 10 * du ** 3


def test_commuted_march_agrees_with_plain_march(eos):
    """Towers against differences of an independent plain march."""
    bg = PerturbedBackground(PerturbationSpec(1e-2, 0.1), 1, eos)
    tab = build_table(bg, 4, 2.0, step=1e-4)
    u = np.linspace(0.0, 0.1, 41)
    com = march_commuted(tab, 1e-2, 3, u, 2.0)
    plain = march(build_taylor_data(tab, 1e-2, 3, u), tab, 2.0)
    i, j = -1, -1
    assert com.t[i] == pytest.approx(plain.t[j])
    for name in ("w", "wbar", "r"):
        assert np.max(np.abs(com.towers[name][i, 0] - plain.field(name)[j])) <= 1e-5
    Tw = t_derivative(plain.w[j], u, 1, accuracy=4)
    assert np.max(np.abs(com.towers["w"][i, 1] - Tw)) <= 1e-3
    assert np.max(np.abs(com.towers["kappa"][i, 0] - plain.kappa[j])) <= 1e-4


def test_commuted_march_requires_order(const_table):
    with pytest.raises(ValueError):
        march_commuted(const_table, 1e-2, 6, np.linspace(0, 0.1, 11), 1.5)
