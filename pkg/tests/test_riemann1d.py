"""The planar piston fan."""
import numpy as np
import pytest

from rarefaction.core_state import GammaLaw
from rarefaction.riemann1d import FanRegionError, PistonProblem, fan_invariants, fan_state, sample_fan


@pytest.fixture
def prob():
    return PistonProblem(c1=1.0, vp=1.0, eos=GammaLaw(1.4))


def test_fan_edges(prob):
    s = fan_state(1.0, prob)
    assert (s.c, s.v) == pytest.approx((1.0, 0.0), abs=1e-12)
    s = fan_state(0.0, prob)
    assert (s.c, s.v) == pytest.approx((0.8333, -0.8333), abs=1e-4)


def test_fan_invariants_at_zero(prob):
    p = fan_invariants(0.0, prob)
    assert (p.w, p.wbar) == pytest.approx((2.5, 1.6667), abs=1e-4)


def test_fan_is_linear_in_xi(prob):
    g = prob.eos.gamma
    h = 1e-3
    for xi in (-0.1, 0.2, 0.9):
        dc = (fan_state(xi + h, prob).c - fan_state(xi - h, prob).c) / (2 * h)
        dv = (fan_state(xi + h, prob).v - fan_state(xi - h, prob).v) / (2 * h)
        assert dv == pytest.approx(2 / (g + 1), abs=1e-8)
        assert dc == pytest.approx((g - 1) / (g + 1), abs=1e-8)


def test_w_constant_across_fan(prob):
    xs = np.linspace(prob.head, prob.tail, 11)
    w = fan_invariants(xs, prob).w
    assert np.ptp(w) < 1e-12


def test_region_errors(prob):
    assert prob.region_of(2.0) == "undisturbed"
    assert prob.region_of(0.0) == "fan"
    assert prob.region_of(-0.5) == "piston"
    with pytest.raises(FanRegionError):
        fan_state(2.0, prob)
    with pytest.raises(FanRegionError):
        fan_state(prob.head - 0.1, prob)


def test_vacuum_piston():
    p = PistonProblem(c1=1.0, vp=10.0, eos=GammaLaw(1.4))
    assert p.vacuum
    with pytest.raises(FanRegionError):
        fan_state(p.head - 1.0, p)
    assert "piston" not in p.constant_states()


def test_sample_fan_columns(prob):
    d = sample_fan(prob, 21)
    assert set(d) >= {"xi", "c", "v", "w", "wbar"}
    assert len(d["xi"]) == 21
