"""Gamma law, Riemann invariants, characteristic speeds and unit charts."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rarefaction.core_state import (FluidState, FramePoint, GammaLaw, InvariantPair, VacuumError,
                                    characteristic_speeds, denormalize_coordinates,
                                    from_invariants, normalize_coordinates, sound_speed,
                                    to_invariants)


@pytest.mark.parametrize("c, v, gamma, w, wbar", [
    (1.0, 0.0, 1.4, 2.5, 2.5),
    (1.0, 1.0, 3.0, 0.0, 1.0),
    (0.8333, -0.8333, 1.4, 2.5, 1.6667),
])
def test_to_invariants_examples(c, v, gamma, w, wbar):
    p = to_invariants(FluidState(c, v), GammaLaw(gamma))
    assert p.w == pytest.approx(w, abs=1e-4)
    assert p.wbar == pytest.approx(wbar, abs=1e-4)


@pytest.mark.parametrize("w, wbar, gamma, c, v", [
    (2.5, 2.5, 1.4, 1.0, 0.0),
    (0.0, 1.0, 3.0, 1.0, 1.0),
    (1.0, 3.0, 2.0, 2.0, 2.0),
])
def test_from_invariants_examples(w, wbar, gamma, c, v):
    s = from_invariants(InvariantPair(w, wbar), GammaLaw(gamma))
    assert s.c == pytest.approx(c, abs=1e-12)
    assert s.v == pytest.approx(v, abs=1e-12)


def test_vacuum_is_rejected():
    with pytest.raises(VacuumError):
        from_invariants(InvariantPair(-1.0, 0.5), GammaLaw(1.4))
    with pytest.raises(VacuumError):
        to_invariants(FluidState(-0.1, 0.0), GammaLaw(1.4))


def test_gamma_law_validation():
    assert GammaLaw(1.4).k == pytest.approx(0.4 / 2.4)
    for bad in (1.0, 0.5, float("nan")):
        with pytest.raises(ValueError):
            GammaLaw(bad)


@pytest.mark.parametrize("c, v, lp, lm", [
    (1.0, 0.0, 1.0, -1.0), (1.0, 0.5, 1.5, -0.5), (0.5, -0.8, -0.3, -1.3)])
def test_characteristic_speeds(c, v, lp, lm):
    a, b = characteristic_speeds(FluidState(c, v))
    assert (a, b) == pytest.approx((lp, lm), abs=1e-14)


def test_sound_speed_matches_inverse():
    assert sound_speed(2.5, 2.5, 1.4) == pytest.approx(1.0)


def test_normalize_examples():
    r0, c0 = 2.0, 3.0
    assert normalize_coordinates(0.0, r0, 0.0, r0, c0) == pytest.approx((1.0, 1.0, 0.0))
    assert normalize_coordinates(1.0, 0.0, 1.0, 1.0, 1.0) == pytest.approx((2.0, 0.0, 1.0))


def test_frame_point_mu():
    p = FramePoint(t=2.0, u=0.1, r=1.9, kappa=0.5)
    assert p.mu(2.0) == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(c=st.floats(1e-3, 1e3), v=st.floats(-1e3, 1e3), gamma=st.floats(1.05, 3.0))
def test_invariant_round_trip(c, v, gamma):
    eos = GammaLaw(gamma)
    back = from_invariants(to_invariants(FluidState(c, v), eos), eos)
    scale = max(abs(c), abs(v), 1.0)
    assert abs(back.c - c) <= 1e-12 * scale / (gamma - 1)
    assert abs(back.v - v) <= 1e-12 * scale / (gamma - 1)


@settings(max_examples=200, deadline=None)
@given(t=st.floats(0, 10), x=st.floats(0, 10), u=st.floats(0, 5),
       r0=st.floats(0.1, 10), c0=st.floats(0.1, 10))
def test_coordinate_round_trip(t, x, u, r0, c0):
    back = denormalize_coordinates(*normalize_coordinates(t, x, u, r0, c0), r0, c0)
    assert np.allclose(back, (t, x, u), rtol=1e-12, atol=1e-12 * max(r0, 1 / c0, 10))
