"""Rest-state closed forms, the power-log integral and decay types."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rarefaction.constant_oracle import DecayTerm, closed_form, decay_type_of, integrate_power_log


def test_closed_form_examples(eos):
    g = eos.gamma
    assert closed_form("kappa", np.e, eos) == pytest.approx(1.0)
    assert closed_form("Twbar", 1.0, eos) == pytest.approx(-2 / (g + 1))
    assert closed_form("T2w", 1.0, eos) == 0.0
    assert closed_form("Tκ", 1.0, eos) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        closed_form("kappa", 0.5, eos)
    with pytest.raises(KeyError):
        closed_form("T9w", 2.0, eos)


def test_closed_forms_solve_transport(eos):
    """L kappa = -(g+1)/2 Tw̄ + (3-g)/2 Tw on the rest state, by differences."""
    g, h = eos.gamma, 1e-5
    for t in (1.3, 2.0, 7.0):
        for lhs, tw, twb in (("kappa", "Tw", "Twbar"), ("Tkappa", "T2w", "T2wbar")):
            d = (closed_form(lhs, t + h, eos) - closed_form(lhs, t - h, eos)) / (2 * h)
            rhs = -(g + 1) / 2 * closed_form(twb, t, eos) + (3 - g) / 2 * closed_form(tw, t, eos)
            assert d == pytest.approx(rhs, rel=1e-8)


def test_integrate_power_log_examples():
    assert integrate_power_log(1, 1, np.e) == pytest.approx(0.5)
    assert integrate_power_log(2, 0, np.inf) == pytest.approx(1.0)
    assert integrate_power_log(2, 2, np.inf) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        integrate_power_log(0, 1, 2.0)
    with pytest.raises(ValueError):
        integrate_power_log(2, 1, 0.5)


@settings(max_examples=60, deadline=None)
@given(a=st.integers(1, 5), b=st.integers(0, 3), t=st.floats(1.0, 1e4))
def test_integrate_power_log_quadrature(a, b, t):
    ref, _ = quad(lambda s: s ** -a * math.log(s) ** b, 1.0, t, epsabs=1e-13, epsrel=1e-13,
                  limit=200)
    assert abs(integrate_power_log(a, b, t) - ref) <= 1e-10 * max(1.0, abs(ref))


@pytest.mark.parametrize("n, q, term", [
    (3, "w", (2, 1)), (3, "wbar", (1, 0)), (1, "kappa", (0, 1))])
def test_decay_types(n, q, term):
    d = decay_type_of(n, q)
    assert (d.a, d.b) == term


def test_subordination():
    assert DecayTerm(a=2, b=1) <= DecayTerm(a=1, b=0)
    assert DecayTerm(a=1, b=0) <= DecayTerm(a=1, b=1)
    assert not DecayTerm(a=1, b=1) <= DecayTerm(a=1, b=0)


def test_envelopes_hold_on_closed_forms(eos):
    t = np.geomspace(1.01, 1e3, 300)
    for n, q, col in ((2, "w", "T2w"), (1, "wbar", "Twbar"), (2, "wbar", "T2wbar"),
                      (1, "kappa", "kappa"), (2, "kappa", "Tkappa")):
        K = decay_type_of(n, q).fit_constant(t, closed_form(col, t, eos), t_min=2.0)
        assert np.isfinite(K) and K < 10.0, col
