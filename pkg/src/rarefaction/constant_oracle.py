"""Closed-form results for the rest-state exterior (unit chart, ``r = t``).

Besides the explicit first- and second-order transversal data, this module
provides the power-log integral used to propagate decay rates and a small
calculus of decay types: ``(a, b)`` means a size ``t**-a * ln(t)**b``, with an
optional dimensional prefactor ``r0**p * c0**q``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial, log
from typing import Callable

import numpy as np

from .core_state import GammaLaw


def _closed_forms(g: float) -> dict[str, Callable[[np.ndarray], np.ndarray]]:
    def ln(t):
        return np.log(t)

    return {
        "Tw": lambda t: np.zeros_like(t),
        "Twbar": lambda t: -2.0 / ((g + 1.0) * t),
        "kappa": ln,
        "T2w": lambda t: ln(t) / ((g + 1.0) * t ** 2),
        "T2wbar": lambda t: ((g + 9.0) / (g + 1.0) ** 2 * (1.0 / t - 1.0 / t ** 2)
                             - 5.0 / (g + 1.0) * ln(t) / t ** 2),
        "Tkappa": lambda t: (-(g + 9.0) / (2.0 * (g + 1.0)) * ln(t)
                             + (5.0 * g + 17.0) / (2.0 * (g + 1.0)) * (1.0 - 1.0 / t)
                             - (2.0 * g + 4.0) / (g + 1.0) * ln(t) / t),
    }


#: Quantity names accepted by :func:`closed_form`, with their table columns.
QUANTITIES = {"Tw": "T1w", "Twbar": "T1wbar", "kappa": "kappa",
              "T2w": "T2w", "T2wbar": "T2wbar", "Tkappa": "T1kappa"}
_UNICODE = {"Tw̄": "Twbar", "κ": "kappa", "T²w": "T2w", "T²w̄": "T2wbar", "Tκ": "Tkappa"}


def closed_form(quantity: str, t, eos: GammaLaw):
    """Evaluate an explicit rest-state formula at ``t >= 1``.

    Parameters
    ----------
    quantity : str
        One of ``Tw, Twbar, kappa, T2w, T2wbar, Tkappa`` (unicode spellings
        such as ``"Tκ"`` are accepted too).
    t : float or ndarray
        Time in the unit chart, where ``r = t``.
    """
    name = _UNICODE.get(quantity, quantity)
    forms = _closed_forms(eos.gamma)
    if name not in forms:
        raise KeyError(f"unknown quantity {quantity!r}; expected one of {sorted(forms)}")
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 1.0):
        raise ValueError("closed forms are stated for t >= 1")
    out = forms[name](tt)
    return float(out) if out.ndim == 0 else out


def integrate_power_log(a: int, b: int, t: float) -> float:
    """``int_1^t s**-a ln(s)**b ds`` in closed form.

    For ``a = 1`` this is ``ln(t)**(b+1)/(b+1)``.  For ``a >= 2`` it is the
    finite sum

        -sum_{i=0}^{b} b!/(b-i)! (a-1)**-(i+1) t**-(a-1) ln(t)**(b-i) + b! (a-1)**-(b+1),

    so the integral stays bounded as ``t -> inf``, with limit
    ``b!/(a-1)**(b+1)``.  ``t = inf`` is accepted.
    """
    if int(a) != a or a < 1:
        raise ValueError("a must be an integer >= 1")
    if int(b) != b or b < 0:
        raise ValueError("b must be a non-negative integer")
    a, b = int(a), int(b)
    if t < 1.0:
        raise ValueError("t must be >= 1")
    if a == 1:
        return log(t) ** (b + 1) / (b + 1)
    if np.isinf(t):
        return factorial(b) / (a - 1) ** (b + 1)
    L = log(t)
    s = 0.0
    for i in range(b + 1):
        s += factorial(b) / factorial(b - i) * (a - 1) ** -(i + 1) * t ** -(a - 1) * L ** (b - i)
    return -s + factorial(b) / (a - 1) ** (b + 1)


@dataclass(frozen=True, order=False)
class DecayTerm:
    """A decay envelope ``coeff * r0**p * c0**q * t**-a * ln(t)**b``."""

    p: int = 0
    q: int = 0
    a: int = 0
    b: int = 0
    coeff: float = 1.0

    def __mul__(self, other: "DecayTerm") -> "DecayTerm":
        return DecayTerm(self.p + other.p, self.q + other.q, self.a + other.a,
                         self.b + other.b, self.coeff * other.coeff)

    def subordinate_to(self, other: "DecayTerm") -> bool:
        """True when this term decays at least as fast as ``other``."""
        return self.a > other.a or (self.a == other.a and self.b <= other.b)

    def __le__(self, other: "DecayTerm") -> bool:
        return self.subordinate_to(other)

    def envelope(self, t):
        """``t**-a ln(t)**b`` (without the coefficient)."""
        t = np.asarray(t, dtype=float)
        return t ** (-self.a) * np.log(t) ** self.b

    def fit_constant(self, t, values, t_min: float = 1.0 + 1e-6) -> float:
        """Smallest ``K`` with ``|values| <= K * envelope`` on ``t >= t_min``."""
        t = np.asarray(t, dtype=float)
        m = t >= t_min
        env = self.envelope(t[m])
        return float(np.max(np.abs(np.asarray(values)[m]) / env))


def decay_type_of(n: int, quantity: str) -> DecayTerm:
    """Envelope for ``T^n w``, ``T^n wbar`` or ``T^(n-1) kappa`` on the rest state.

    The dimensional prefactors are ``c0**-(n-1)`` for ``w`` and ``wbar`` and
    ``r0 / c0**n`` for ``kappa``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    name = _UNICODE.get(quantity, quantity)
    if name in ("w",):
        return DecayTerm(0, -(n - 1), 2, 1)
    if name in ("wbar", "w̄"):
        return DecayTerm(0, -(n - 1), 1, 0)
    if name in ("kappa",):
        return DecayTerm(1, -n, 0, 1)
    raise KeyError(f"unknown quantity {quantity!r}; expected w, wbar or kappa")
