"""Closed-form centered rarefaction behind a withdrawn piston (planar, 1-D).

A gas at rest with sound speed ``c1`` fills ``x > 0``; at ``t = 0`` a piston
at ``x = 0`` starts moving left with speed ``vp``.  The solution depends on
``xi = x/t`` only.  Between the piston path and the fan head the gas moves
with the piston; inside the fan

    v = 2/(gamma+1) (xi - c1),    c = (gamma-1)/(gamma+1) (xi - c1) + c1,

and the outgoing invariant ``w = c1/(gamma-1)`` is constant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_state import FluidState, GammaLaw, InvariantPair


class FanRegionError(ValueError):
    """Raised for a similarity coordinate outside the rarefaction fan.

    Attributes
    ----------
    region : str
        One of ``"undisturbed"``, ``"piston"`` (uniform state moving with the
        piston), ``"vacuum"`` or ``"behind_piston"``.
    """

    def __init__(self, region: str, message: str) -> None:
        super().__init__(message)
        self.region = region


@dataclass(frozen=True)
class PistonProblem:
    """Piston withdrawal problem.

    Parameters
    ----------
    c1 : float
        Sound speed of the undisturbed gas.
    vp : float
        Piston withdrawal speed (non-negative).
    eos : GammaLaw
        Equation of state.
    """

    c1: float
    vp: float
    eos: GammaLaw = GammaLaw()

    def __post_init__(self) -> None:
        if self.c1 <= 0.0:
            raise ValueError("c1 must be positive")
        if self.vp < 0.0:
            raise ValueError("vp must be non-negative")

    @property
    def vacuum(self) -> bool:
        """True when the piston outruns the gas and a vacuum zone forms."""
        return self.vp >= 2.0 * self.c1 / (self.eos.gamma - 1.0)

    @property
    def tail(self) -> float:
        """Leading edge of the fan, adjacent to the undisturbed gas."""
        return self.c1

    @property
    def head(self) -> float:
        """Trailing edge: where ``v = -vp``, or where ``c = 0`` if vacuum."""
        g = self.eos.gamma
        if self.vacuum:
            return -2.0 * self.c1 / (g - 1.0)
        return self.c1 - 0.5 * (g + 1.0) * self.vp

    def constant_states(self) -> dict[str, FluidState]:
        """The uniform states bordering the fan."""
        g = self.eos.gamma
        out = {"undisturbed": FluidState(self.c1, 0.0)}
        if not self.vacuum:
            out["piston"] = FluidState(self.c1 - 0.5 * (g - 1.0) * self.vp, -self.vp)
        return out

    def region_of(self, xi: float) -> str:
        """Name the region containing similarity coordinate ``xi``."""
        if xi > self.tail:
            return "undisturbed"
        if xi >= self.head:
            return "fan"
        if self.vacuum:
            return "vacuum" if xi >= -self.vp else "behind_piston"
        return "piston" if xi >= -self.vp else "behind_piston"


def _check_fan(xi: np.ndarray, prob: PistonProblem) -> None:
    tol = 1e-14 * max(1.0, abs(prob.c1))
    bad = (xi > prob.tail + tol) | (xi < prob.head - tol)
    if np.any(bad):
        x0 = float(np.atleast_1d(xi)[np.atleast_1d(bad)][0])
        region = prob.region_of(x0)
        raise FanRegionError(region, f"xi={x0!r} lies in the {region} region, outside the fan "
                                     f"[{prob.head!r}, {prob.tail!r}]")


def fan_state(xi, prob: PistonProblem) -> FluidState:
    """Sound speed and velocity inside the fan at ``xi = x/t``."""
    xi = np.asarray(xi, dtype=float)
    _check_fan(xi, prob)
    g = prob.eos.gamma
    s = xi - prob.c1
    v = 2.0 / (g + 1.0) * s
    c = (g - 1.0) / (g + 1.0) * s + prob.c1
    if xi.ndim == 0:
        return FluidState(float(c), float(v))
    return FluidState(c, v)


def fan_invariants(xi, prob: PistonProblem) -> InvariantPair:
    """Riemann invariants inside the fan, from the displayed closed form."""
    xi = np.asarray(xi, dtype=float)
    _check_fan(xi, prob)
    g = prob.eos.gamma
    w = np.full_like(xi, prob.c1 / (g - 1.0))
    wbar = 2.0 / (g + 1.0) * (xi - prob.c1) + prob.c1 / (g - 1.0)
    if xi.ndim == 0:
        return InvariantPair(float(w), float(wbar))
    return InvariantPair(w, wbar)


def sample_fan(prob: PistonProblem, n: int = 101) -> dict[str, np.ndarray]:
    """Tabulate ``(xi, c, v, w, wbar)`` on ``n`` equispaced fan points."""
    xi = np.linspace(prob.head, prob.tail, n)
    st = fan_state(xi, prob)
    inv = fan_invariants(xi, prob)
    return {"xi": xi, "c": np.asarray(st.c), "v": np.asarray(st.v),
            "w": np.asarray(inv.w), "wbar": np.asarray(inv.wbar)}
