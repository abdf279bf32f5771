"""Gamma-law gas states, Riemann invariants and the acoustical frame.

All routines accept scalars or numpy arrays and are vectorized.  The
Riemann invariants are

    w    = c/(gamma - 1) - v/2      (outgoing family)
    wbar = c/(gamma - 1) + v/2      (ingoing family)

with inverse ``c = (gamma - 1)(wbar + w)/2`` and ``v = wbar - w``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

#: Sound speeds below this threshold are treated as vacuum and rejected.
C_MIN = 1e-12


class VacuumError(ValueError):
    """Raised when a state has (or would have) a non-positive sound speed."""


@dataclass(frozen=True)
class GammaLaw:
    """Polytropic equation of state ``p = K rho**gamma``.

    Parameters
    ----------
    gamma : float
        Ratio of specific heats; must exceed one.
    """

    gamma: float = 1.4

    def __post_init__(self) -> None:
        if not np.isfinite(self.gamma) or self.gamma <= 1.0:
            raise ValueError(f"gamma must be > 1, got {self.gamma!r}")

    @property
    def k(self) -> float:
        """The ratio (gamma - 1)/(gamma + 1) that sets the 1-D fan slope."""
        return (self.gamma - 1.0) / (self.gamma + 1.0)


@dataclass(frozen=True)
class FluidState:
    """Sound speed and radial velocity (scalars or equally shaped arrays)."""

    c: ArrayLike
    v: ArrayLike


@dataclass(frozen=True)
class InvariantPair:
    """Outgoing (``w``) and ingoing (``wbar``) Riemann invariants."""

    w: ArrayLike
    wbar: ArrayLike


@dataclass(frozen=True)
class FramePoint:
    """A point of the acoustical chart together with its radius and kappa.

    ``kappa`` is the inverse density of the outgoing cones, ``-dr/du`` at
    fixed ``t``.  It vanishes only at the singular time ``t_singular``.
    """

    t: float
    u: float
    r: float
    kappa: float
    t_singular: float = 0.0

    def __post_init__(self) -> None:
        if self.r <= 0.0:
            raise ValueError("radius must be positive")
        if self.kappa < 0.0:
            raise ValueError("kappa must be non-negative")
        if self.kappa == 0.0 and self.t != self.t_singular:
            raise ValueError("kappa may vanish only at the singular time")

    def mu(self, c: float) -> float:
        """Return the product ``c * kappa``."""
        return c * self.kappa


def to_invariants(state: FluidState, eos: GammaLaw) -> InvariantPair:
    """Convert ``(c, v)`` to Riemann invariants ``(w, wbar)``.

    Raises
    ------
    VacuumError
        If any sound speed is at or below :data:`C_MIN`.
    """
    c = np.asarray(state.c, dtype=float)
    v = np.asarray(state.v, dtype=float)
    if np.any(c <= C_MIN):
        raise VacuumError("sound speed must be positive (vacuum is excluded)")
    h = c / (eos.gamma - 1.0)
    w = h - 0.5 * v
    wbar = h + 0.5 * v
    if w.ndim == 0:
        return InvariantPair(float(w), float(wbar))
    return InvariantPair(w, wbar)


def from_invariants(pair: InvariantPair, eos: GammaLaw) -> FluidState:
    """Convert Riemann invariants back to ``(c, v)``.

    Raises
    ------
    VacuumError
        If ``w + wbar`` is not positive, i.e. the implied sound speed is not.
    """
    w = np.asarray(pair.w, dtype=float)
    wbar = np.asarray(pair.wbar, dtype=float)
    c = 0.5 * (eos.gamma - 1.0) * (wbar + w)
    if np.any(c <= C_MIN):
        raise VacuumError("w + wbar must be positive")
    v = wbar - w
    if c.ndim == 0:
        return FluidState(float(c), float(v))
    return FluidState(c, v)


def sound_speed(w: ArrayLike, wbar: ArrayLike, gamma: float) -> ArrayLike:
    """Unchecked ``c`` from the invariants (used inside hot loops)."""
    return 0.5 * (gamma - 1.0) * (np.asarray(wbar) + np.asarray(w))


def characteristic_speeds(state: FluidState) -> tuple[ArrayLike, ArrayLike]:
    """Return the outgoing and ingoing acoustic speeds ``(v + c, v - c)``."""
    c = np.asarray(state.c, dtype=float)
    v = np.asarray(state.v, dtype=float)
    if np.any(c <= C_MIN):
        raise VacuumError("sound speed must be positive")
    out, inn = v + c, v - c
    if out.ndim == 0:
        return float(out), float(inn)
    return out, inn


def normalize_coordinates(t: ArrayLike, x: ArrayLike, u: ArrayLike,
                          r0: float, c0: float) -> tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Map dimensional ``(t, x, u)`` to the unit chart.

    The map is ``(t, x, u) -> (c0 t / r0 + 1, x / r0, u / c0)``.  It sends
    the initial singular sphere (``t = 0``, radius ``r0``) to ``t' = 1``,
    ``x' = 1``, and makes the undisturbed sound speed equal to one.

    Parameters
    ----------
    t, x, u : float or ndarray
        Time, radius and acoustical function in physical units.
    r0 : float
        Radius of the singular sphere.
    c0 : float
        Undisturbed sound speed.
    """
    if r0 <= 0.0 or c0 <= 0.0:
        raise ValueError("r0 and c0 must be positive")
    return c0 * np.asarray(t) / r0 + 1.0, np.asarray(x) / r0, np.asarray(u) / c0


def denormalize_coordinates(tn: ArrayLike, xn: ArrayLike, un: ArrayLike,
                            r0: float, c0: float) -> tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Inverse of :func:`normalize_coordinates`."""
    if r0 <= 0.0 or c0 <= 0.0:
        raise ValueError("r0 and c0 must be positive")
    return (np.asarray(tn) - 1.0) * r0 / c0, np.asarray(xn) * r0, np.asarray(un) * c0
