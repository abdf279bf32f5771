"""Exterior solutions traced along the outgoing cone through the singular sphere.

Everything here is in the unit chart: the singular sphere sits at
``t = 1`` with radius one, and the undisturbed sound speed is one.  A
provider describes the exterior flow restricted to that cone (``C0``): the
Riemann invariants ``w, wbar``, the radius ``r`` and their derivatives along
``L = d/dt``.  Providers must be exact solution traces, i.e. satisfy

    L wbar = -c v / r,      L r = v + c.

Two providers are available: the constant state at rest and a family of
small decaying perturbations built by prescribing ``wbar`` on the cone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import _taylor as tj
from .core_state import FluidState, GammaLaw

_FIELDS = ("w", "wbar", "r", "c", "v")


class BackgroundProvider:
    """Interface for exterior traces along ``C0``.

    Subclasses implement :meth:`jets` and :meth:`speed`; the remaining
    methods are derived from them.
    """

    eos: GammaLaw
    t_singular: float = 1.0

    def jets(self, t, order: int) -> dict[str, np.ndarray]:
        """Normalized Taylor coefficients in ``t`` along ``C0``.

        Returns a mapping with keys ``"w"``, ``"wbar"`` and ``"r"``; each value
        has shape ``(order + 1,) + np.shape(t)`` and entry ``k`` equals
        ``L^k f / k!``.
        """
        raise NotImplementedError

    def speed(self, t, r):
        """Outgoing characteristic speed ``v + c`` of the exterior at ``(t, r)``."""
        raise NotImplementedError

    # derived helpers -------------------------------------------------
    def trace(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(w, wbar, r)`` on ``C0`` at time(s) ``t``."""
        j = self.jets(t, 0)
        return j["w"][0], j["wbar"][0], j["r"][0]

    def state(self, t) -> FluidState:
        w, wb, _ = self.trace(t)
        g = self.eos.gamma
        return FluidState(0.5 * (g - 1.0) * (wb + w), wb - w)

    def radius(self, t):
        return self.trace(t)[2]

    def Lderiv(self, name: str, n: int, t):
        """``L^n`` of one of ``w, wbar, r, c, v`` along ``C0``."""
        if name not in _FIELDS:
            raise KeyError(f"unknown field {name!r}; expected one of {_FIELDS}")
        j = self.jets(t, n)
        g = self.eos.gamma
        if name == "c":
            coeff = 0.5 * (g - 1.0) * (j["wbar"][n] + j["w"][n])
        elif name == "v":
            coeff = j["wbar"][n] - j["w"][n]
        else:
            coeff = j[name][n]
        return factorial(n) * coeff

    def transport_residual(self, t):
        """``L wbar + c v / r`` on ``C0``; zero for a genuine trace."""
        j = self.jets(t, 1)
        g = self.eos.gamma
        w, wb, r = j["w"][0], j["wbar"][0], j["r"][0]
        c = 0.5 * (g - 1.0) * (wb + w)
        return j["wbar"][1] + c * (wb - w) / r


@dataclass(frozen=True)
class ConstantBackground(BackgroundProvider):
    """Gas at rest with unit sound speed; ``C0`` is ``r = t``."""

    eos: GammaLaw = GammaLaw()
    t_singular: float = 1.0

    def jets(self, t, order: int) -> dict[str, np.ndarray]:
        t = np.asarray(t, dtype=float)
        h = 1.0 / (self.eos.gamma - 1.0)
        return {"w": tj.const(h, order, t), "wbar": tj.const(h, order, t),
                "r": tj.variable(t, order)}

    def speed(self, t, r):
        return np.ones(np.broadcast_shapes(np.shape(t), np.shape(r)))


def constant_background(eos: GammaLaw) -> ConstantBackground:
    """Provider for the undisturbed state ``c = 1, v = 0, r = t``."""
    return ConstantBackground(eos)


@dataclass(frozen=True)
class PerturbationSpec:
    """Size and decay of an admissible perturbation of the rest state.

    Attributes
    ----------
    epsilon : float
        Amplitude: ``|c - 1|, |v| <= epsilon/t`` and ``|Lc| <= epsilon/t**(2-delta_exp)``.
    delta_exp : float
        Decay-loss exponent in ``(0, 1/2)``.
    M_n : sequence of float, optional
        Bounds ``|L^n c| <= M_n[n-2] / t**(3 - 2 delta_exp)`` for ``n >= 2``;
        when omitted they are measured from the constructed family.
    """

    epsilon: float = 1e-2
    delta_exp: float = 0.1
    M_n: Optional[Sequence[float]] = None

    def __post_init__(self) -> None:
        if not (0.0 < self.delta_exp < 0.5):
            raise ValueError("delta_exp must lie in (0, 1/2)")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be non-negative")


class PerturbedBackground(BackgroundProvider):
    """Decaying oscillatory perturbation of the rest state.

    The ingoing invariant on ``C0`` is prescribed as

        wbar(t) = 1/(gamma-1) + epsilon A cos(theta + t**delta) / t**(1+delta),

    with ``A`` and ``theta`` drawn from ``seed``.  The outgoing invariant then
    follows from the transport law ``L wbar = -c v / r``, which with
    ``c v = (gamma-1)(wbar**2 - w**2)/2`` gives

        w = sqrt(wbar**2 + 2 r L wbar / (gamma - 1)),

    and ``r`` solves ``L r = v + c`` with ``r(1) = 1``.  The transport law is
    therefore satisfied identically.  ``A`` is scaled with ``1/(gamma-1)`` so
    that the decay bounds hold with the literal ``epsilon``
    (checked by sampling in :meth:`check_bounds`).
    """

    def __init__(self, spec: PerturbationSpec, seed: int, eos: GammaLaw = GammaLaw(),
                 t_max: float = 2.0e3) -> None:
        self.spec = spec
        self.seed = int(seed)
        self.eos = eos
        self.t_singular = 1.0
        rng = np.random.default_rng(self.seed)
        self.theta = float(rng.uniform(0.0, 2.0 * np.pi))
        self.amplitude = float(rng.uniform(0.3, 0.6)) / (
            (1.0 + 2.0 * spec.delta_exp) * max(1.0, eos.gamma - 1.0))
        self._t_max = 0.0
        self._sol = None
        self._solve_radius(t_max)
        self.M_n = tuple(spec.M_n) if spec.M_n is not None else None

    # the prescribed ingoing invariant ---------------------------------
    def _wbar_jet(self, t: np.ndarray, K: int) -> np.ndarray:
        d = self.spec.delta_exp
        tt = tj.variable(t, K)
        phase = tj.power(tt, d)
        phase[0] += self.theta
        _, cos = tj.sincos(phase)
        env = tj.power(tt, -(1.0 + d))
        jet = self.spec.epsilon * self.amplitude * tj.mul(cos, env)
        jet[0] += 1.0 / (self.eos.gamma - 1.0)
        return jet

    def _w_jet(self, wbar: np.ndarray, r: np.ndarray) -> np.ndarray:
        K = r.shape[0] - 1
        g = self.eos.gamma
        dwb = tj.deriv(wbar)[: K + 1]
        return tj.sqrt(tj.mul(wbar[: K + 1], wbar[: K + 1]) + 2.0 / (g - 1.0) * tj.mul(r, dwb))

    def _speed_from(self, wbar0, dwbar0, r):
        g = self.eos.gamma
        w = np.sqrt(wbar0 * wbar0 + 2.0 * r * dwbar0 / (g - 1.0))
        return 0.5 * (g + 1.0) * wbar0 + 0.5 * (g - 3.0) * w

    def speed(self, t, r):
        t = np.asarray(t, dtype=float)
        jb = self._wbar_jet(t, 1)
        return self._speed_from(jb[0], jb[1], np.asarray(r, dtype=float))

    # radius along C0 --------------------------------------------------
    def _solve_radius(self, t_max: float) -> None:
        sol = solve_ivp(lambda t, y: self.speed(t, y), (1.0, t_max), [1.0],
                        method="DOP853", rtol=1e-13, atol=1e-13, dense_output=True)
        if not sol.success:
            raise RuntimeError(f"cone radius integration failed: {sol.message}")
        self._sol = sol.sol
        self._t_max = t_max

    def _radius(self, t: np.ndarray) -> np.ndarray:
        tmax = float(np.max(t)) if np.size(t) else 1.0
        if tmax > self._t_max:
            self._solve_radius(2.0 * tmax)
        if np.any(np.asarray(t) < 1.0 - 1e-12):
            raise ValueError("the cone C0 starts at the singular time t = 1")
        return self._sol(np.asarray(t, dtype=float))[0]

    def jets(self, t, order: int) -> dict[str, np.ndarray]:
        t = np.asarray(t, dtype=float)
        K = order
        wbar = self._wbar_jet(t, K + 1)
        r = np.zeros((K + 1,) + t.shape)
        r[0] = self._radius(t.ravel()).reshape(t.shape)
        g = self.eos.gamma
        # Taylor recursion of L r = (gamma+1)/2 wbar + (gamma-3)/2 w(wbar, r)
        for k in range(K):
            w = self._w_jet(wbar[: k + 2], r[: k + 1])
            rhs_k = 0.5 * (g + 1.0) * wbar[k] + 0.5 * (g - 3.0) * w[k]
            r[k + 1] = rhs_k / (k + 1)
        w = self._w_jet(wbar, r)
        return {"w": w, "wbar": wbar[: K + 1], "r": r}

    def measured_bounds(self, t) -> dict[str, float]:
        """Sampled sup of the normalized decay quantities over ``t``."""
        t = np.asarray(t, dtype=float)
        d = self.spec.delta_exp
        st = self.state(t)
        Lc = self.Lderiv("c", 1, t)
        out = {"t|c-1|": float(np.max(t * np.abs(st.c - 1.0))),
               "t|v|": float(np.max(t * np.abs(st.v))),
               "t^(2-d)|Lc|": float(np.max(t ** (2.0 - d) * np.abs(Lc)))}
        for n in (2, 3, 4):
            out[f"M_{n}"] = float(np.max(t ** (3.0 - 2.0 * d) * np.abs(self.Lderiv("c", n, t))))
        return out

    def check_bounds(self, t) -> bool:
        """True when the sampled trace obeys the decay hypotheses."""
        eps = self.spec.epsilon
        b = self.measured_bounds(t)
        ok = b["t|c-1|"] <= eps and b["t|v|"] <= eps and b["t^(2-d)|Lc|"] <= eps
        if self.M_n is not None:
            for n, m in enumerate(self.M_n, start=2):
                if f"M_{n}" in b:
                    ok = ok and b[f"M_{n}"] <= m
        return bool(ok)


def perturbed_background(spec: PerturbationSpec, seed: int, eos: GammaLaw = GammaLaw(),
                         t_max: float = 2.0e3) -> BackgroundProvider:
    """Build a perturbed exterior trace; ``epsilon = 0`` gives the rest state.

    ``t_max`` is the initial extent of the cone-radius solve (it is extended
    on demand).
    """
    if spec.epsilon == 0.0:
        return ConstantBackground(eos)
    return PerturbedBackground(spec, seed, eos, t_max=t_max)


@dataclass
class ConeTrajectory:
    """Sampled radius of ``C0`` from :func:`integrate_C0`."""

    t: np.ndarray
    r: np.ndarray

    def __call__(self, t):
        return np.interp(t, self.t, self.r)


def integrate_C0(provider: BackgroundProvider | Callable, t_span: tuple[float, float],
                 step: float, r0: float = 1.0) -> ConeTrajectory:
    """Trace ``dr/dt = (v + c)(t, r)`` with fixed-step classical RK4.

    Parameters
    ----------
    provider : BackgroundProvider or callable
        Either a provider (its :meth:`~BackgroundProvider.speed` is used) or a
        function ``speed(t, r)``.
    t_span : (float, float)
        Start (the singular time) and end time.
    step : float
        Step size; the last step is shortened to land on ``t_span[1]``.
    r0 : float
        Radius at the start (one in the unit chart).
    """
    if not step > 0.0:
        raise ValueError("step must be positive")
    f = provider.speed if isinstance(provider, BackgroundProvider) else provider
    t0, t1 = map(float, t_span)
    if t1 < t0:
        raise ValueError("t_span must be increasing")
    n = int(np.ceil((t1 - t0) / step - 1e-9))
    ts = t0 + step * np.arange(n + 1, dtype=float)
    ts[-1] = t1
    rs = np.empty(n + 1)
    r = float(r0)
    rs[0] = r
    for i in range(n):
        t, h = ts[i], ts[i + 1] - ts[i]
        k1 = float(f(t, r))
        k2 = float(f(t + 0.5 * h, r + 0.5 * h * k1))
        k3 = float(f(t + 0.5 * h, r + 0.5 * h * k2))
        k4 = float(f(t + h, r + h * k3))
        r += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not np.isfinite(r):
            raise FloatingPointError(f"cone radius blew up at t={t!r}")
        rs[i + 1] = r
    return ConeTrajectory(ts, rs)
