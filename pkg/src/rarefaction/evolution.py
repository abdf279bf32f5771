"""Approximate Cauchy data and the characteristic march in ``(t, u)``.

The rarefaction region is foliated by the outgoing cones ``C_u``, with
``u in [0, u*]`` and ``u = 0`` the cone ``C0`` through the singular sphere.
In these coordinates (``L = d/dt`` along a cone, ``T = d/du`` at fixed ``t``,
``kappa = -T r``) the flow obeys

    L wbar = -c v / r,      L r = v + c,
    L w    = -c v / r - (2 c / kappa) T w,

the last line being the ingoing transport ``Lbar w = -kappa v / r`` with
``Lbar = 2T + (kappa/c) L``.  Only ``w`` is transported across the cones,
with ``du/dt = 2c/kappa > 0``, i.e. away from ``C0``.  The march therefore
uses upwind differences that look back toward ``u = 0`` and pins the
``u = 0`` column to the boundary trace.  Time stepping is classical RK4 with
a CFL-limited step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from bisect import bisect_right
from math import factorial
from typing import Callable, Optional, Union

import numpy as np

from .background import BackgroundProvider
from .boundary_data import BoundaryDataTable, _hermite


class FoldError(FloatingPointError):
    """The cones crossed (``kappa <= 0``): the march left the rarefaction regime."""


class CFLError(FloatingPointError):
    """A prescribed time step exceeded the stability bound."""

    def __init__(self, dt: float, bound: float, t: float) -> None:
        super().__init__(f"dt={dt:.3e} exceeds the CFL bound {bound:.3e} at t={t:.6g}")
        self.dt, self.bound, self.t = dt, bound, t


def default_u_star(gamma: float, c0: float = 1.0) -> float:
    """``0.1 (gamma+1)/(gamma-1) c0``: a tenth of the distance to vacuum."""
    return 0.1 * (gamma + 1.0) / (gamma - 1.0) * c0


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------
@dataclass
class TaylorData:
    """Fields on the slice ``t = t0`` of the acoustical chart.

    ``kappa`` is the analytic ``-dr/du`` of the data; the ``L*`` arrays are the
    time derivatives implied by the equations.
    """

    N: int
    t0: float
    u: np.ndarray
    w: np.ndarray
    wbar: np.ndarray
    r: np.ndarray
    kappa: np.ndarray
    Lw: np.ndarray
    Lwbar: np.ndarray
    Lr: np.ndarray
    gamma: float
    t_singular: float = 1.0

    @property
    def c(self) -> np.ndarray:
        return 0.5 * (self.gamma - 1.0) * (self.wbar + self.w)

    @property
    def v(self) -> np.ndarray:
        return self.wbar - self.w


def _poly(coeffs: list[float], u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``sum_n coeffs[n] u^n / n!`` and its ``u``-derivative."""
    val = np.zeros_like(u)
    der = np.zeros_like(u)
    for n, a in enumerate(coeffs):
        val += a * u ** n / factorial(n)
        if n >= 1:
            der += a * u ** (n - 1) / factorial(n - 1)
    return val, der


def build_taylor_data(table: BoundaryDataTable, delta: float, N: int, u_grid) -> TaylorData:
    """Order-``N`` Taylor polynomials in ``u`` at ``t0 = t_singular + delta``.

    The polynomials are

        w_N = sum_{n<=N} T^n w u^n/n!,
        wbar_N = (likewise),
        r_N = r - sum_{n<N} T^n kappa u^(n+1)/(n+1)!,

    with coefficients read from ``table`` at ``t0``.  The time derivatives
    follow from the equations, including ``L w_N = -c v / r - 2 c T w_N / kappa_N``.

    Raises
    ------
    FoldError
        If ``kappa_N = -d r_N/du`` is not positive on ``u_grid`` (delta is too
        small for the chosen u*).
    """
    if N < 1 or N > table.order:
        raise ValueError(f"need 1 <= N <= table order ({table.order})")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    u = np.asarray(u_grid, dtype=float)
    t0 = table.t_singular + delta
    at = lambda name: float(table.at(t0, name))  # noqa: E731
    w, dw = _poly([at("w")] + [at(f"T{n}w") for n in range(1, N + 1)], u)
    wb, _ = _poly([at("wbar")] + [at(f"T{n}wbar") for n in range(1, N + 1)], u)
    kap, _ = _poly([at(f"T{n}kappa") for n in range(N)], u)
    r = at("r") - np.array([sum(at(f"T{n}kappa") * uu ** (n + 1) / factorial(n + 1)
                                for n in range(N)) for uu in u])
    if np.any(kap <= 0.0):
        raise FoldError(f"Taylor data fold: min kappa_N = {kap.min():.3e} at delta={delta}")
    g = table.eos.gamma
    c = 0.5 * (g - 1.0) * (wb + w)
    v = wb - w
    cvr = c * v / r
    return TaylorData(N=N, t0=t0, u=u, w=w, wbar=wb, r=r, kappa=kap,
                      Lw=-cvr - 2.0 * c * dw / kap, Lwbar=-cvr, Lr=c + v,
                      gamma=g, t_singular=table.t_singular)


def constant_state_data(boundary, delta: float, u_grid) -> TaylorData:
    """Uniform state with a linear foliation ``r = r(t0) - u`` (``kappa = 1``).

    With a rest-state exterior this is an exact solution of the system,
    useful for checking that the march preserves it.
    """
    trace = _trace_function(boundary)
    t_s = _t_singular(boundary)
    g = _gamma(boundary)
    t0 = t_s + delta
    w0, wb0, r0 = (float(x) for x in trace(t0)[:3])
    u = np.asarray(u_grid, dtype=float)
    ones = np.ones_like(u)
    c = 0.5 * (g - 1.0) * (wb0 + w0)
    v = wb0 - w0
    r = r0 - u
    return TaylorData(N=0, t0=t0, u=u, w=w0 * ones, wbar=wb0 * ones, r=r, kappa=ones.copy(),
                      Lw=-c * v / r, Lwbar=-c * v / r, Lr=(c + v) * ones, gamma=g, t_singular=t_s)


# ---------------------------------------------------------------------------
# grid container
# ---------------------------------------------------------------------------
@dataclass
class AcousticalGrid:
    """Stored time levels of a march.

    Field arrays have shape ``(len(t), len(u))``.  ``kappa_aux`` is kappa
    evolved by its own transport law, kept for comparison with the geometric
    ``kappa`` (``-d r/du`` by second-order differences).  Grids from
    :func:`march_commuted` also carry ``towers``: for each of ``w``, ``wbar``,
    ``r`` and ``kappa`` an array of shape ``(len(t), K+1, len(u))`` holding
    ``T^k`` of the field, and the same under ``"L" + name`` for ``L T^k``.
    """

    t: np.ndarray
    u: np.ndarray
    w: np.ndarray
    wbar: np.ndarray
    r: np.ndarray
    kappa_aux: np.ndarray
    Lw: np.ndarray
    Lwbar: np.ndarray
    Lr: np.ndarray
    Lkappa_aux: np.ndarray
    gamma: float
    t_singular: float = 1.0
    info: dict = field(default_factory=dict)
    towers: Optional[dict] = None

    @property
    def du(self) -> float:
        return float(self.u[1] - self.u[0])

    @property
    def kappa(self) -> np.ndarray:
        return -np.gradient(self.r, self.u, axis=1, edge_order=2)

    @property
    def c(self) -> np.ndarray:
        return 0.5 * (self.gamma - 1.0) * (self.wbar + self.w)

    @property
    def v(self) -> np.ndarray:
        return self.wbar - self.w

    def field(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def interp(self, tq, name: str) -> np.ndarray:
        """Cubic Hermite interpolation in time of ``w``, ``wbar``, ``r`` or ``kappa_aux``."""
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        y = getattr(self, name)
        dy = getattr(self, "L" + name)
        cols = [_hermite(self.t, y[:, j], dy[:, j], tq) for j in range(len(self.u))]
        return np.stack(cols, axis=-1)

    def derived_interp(self, tq, name: str) -> np.ndarray:
        """Interpolate ``c``, ``v``, ``kappa`` or a primary field in time."""
        if name in ("w", "wbar", "r", "kappa_aux"):
            return self.interp(tq, name)
        w, wb = self.interp(tq, "w"), self.interp(tq, "wbar")
        if name == "c":
            return 0.5 * (self.gamma - 1.0) * (wb + w)
        if name == "v":
            return wb - w
        if name == "kappa":
            return -np.gradient(self.interp(tq, "r"), self.u, axis=-1, edge_order=2)
        raise KeyError(name)


# ---------------------------------------------------------------------------
# the march
# ---------------------------------------------------------------------------
class _ScalarHermite:
    """Fast scalar cubic Hermite evaluation of several table columns."""

    def __init__(self, table: BoundaryDataTable, names: tuple[str, ...]) -> None:
        self.t = table.t.tolist()
        self.lo, self.hi = self.t[0], self.t[-1]
        self.cols = [(table[nm].tolist(), table.dcols[_col(nm)].tolist()) for nm in names]

    def __call__(self, x: float) -> tuple[float, ...]:
        t = self.t
        i = min(max(bisect_right(t, x) - 1, 0), len(t) - 2)
        h = t[i + 1] - t[i]
        s = (x - t[i]) / h
        s1 = 1.0 - s
        h00 = (1.0 + 2.0 * s) * s1 * s1
        h10 = s * s1 * s1 * h
        h01 = s * s * (3.0 - 2.0 * s)
        h11 = s * s * (s - 1.0) * h
        return tuple(h00 * y[i] + h10 * d[i] + h01 * y[i + 1] + h11 * d[i + 1]
                     for y, d in self.cols)


def _col(name: str) -> str:
    return {"kappa": "T0kappa"}.get(name, name)


def _trace_function(boundary) -> Callable:
    """``t -> (w, wbar, r, Lw, Lwbar, Lr)`` on ``C0``.

    Inside the range of a table the trace is interpolated from its columns.
    Outside that range the table's provider is evaluated directly.
    """
    if isinstance(boundary, BoundaryDataTable):
        tab = boundary
        fast = _ScalarHermite(tab, ("w", "wbar", "r", "Lw", "Lwbar", "Lr"))
        slow = _trace_function(tab.provider) if tab.provider is not None else None

        def f(t):
            if fast.lo <= t <= fast.hi or slow is None:
                if not (fast.lo <= t <= fast.hi):
                    raise ValueError(f"t={t} outside the boundary table range")
                return fast(t)
            return slow(t)
        return f
    if isinstance(boundary, BackgroundProvider):
        prov = boundary

        def f(t):
            j = prov.jets(np.asarray(t, dtype=float), 1)
            return (float(j["w"][0]), float(j["wbar"][0]), float(j["r"][0]),
                    float(j["w"][1]), float(j["wbar"][1]), float(j["r"][1]))
        return f
    raise TypeError("boundary must be a BoundaryDataTable or BackgroundProvider")


def _t_singular(boundary) -> float:
    return float(boundary.t_singular)


def _gamma(boundary) -> float:
    return float(boundary.eos.gamma)


def upwind_derivative(f: np.ndarray, du: float, slope0: Optional[float] = None) -> np.ndarray:
    """``d f/du`` by backward differences, second order from node 2 on.

    At node 1 the stencil is first order, ``(f1 - f0)/du``, unless the
    boundary slope ``slope0 = df/du(0)`` is known.  In that case the
    second-order one-sided formula ``2 (f1 - f0)/du - slope0`` (the
    derivative at ``u1`` of the quadratic matching ``f0, slope0, f1``) is used.
    Node 0 is left at zero (it is a boundary node).
    """
    d = np.zeros_like(f)
    if slope0 is None:
        d[..., 1] = (f[..., 1] - f[..., 0]) / du
    else:
        d[..., 1] = 2.0 * (f[..., 1] - f[..., 0]) / du - slope0
    # written in differences so that constants give exactly zero
    df = np.diff(f, axis=-1)
    d[..., 2:] = (3.0 * df[..., 1:] - df[..., :-1]) / (2.0 * du)
    return d


def centered_derivative(f: np.ndarray, du: float) -> np.ndarray:
    """Second-order ``d/du`` along the last axis (one-sided at both ends)."""
    d = np.empty_like(f)
    df = np.diff(f, axis=-1)
    d[..., 1:-1] = (df[..., 1:] + df[..., :-1]) / (2.0 * du)
    d[..., 0] = (3.0 * df[..., 0] - df[..., 1]) / (2.0 * du)
    d[..., -1] = (3.0 * df[..., -1] - df[..., -2]) / (2.0 * du)
    return d


class _System:
    def __init__(self, gamma: float, u: np.ndarray, trace: Callable,
                 slope: Optional[Callable] = None) -> None:
        self.slope = slope
        self.g = gamma
        self.u = u
        self.du = float(u[1] - u[0])
        self.trace = trace
        self.hg = 0.5 * (gamma - 1.0)

    def pin(self, t: float, y: np.ndarray) -> tuple:
        tr = self.trace(t)
        y[0, 0], y[1, 0], y[2, 0] = tr[0], tr[1], tr[2]
        return tr

    def rhs(self, t: float, y: np.ndarray, tr: tuple) -> tuple[np.ndarray, float]:
        w, wb, r, ka = y
        c = self.hg * (wb + w)
        v = wb - w
        D = centered_derivative(y[:3], self.du)
        kap = -D[2]
        kmin = kap[1:].min()
        if not kmin > 0.0:
            raise FoldError(f"kappa <= 0 at t={t:.6g} (min {kmin:.3e}); cones crossed")
        cvr = c * v / r
        out = np.empty_like(y)
        s0 = None if self.slope is None else self.slope(t)
        out[0] = -cvr - 2.0 * c / kap * upwind_derivative(w, self.du, s0)
        out[1] = -cvr
        out[2] = v + c
        out[3] = -0.5 * (self.g + 1.0) * D[1] + 0.5 * (3.0 - self.g) * D[0]
        out[0, 0], out[1, 0], out[2, 0] = tr[3], tr[4], tr[5]
        return out, self.du * float(kmin) / (2.0 * float(c.max()))


def _integrate(sysm, y: np.ndarray, t0: float, t_end: float, dt: Optional[float], cfl: float,
               dt_max: Optional[float], store_every: int, max_steps: int):
    """Classical RK4 with boundary pinning at every stage.

    ``sysm`` provides ``pin(t, y) -> trace`` (overwrites boundary entries of
    ``y`` in place) and ``rhs(t, y, trace) -> (dy/dt, step bound)``.
    """
    t = float(t0)
    tr = sysm.pin(t, y)
    k1, bound = sysm.rhs(t, y, tr)
    ts, Y, DY = [t], [y.copy()], [k1.copy()]
    hist_t, hist_dt, hist_bound = [], [], []
    step = 0
    while t < t_end - 1e-13 * max(1.0, abs(t_end)):
        if dt is not None:
            h = float(dt)
            if h > cfl * bound * (1.0 + 1e-12):
                raise CFLError(h, cfl * bound, t)
        else:
            h = cfl * bound
            if dt_max is not None:
                h = min(h, dt_max)
        h = min(h, t_end - t)
        y2 = y + 0.5 * h * k1
        tr2 = sysm.pin(t + 0.5 * h, y2)
        k2, _ = sysm.rhs(t + 0.5 * h, y2, tr2)
        y3 = y + 0.5 * h * k2
        sysm.pin(t + 0.5 * h, y3)
        k3, _ = sysm.rhs(t + 0.5 * h, y3, tr2)
        y4 = y + h * k3
        tr4 = sysm.pin(t + h, y4)
        k4, _ = sysm.rhs(t + h, y4, tr4)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t + h
        tr = sysm.pin(t, y)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite state at t={t:.6g}")
        k1, bound = sysm.rhs(t, y, tr)
        step += 1
        hist_t.append(t)
        hist_dt.append(h)
        hist_bound.append(cfl * bound)
        if step % store_every == 0 or t >= t_end - 1e-13 * max(1.0, abs(t_end)):
            ts.append(t)
            Y.append(y.copy())
            DY.append(k1.copy())
        if step >= max_steps:
            raise RuntimeError(f"step limit {max_steps} reached at t={t:.6g}")
    hist = {"t": np.array(hist_t), "dt": np.array(hist_dt), "bound": np.array(hist_bound)}
    return np.array(ts), np.array(Y), np.array(DY), step, hist


def march(data: TaylorData, boundary: Union[BoundaryDataTable, BackgroundProvider],
          t_end: float, dt: Optional[float] = None, cfl: float = 0.4,
          dt_max: Optional[float] = None, store_every: int = 1,
          max_steps: int = 5_000_000, node1: str = "auto") -> AcousticalGrid:
    """Advance ``data`` to ``t_end`` by RK4 in ``t`` with upwind ``T w``.

    Parameters
    ----------
    data : TaylorData
        Initial slice.
    boundary : BoundaryDataTable or BackgroundProvider
        Supplies the ``u = 0`` column (pinned at every RK stage).
    t_end : float
        Final time.
    dt : float, optional
        Fixed step.  It must satisfy the CFL bound at every step, otherwise a
        :class:`CFLError` is raised.  By default the step is adaptive:
        ``cfl * du * kappa_min / (2 c_max)``, capped by ``dt_max``.
    store_every : int
        Keep every ``store_every``-th level (the first and last are always kept).
    node1 : {"auto", "slope", "first"}
        Closure of ``T w`` at the node next to ``C0``.  ``"slope"`` uses the
        tabulated transversal slope ``T w(t, 0)`` for a second-order one-sided
        formula; ``"first"`` uses the plain first-order backward difference.
        ``"auto"`` picks ``"slope"`` when ``boundary`` is a table that covers
        ``t_end``.

    Returns
    -------
    AcousticalGrid
        Stored levels plus per-level time derivatives, with a CFL history in
        ``info``.
    """
    trace = _trace_function(boundary)
    slope = None
    if node1 not in ("auto", "slope", "first"):
        raise ValueError(f"unknown node1 closure {node1!r}")
    if node1 != "first" and isinstance(boundary, BoundaryDataTable) and boundary.t[-1] >= t_end:
        _slope = _ScalarHermite(boundary, ("T1w",))
        slope = lambda tt: _slope(tt)[0]  # noqa: E731
    elif node1 == "slope":
        raise ValueError("node1='slope' needs a BoundaryDataTable covering t_end")
    sysm = _System(data.gamma, data.u, trace, slope)
    y = np.stack([data.w, data.wbar, data.r, data.kappa]).astype(float)
    ts, Y, DY, step, hist = _integrate(sysm, y, float(data.t0), t_end, dt, cfl, dt_max,
                                       store_every, max_steps)
    info = {"steps": step, "cfl": cfl, "dt_fixed": dt, "cfl_history": hist,
            "N": data.N, "t0": data.t0,
            "node1": "slope" if slope is not None else "first"}
    return AcousticalGrid(t=np.array(ts), u=data.u.copy(), w=Y[:, 0], wbar=Y[:, 1], r=Y[:, 2],
                          kappa_aux=Y[:, 3], Lw=DY[:, 0], Lwbar=DY[:, 1], Lr=DY[:, 2],
                          Lkappa_aux=DY[:, 3], gamma=data.gamma, t_singular=data.t_singular,
                          info=info)


# ---------------------------------------------------------------------------
# commuted march: T^k of every field evolved directly
# ---------------------------------------------------------------------------
def _binomials(K: int) -> list[list[int]]:
    from math import comb
    return [[comb(k, i) for i in range(k + 1)] for k in range(K + 1)]


def _leibniz_tensor(K: int) -> np.ndarray:
    """``M[k, i, j] = binom(k, i)`` where ``i + j = k``, else 0."""
    from math import comb
    M = np.zeros((K + 1, K + 1, K + 1))
    for k in range(K + 1):
        for i in range(k + 1):
            M[k, i, k - i] = comb(k, i)
    return M


def _leibniz(a: np.ndarray, b: np.ndarray, C: list[list[int]],
             M: Optional[np.ndarray] = None) -> np.ndarray:
    """``T^k (a b)`` for ``k = 0..K`` from the towers ``a[k] = T^k a``, ``b[k] = T^k b``."""
    if M is None:
        M = _leibniz_tensor(len(a) - 1)
    return np.einsum("kij,i...,j...->k...", M, a, b)


def _reciprocal(a: np.ndarray, C: list[list[int]]) -> np.ndarray:
    """Tower of ``1/a`` from ``a (1/a) = 1``."""
    out = np.empty_like(a)
    out[0] = 1.0 / a[0]
    for k in range(1, len(a)):
        acc = C[k][1] * a[1] * out[k - 1]
        for i in range(2, k + 1):
            acc = acc + C[k][i] * a[i] * out[k - i]
        out[k] = -acc * out[0]
    return out


class _TowerSystem:
    """``T^k``-commuted equations, ``k = 0..K``.

    With towers ``W, B, R, Q`` of ``w, wbar, r, kappa`` the laws are

        L B_k = -T^k (c v / r),          L R_k = T^k (v + c),
        L Q_k = -(g+1)/2 B_{k+1} + (3-g)/2 W_{k+1},
        L W_k = -T^k (c v / r) - 2 (c/kappa) T W_k
                - 2 sum_{i=1}^{k} binom(k, i) T^i(c/kappa) W_{k+1-i},

    since ``L`` and ``T`` commute.  Every ``W_k`` keeps its own ingoing
    transport term, discretized by upwind differences, so errors leave the
    domain along the characteristics instead of being integrated along ``L``.
    The top levels ``B_{K+1}`` and ``W_{K+1}`` in the ``kappa`` law are
    centered and upwind derivatives of ``B_K`` and ``W_K``.  The ``W`` tower
    is pinned to the boundary table at ``u = 0``, as are ``B_0`` and ``R_0``.
    """

    def __init__(self, gamma: float, u: np.ndarray, K: int, table: BoundaryDataTable) -> None:
        self.g = gamma
        self.hg = 0.5 * (gamma - 1.0)
        self.K = K
        self.du = float(u[1] - u[0])
        self.C = _binomials(K)
        self.M = _leibniz_tensor(K)
        # commutator part of T^k (c/kappa T w): binom(k, i) (c/kappa)_i W_{k+1-i}, i >= 1
        M2 = np.zeros((K + 1, K + 1, K + 1))
        for k in range(K + 1):
            for i in range(1, k + 1):
                M2[k, i, k + 1 - i] = self.C[k][i]
        self.M2 = M2
        names = ([f"T{k}w" for k in range(K + 1)] + [f"LT{k}w" for k in range(K + 1)]
                 + ["wbar", "r", "Lwbar", "Lr"])
        self.slope = table.order >= K + 1
        if self.slope:
            names.append(f"T{K + 1}w")
        self.n_trace = len(names)
        alias = {"T0w": "w", "LT0w": "Lw"}
        self.trace = _ScalarHermite(table, tuple(alias.get(n, n) for n in names))
        self.t_max = table.t[-1]

    def pin(self, t: float, y: np.ndarray) -> tuple:
        if t > self.t_max * (1.0 + 1e-14):
            raise ValueError(f"t={t} outside the boundary table range")
        tr = self.trace(t)
        K = self.K
        y[0, :, 0] = tr[:K + 1]
        y[1, 0, 0], y[2, 0, 0] = tr[2 * K + 2], tr[2 * K + 3]
        return tr

    def rhs(self, t: float, y: np.ndarray, tr: tuple) -> tuple[np.ndarray, float]:
        K, C, g = self.K, self.C, self.g
        W, B, R, Q = y
        kmin = Q[0].min()
        if not kmin > 0.0:
            raise FoldError(f"kappa <= 0 at t={t:.6g} (min {kmin:.3e}); cones crossed")
        c = self.hg * (B + W)
        v = B - W
        M = self.M
        inv = _reciprocal(np.stack([R, Q], axis=1), C)
        cv_r = _leibniz(_leibniz(c, v, C, M), inv[:, 0], C, M)
        c_k = _leibniz(c, inv[:, 1], C, M)
        # slopes T^(k+1) w at u = 0 for the node-1 closure of each level
        slopes = np.array(tr[1:K + 1] + ((tr[-1],) if self.slope else (0.0,)))[:, None]
        dW = upwind_derivative(W, self.du, slopes[:, 0])
        if not self.slope:
            dW[K, 1] = (W[K, 1] - W[K, 0]) / self.du
        cTw_k = c_k[0] * dW + np.einsum("kij,in,jn->kn", self.M2, c_k, W)
        Wup = np.concatenate([W[1:], dW[K][None]])
        Bup = np.concatenate([B[1:], centered_derivative(B[K], self.du)[None]])
        out = np.empty_like(y)
        out[0] = -cv_r - 2.0 * cTw_k
        out[1] = -cv_r
        out[2] = c + v
        out[3] = -0.5 * (g + 1.0) * Bup + 0.5 * (3.0 - g) * Wup
        out[0, :, 0] = tr[K + 1:2 * K + 2]
        out[1, 0, 0], out[2, 0, 0] = tr[2 * K + 4], tr[2 * K + 5]
        return out, self.du * float(kmin) / (2.0 * float(c[0].max()))


def _tower_poly(coeffs: list[float], u: np.ndarray, K: int) -> np.ndarray:
    """``T^k`` (``k = 0..K``) of ``sum_n coeffs[n] u^n / n!``."""
    M = len(coeffs) - 1
    out = np.zeros((K + 1, len(u)))
    for k in range(K + 1):
        for n in range(k, M + 1):
            out[k] += coeffs[n] * u ** (n - k) / factorial(n - k)
    return out


def march_commuted(table: BoundaryDataTable, delta: float, K: int, u_grid, t_end: float,
                   cfl: float = 0.4, dt: Optional[float] = None, dt_max: Optional[float] = None,
                   store_every: int = 1, max_steps: int = 5_000_000) -> AcousticalGrid:
    """March the ``T^k``-commuted system, ``k = 0..K``, from ``t_singular + delta``.

    Initial towers are the ``u``-derivatives of the Taylor polynomials built
    from every order available in ``table`` (which must cover ``t_end`` and
    have ``order >= K``; ``order >= K + 1`` enables the second-order closure
    at the node next to ``C0``).  Higher transversal derivatives are then
    available without differencing the solution in ``u``, which is what the
    ``T^3`` energies need.

    Returns
    -------
    AcousticalGrid
        Base fields from level ``k = 0`` plus ``towers`` (see
        :class:`AcousticalGrid`).
    """
    if K < 1 or table.order < K:
        raise ValueError(f"need 1 <= K <= table order ({table.order})")
    if table.t[-1] < t_end:
        raise ValueError("the boundary table must cover t_end")
    u = np.asarray(u_grid, dtype=float)
    t0 = table.t_singular + delta
    M = table.order
    at = lambda name: float(table.at(t0, name))  # noqa: E731
    W = _tower_poly([at("w")] + [at(f"T{n}w") for n in range(1, M + 1)], u, K)
    B = _tower_poly([at("wbar")] + [at(f"T{n}wbar") for n in range(1, M + 1)], u, K)
    Q = _tower_poly([at(f"T{n}kappa") for n in range(M)], u, K)
    R = np.empty_like(W)
    R[0] = at("r") - sum(at(f"T{n}kappa") * u ** (n + 1) / factorial(n + 1) for n in range(M))
    R[1:] = -Q[:K]
    if np.any(Q[0] <= 0.0):
        raise FoldError(f"Taylor data fold: min kappa = {Q[0].min():.3e} at delta={delta}")
    sysm = _TowerSystem(table.eos.gamma, u, K, table)
    y = np.stack([W, B, R, Q])
    ts, Y, DY, step, hist = _integrate(sysm, y, t0, t_end, dt, cfl, dt_max, store_every,
                                       max_steps)
    towers = {}
    for i, name in enumerate(("w", "wbar", "r", "kappa")):
        towers[name] = Y[:, i]
        towers["L" + name] = DY[:, i]
    info = {"steps": step, "cfl": cfl, "dt_fixed": dt, "cfl_history": hist, "N": M, "K": K,
            "t0": t0, "node1": "slope" if sysm.slope else "first", "commuted": True}
    return AcousticalGrid(t=ts, u=u.copy(), w=Y[:, 0, 0], wbar=Y[:, 1, 0], r=Y[:, 2, 0],
                          kappa_aux=Y[:, 3, 0], Lw=DY[:, 0, 0], Lwbar=DY[:, 1, 0],
                          Lr=DY[:, 2, 0], Lkappa_aux=DY[:, 3, 0], gamma=table.eos.gamma,
                          t_singular=table.t_singular, info=info, towers=towers)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------
def time_derivative(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Second-order three-point ``d/dt`` on interior levels of a non-uniform grid.

    Returns an array for levels ``1 .. len(t)-2``.
    """
    h1 = (t[1:-1] - t[:-2])[:, None]
    h2 = (t[2:] - t[1:-1])[:, None]
    return (-h2 / (h1 * (h1 + h2)) * f[:-2] + (h2 - h1) / (h1 * h2) * f[1:-1]
            + h1 / (h2 * (h1 + h2)) * f[2:])


@dataclass(frozen=True)
class ResidualReport:
    """Pointwise residual fields (interior time levels) and their norms."""

    fields: dict
    max: dict
    l2: dict
    kappa_discrepancy: float

    def as_dict(self) -> dict:
        return {"max": dict(self.max), "l2": dict(self.l2),
                "kappa_discrepancy": self.kappa_discrepancy}


def residuals(grid: AcousticalGrid) -> ResidualReport:
    """Discrete residuals of the three transport laws on the stored levels.

    ``L`` is a three-point time difference and ``T`` a second-order
    ``u``-difference (centered, one-sided at the ends), independent of the
    stencils used by the march.  The reported L2 norm is the RMS over all
    interior levels and nodes.
    """
    if len(grid.t) < 3:
        raise ValueError("need at least three stored levels")
    t = grid.t
    sl = slice(1, -1)
    c, v, r = grid.c[sl], grid.v[sl], grid.r[sl]
    kap = grid.kappa[sl]
    Lw = time_derivative(t, grid.w)
    Lwb = time_derivative(t, grid.wbar)
    Lr = time_derivative(t, grid.r)
    Tw = np.gradient(grid.w[sl], grid.u, axis=1, edge_order=2)
    res = {"wbar": Lwb + c * v / r,
           "r": Lr - (v + c),
           "w": 2.0 * Tw + kap / c * Lw + kap * v / r}
    mx = {k: float(np.max(np.abs(x))) for k, x in res.items()}
    l2 = {k: float(np.sqrt(np.mean(x * x))) for k, x in res.items()}
    disc = float(np.max(np.abs(grid.kappa - grid.kappa_aux)))
    return ResidualReport(res, mx, l2, disc)


def first_node_discrepancy(grid: AcousticalGrid, table: BoundaryDataTable) -> float:
    """Max over stored levels of ``|wbar(t, u1) - sum_n T^n wbar(t, 0) u1^n / n!|``.

    Compares the evolved ``wbar`` next to ``C0`` with its Taylor prediction
    from the pinned column.  Levels beyond the table range are skipped.
    """
    m = grid.t <= table.t[-1]
    u1 = grid.u[1]
    pred = table.at(grid.t[m], "wbar").copy()
    for n in range(1, table.order + 1):
        pred += table.at(grid.t[m], f"T{n}wbar") * u1 ** n / factorial(n)
    return float(np.max(np.abs(grid.wbar[m, 1] - pred)))
