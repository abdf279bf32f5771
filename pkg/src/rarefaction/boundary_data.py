"""Transversal derivatives of the rarefaction solution along ``C0``.

On the cone ``C0`` (``u = 0``) the exterior trace fixes ``w, wbar, r`` and all
of their ``L``-derivatives.  The transversal derivatives ``T^n w``,
``T^n wbar`` and ``T^(n-1) kappa`` (``T = d/du``, ``kappa = -T r``) then obey a
hierarchy of linear ODEs in ``t``, order by order:

* ``T^n w`` is algebraic.  It comes from ``T^(n-1)`` of
  ``T w = -(kappa/2) (v/r + L w / c)``, which divides only by ``c`` and ``r``.
* ``T^n wbar`` comes from ``T^n`` of ``L wbar = -c v / r``.
* ``T^(n-1) kappa`` comes from ``T^n`` of ``L r = v + c``.

The singular sphere is at ``t = t_singular`` with data

    T w = 0, T wbar = -2/(gamma+1), kappa = 0,
    T^n wbar = T^(n-1) kappa = 0   (n >= 2).

Implementation
--------------
All ``T``/``L`` derivatives at a sample time are held as a bivariate
truncated Taylor expansion ``f[j, k] = L^j T^k f / (j! k!)``, and the three
equations above are applied as coefficient recurrences.  The Leibniz
expansions of the products (``c v / r`` and friends) are just truncated
Cauchy products of coefficient arrays, so no lower-order term is
hand-enumerated.  For fixed lower orders the order-``n`` system is linear in
``y = (T^n wbar, T^(n-1) kappa)``.  Its matrix and forcing are extracted at
every sample time by three evaluations of the recurrences, and the system
is advanced with classical RK4 on a uniform grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Optional, Sequence

import numpy as np

from .background import BackgroundProvider
from .core_state import GammaLaw

#: Offset from the singular time at which the RK4 march starts.
DELTA0 = 1e-8
#: Number of sample times processed together by the coefficient recurrences.
_CHUNK = 16384


class MissingOrderError(ValueError):
    """Raised when a higher order is requested before the lower ones exist."""


# ---------------------------------------------------------------------------
# bivariate coefficient recurrences
# ---------------------------------------------------------------------------
class _Workspace:
    """Lazily evaluated coefficients ``f[j, k]`` on a batch of sample times.

    Parameters
    ----------
    gamma : float
    base : dict
        ``L``-jets of ``w, wbar, r`` on ``C0``, arrays of shape ``(J + 1, m)``.
    rows : dict
        ``k -> (wbar[0, k], r[0, k])`` for ``k >= 1``: the transversal data
        carried by the ODE states.
    """

    #: The only quantities ever inverted.  kappa is never a divisor.
    DIVISORS = ("c", "r")

    def __init__(self, gamma: float, base: dict[str, np.ndarray],
                 rows: dict[int, tuple[np.ndarray, np.ndarray]]) -> None:
        self.g = gamma
        self.base = base
        self.rows = dict(rows)
        self.J = base["w"].shape[0] - 1
        self.memo: dict[tuple[str, int, int], np.ndarray] = {}
        self._zero = np.zeros_like(base["w"][0])

    def set_row(self, k: int, wbar_k: np.ndarray, r_k: np.ndarray) -> None:
        self.rows[k] = (wbar_k, r_k)
        # kappa at u-order m is built from r at order m + 1, so every entry of
        # order >= k - 1 may depend on row k
        self.memo = {key: val for key, val in self.memo.items() if key[2] < k - 1}

    def __call__(self, name: str, j: int, k: int) -> np.ndarray:
        key = (name, j, k)
        val = self.memo.get(key)
        if val is None:
            val = getattr(self, "_" + name)(j, k)
            self.memo[key] = val
        return val

    # primary fields ------------------------------------------------------
    def _base_or_row(self, name: str, j: int, k: int) -> Optional[np.ndarray]:
        if k == 0:
            if j > self.J:
                raise IndexError(f"background jet too short for L^{j}")
            return self.base[name][j]
        return None

    def _w(self, j, k):
        b = self._base_or_row("w", j, k)
        if b is not None:
            return b
        # T w = -(1/2) kappa P  with  P = v/r + (L w)/c
        return -0.5 * self("kP", j, k - 1) / k

    def _wbar(self, j, k):
        b = self._base_or_row("wbar", j, k)
        if b is not None:
            return b
        if j == 0:
            return self.rows[k][0]
        # L wbar = -c v / r
        return -self("cvr", j - 1, k) / j

    def _r(self, j, k):
        b = self._base_or_row("r", j, k)
        if b is not None:
            return b
        if j == 0:
            return self.rows[k][1]
        # L r = v + c
        return (self("v", j - 1, k) + self("c", j - 1, k)) / j

    # derived fields --------------------------------------------------------
    def _c(self, j, k):
        return 0.5 * (self.g - 1.0) * (self("wbar", j, k) + self("w", j, k))

    def _v(self, j, k):
        return self("wbar", j, k) - self("w", j, k)

    def _kappa(self, j, k):
        return -(k + 1) * self("r", j, k + 1)

    def _wt(self, j, k):
        return (j + 1) * self("w", j + 1, k)

    def _ic(self, j, k):
        return self._recip("c", "ic", j, k)

    def _ir(self, j, k):
        return self._recip("r", "ir", j, k)

    def _vr(self, j, k):
        return self._prod("v", "ir", j, k)

    def _cvr(self, j, k):
        return self._prod("c", "vr", j, k)

    def _P(self, j, k):
        return self("vr", j, k) + self._prod("wt", "ic", j, k)

    def _kP(self, j, k):
        return self._prod("kappa", "P", j, k)

    # Cauchy products -------------------------------------------------------
    def _prod(self, a: str, b: str, j: int, k: int) -> np.ndarray:
        acc = self._zero.copy()
        for jj in range(j + 1):
            for kk in range(k + 1):
                acc += self(a, jj, kk) * self(b, j - jj, k - kk)
        return acc

    def _recip(self, a: str, inv: str, j: int, k: int) -> np.ndarray:
        assert a in self.DIVISORS
        a00 = self(a, 0, 0)
        if j == 0 and k == 0:
            return 1.0 / a00
        acc = self._zero.copy()
        for jj in range(j + 1):
            for kk in range(k + 1):
                if jj == 0 and kk == 0:
                    continue
                acc += self(a, jj, kk) * self(inv, j - jj, k - kk)
        return -acc / a00


def _linear_system(ws: _Workspace, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrix ``A`` (2, 2, m) and forcing ``f`` (2, m) of the order-``n`` ODE.

    The state is ``y = (T^n wbar, T^(n-1) kappa)``; ``y' = A y + f``.
    """
    fac = factorial(n)
    z = ws._zero

    def rhs(y0, y1):
        ws.set_row(n, z + y0 / fac, z - y1 / fac)
        return np.stack([fac * ws("wbar", 1, n), -fac * ws("r", 1, n)])

    f = rhs(0.0, 0.0)
    A = np.stack([rhs(1.0, 0.0) - f, rhs(0.0, 1.0) - f], axis=1)
    return A, f


def _singular_state(n: int, gamma: float) -> tuple[float, float]:
    if n == 1:
        return -2.0 / (gamma + 1.0), 0.0
    return 0.0, 0.0


def _rk4_linear(A0, f0, Am, fm, A1, f1, h):
    """Per-step affine map ``y -> M y + g`` of classical RK4 for ``y' = A y + f``."""
    def mm(X, Y):
        return np.einsum("ijm,jkm->ikm", X, Y)

    def mv(X, y):
        return np.einsum("ijm,jm->im", X, y)

    eye = np.eye(2)[:, :, None]
    K1, c1 = A0, f0
    K2, c2 = Am + 0.5 * h * mm(Am, K1), 0.5 * h * mv(Am, c1) + fm
    K3, c3 = Am + 0.5 * h * mm(Am, K2), 0.5 * h * mv(Am, c2) + fm
    K4, c4 = A1 + h * mm(A1, K3), h * mv(A1, c3) + f1
    M = eye + h / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
    g = h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
    return M, g


def _hermite(t: np.ndarray, y: np.ndarray, dy: np.ndarray, tq: np.ndarray) -> np.ndarray:
    """Piecewise cubic Hermite interpolation on a sorted node set."""
    tq = np.asarray(tq, dtype=float)
    i = np.clip(np.searchsorted(t, tq, side="right") - 1, 0, len(t) - 2)
    h = t[i + 1] - t[i]
    s = (tq - t[i]) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1]


# ---------------------------------------------------------------------------
# the table
# ---------------------------------------------------------------------------
@dataclass
class BoundaryDataTable:
    """Sampled ``C0`` data up to transversal order ``order``.

    Attributes
    ----------
    order : int
    t : ndarray
        Node times.  ``t[0]`` is the singular time, ``t[1] = t[0] + delta0``,
        and the remaining nodes are uniformly spaced by ``step``.
    cols : dict
        Column name to values at ``t``.  Names: ``w, wbar, r, c, v, Lw, Lwbar,
        Lr`` and, per order ``n``, ``T{n}w, T{n}wbar, T{n-1}kappa`` with their
        ``L``-derivatives ``LT{n}w, LT{n}wbar, LT{n-1}kappa``.  ``kappa`` aliases
        ``T0kappa``.
    dcols : dict
        ``L``-derivative of each column at ``t`` (used for interpolation).
    """

    order: int
    eos: GammaLaw
    t_singular: float
    step: float
    delta0: float
    t: np.ndarray
    cols: dict[str, np.ndarray] = field(default_factory=dict)
    dcols: dict[str, np.ndarray] = field(default_factory=dict)
    provider: Optional[BackgroundProvider] = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.cols[_alias(name)]

    def names(self) -> list[str]:
        return list(self.cols)

    def at(self, t, name: str) -> np.ndarray:
        """Cubic Hermite interpolant of column ``name`` at time(s) ``t``."""
        name = _alias(name)
        tq = np.asarray(t, dtype=float)
        if np.any(tq < self.t[0] - 1e-14) or np.any(tq > self.t[-1] * (1 + 1e-14)):
            raise ValueError(f"t outside the tabulated range [{self.t[0]}, {self.t[-1]}]")
        return _hermite(self.t, self.cols[name], self.dcols[name], tq)

    def consistency_defect(self) -> float:
        """Max over orders of ``|LT^(n-1)kappa + (g+1)/2 T^n wbar - (3-g)/2 T^n w|``."""
        g = self.eos.gamma
        worst = 0.0
        for n in range(1, self.order + 1):
            d = (self.cols[f"LT{n - 1}kappa"] + 0.5 * (g + 1.0) * self.cols[f"T{n}wbar"]
                 - 0.5 * (3.0 - g) * self.cols[f"T{n}w"])
            worst = max(worst, float(np.max(np.abs(d))))
        return worst


def _alias(name: str) -> str:
    return {"kappa": "T0kappa", "Lkappa": "LT0kappa"}.get(name, name)


def _row_arrays(table: BoundaryDataTable, upto: int, nodes: np.ndarray, mids: np.ndarray,
                ) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Normalized row coefficients on ``nodes`` followed by ``mids``."""
    rows = {}
    for k in range(1, upto + 1):
        fac = factorial(k)
        vals = []
        for name, sign in ((f"T{k}wbar", 1.0), (f"T{k - 1}kappa", -1.0)):
            at_nodes = table.cols[name][nodes]
            at_mids = table.at(mids, name) if len(mids) else np.empty(0)
            vals.append(sign * np.concatenate([at_nodes, at_mids]) / fac)
        rows[k] = (vals[0], vals[1])
    return rows


def _jets_at(provider: BackgroundProvider, t: np.ndarray, J: int) -> dict[str, np.ndarray]:
    return provider.jets(t, J)


def _order_columns(ws: _Workspace, n: int) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    fac = factorial(n)
    out = {
        f"T{n}w": (fac * ws("w", 0, n), fac * ws("w", 1, n)),
        f"LT{n}w": (fac * ws("w", 1, n), 2 * fac * ws("w", 2, n)),
        f"T{n}wbar": (fac * ws("wbar", 0, n), fac * ws("wbar", 1, n)),
        f"LT{n}wbar": (fac * ws("wbar", 1, n), 2 * fac * ws("wbar", 2, n)),
        f"T{n - 1}kappa": (-fac * ws("r", 0, n), -fac * ws("r", 1, n)),
        f"LT{n - 1}kappa": (-fac * ws("r", 1, n), -2 * fac * ws("r", 2, n)),
    }
    return out


def _node_times(t_singular: float, t_end: float, step: float, delta0: float,
                step_max: Optional[float] = None, grading: float = 0.01) -> np.ndarray:
    """Singular time, the seeded start, then RK4 nodes reaching ``t_end``.

    Without ``step_max`` the nodes are uniform with spacing ``step``.  With
    it, the spacing near ``t`` is ``clip(grading * (t - t_singular), step,
    step_max)``, so the grid is fine near the singular time and coarse later.
    """
    t_start = t_singular + delta0
    if step_max is None or step_max <= step:
        K = max(1, int(np.ceil((t_end - t_start) / step - 1e-9)))
        return np.concatenate([[t_singular], t_start + step * np.arange(K + 1)])
    out = [t_singular, t_start]
    t = t_start
    while t < t_end - 1e-12:
        h = min(step_max, max(step, grading * (t - t_singular)))
        t = t + h
        out.append(t)
    return np.array(out)


def solve_order1(provider: BackgroundProvider, t_span: tuple[float, float], step: float = 1e-3,
                 delta0: float = DELTA0, step_max: Optional[float] = None,
                 grading: float = 0.01) -> BoundaryDataTable:
    """Order-one table: ``T w``, ``T wbar`` and ``kappa`` along ``C0``.

    Parameters
    ----------
    provider : BackgroundProvider
    t_span : (float, float)
        Must start at ``provider.t_singular``.
    step : float
        RK4 step.
    delta0 : float
        Offset of the first RK4 node from the singular time.  The state there
        is seeded by one Taylor step from the singular data.
    step_max, grading : float, optional
        Enable graded steps ``clip(grading * (t - t_singular), step, step_max)``.
    """
    t0, t1 = map(float, t_span)
    if abs(t0 - provider.t_singular) > 1e-12:
        raise ValueError("t_span must start at the singular time of the provider")
    if not step > 0.0 or not t1 > t0 + delta0:
        raise ValueError("need step > 0 and t_end beyond the start offset")
    t = _node_times(t0, t1, step, delta0, step_max, grading)
    table = BoundaryDataTable(order=0, eos=provider.eos, t_singular=t0, step=step,
                              delta0=delta0, t=t, provider=provider)
    jets = provider.jets(t, 2)
    g = provider.eos.gamma
    w, wb, r = jets["w"], jets["wbar"], jets["r"]
    base = {"w": (w[0], w[1]), "wbar": (wb[0], wb[1]), "r": (r[0], r[1]),
            "Lw": (w[1], 2 * w[2]), "Lwbar": (wb[1], 2 * wb[2]), "Lr": (r[1], 2 * r[2]),
            "c": (0.5 * (g - 1) * (wb[0] + w[0]), 0.5 * (g - 1) * (wb[1] + w[1])),
            "v": (wb[0] - w[0], wb[1] - w[1])}
    for name, (val, der) in base.items():
        table.cols[name] = val
        table.dcols[name] = der
    return solve_orderN(provider, table, step)


def solve_orderN(provider: BackgroundProvider, table: BoundaryDataTable,
                 step: Optional[float] = None) -> BoundaryDataTable:
    """Extend ``table`` by one transversal order.

    The lower orders are read from ``table`` (Hermite-interpolated to RK4
    midpoints); the new order is integrated with RK4 on the table's node grid.
    ``step`` must match the table's step when given.
    """
    if step is not None and abs(step - table.step) > 1e-15 * max(1.0, step):
        raise ValueError("step must match the table's grid (orders share one node set)")
    n = table.order + 1
    for k in range(1, n):
        if f"T{k}wbar" not in table.cols:
            raise MissingOrderError(f"order {k} missing from table")
    g = table.eos.gamma
    t = table.t
    h = np.diff(t[1:])                  # RK4 step per interval
    K = len(t) - 2                      # number of RK4 steps (nodes 1..K+1)
    nodes = np.arange(len(t))
    mids = 0.5 * (t[1:-1] + t[2:])      # midpoints of the RK4 intervals
    J = n + 2
    A_all = np.empty((2, 2, len(t) + K))
    f_all = np.empty((2, len(t) + K))
    samples = np.concatenate([t, mids])
    rows_all = _row_arrays(table, n - 1, nodes, mids)
    for s in range(0, len(samples), _CHUNK):
        sl = slice(s, min(s + _CHUNK, len(samples)))
        jets = provider.jets(samples[sl], J)
        rows = {k: (a[sl], b[sl]) for k, (a, b) in rows_all.items()}
        ws = _Workspace(g, jets, rows)
        A_all[..., sl], f_all[:, sl] = _linear_system(ws, n)
    # singular seed and one Taylor step to t[1]
    y_s = np.array(_singular_state(n, g))
    dy_s = A_all[..., 0] @ y_s + f_all[:, 0]
    y = y_s + (t[1] - t[0]) * dy_s
    # RK4 over uniform intervals [t[i], t[i+1]], i = 1..K
    A0, f0 = A_all[..., 1:K + 1], f_all[:, 1:K + 1]
    A1, f1 = A_all[..., 2:K + 2], f_all[:, 2:K + 2]
    Am, fm = A_all[..., len(t):], f_all[:, len(t):]
    M, gv = _rk4_linear(A0, f0, Am, fm, A1, f1, h)
    ys = np.empty((len(t), 2))
    ys[0] = y_s
    ys[1] = y
    m00, m01, m10, m11 = (M[0, 0].tolist(), M[0, 1].tolist(), M[1, 0].tolist(), M[1, 1].tolist())
    g0, g1 = gv[0].tolist(), gv[1].tolist()
    a, b = float(y[0]), float(y[1])
    out0 = [a]
    out1 = [b]
    for i in range(K):
        a, b = m00[i] * a + m01[i] * b + g0[i], m10[i] * a + m11[i] * b + g1[i]
        out0.append(a)
        out1.append(b)
    ys[1:, 0] = out0
    ys[1:, 1] = out1
    if not np.all(np.isfinite(ys)):
        raise FloatingPointError(f"order-{n} boundary ODE diverged")
    # final pass on the nodes: all order-n columns and their L-derivatives
    new = BoundaryDataTable(order=n, eos=table.eos, t_singular=table.t_singular, step=table.step,
                            delta0=table.delta0, t=t, cols=dict(table.cols),
                            dcols=dict(table.dcols), provider=provider)
    fac = factorial(n)
    rows_nodes = _row_arrays(table, n - 1, nodes, np.empty(0))
    rows_nodes[n] = (ys[:, 0] / fac, -ys[:, 1] / fac)
    acc: dict[str, list] = {}
    for s in range(0, len(t), _CHUNK):
        sl = slice(s, min(s + _CHUNK, len(t)))
        ws = _Workspace(g, provider.jets(t[sl], J), {k: (a_[sl], b_[sl]) for k, (a_, b_) in rows_nodes.items()})
        for name, (val, der) in _order_columns(ws, n).items():
            acc.setdefault(name, []).append((val, der))
    for name, parts in acc.items():
        new.cols[name] = np.concatenate([p[0] for p in parts])
        new.dcols[name] = np.concatenate([p[1] for p in parts])
    # the ODE states are authoritative for the integrated columns
    new.cols[f"T{n}wbar"] = ys[:, 0].copy()
    new.cols[f"T{n - 1}kappa"] = ys[:, 1].copy()
    return new


def build_table(provider: BackgroundProvider, order: int, t_end: float, step: float = 1e-3,
                delta0: float = DELTA0, step_max: Optional[float] = None,
                grading: float = 0.01) -> BoundaryDataTable:
    """Solve orders ``1..order`` on ``[t_singular, t_end]``.

    See :func:`solve_order1` for the step options.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    table = solve_order1(provider, (provider.t_singular, t_end), step, delta0, step_max, grading)
    while table.order < order:
        table = solve_orderN(provider, table)
    return table


# ---------------------------------------------------------------------------
# the recursion at the singular point
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SingularSeries:
    """``L T^n w`` at the singular point and its normalized sizes.

    Attributes
    ----------
    g : tuple of Fraction
        ``L T^n w(0, 0)`` for ``n = 0..N`` (exact rationals of the inputs).
    a : tuple of float
        ``|c0^n ((gamma+1)/(gamma-1))^n g[n] / n!|``.
    C_I : float
        ``max a(n)``; the bound ``|g[n]| <= C_I k^n n! / c0^n`` then holds.
    """

    g: tuple
    a: tuple
    C_I: float

    def bound_holds(self, C: Optional[float] = None) -> bool:
        C = self.C_I if C is None else C
        return all(x <= C for x in self.a)


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(x))      # decimal literal, e.g. 1.4 -> 7/5


def singular_series(g0, eos: GammaLaw | float, c0=1, N: int = 10,
                    binomial: bool = False) -> SingularSeries:
    """Evaluate the recursion for ``L T^n w`` at the singular point.

    The recursion is

        L T^n w = -(1/2) sum_{i=0}^{n-1} W_i  i! k^i / c0^(i+1)  L T^(n-1-i) w,

    with ``k = (gamma-1)/(gamma+1)`` and ``W_i = 1`` (default), or
    ``W_i = binom(n-1, i)`` when ``binomial`` is true.  Arithmetic is exact in
    rationals.  Float inputs are read through their decimal repr.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    gamma = _exact(eos.gamma if isinstance(eos, GammaLaw) else eos)
    c0 = _exact(c0)
    k = (gamma - 1) / (gamma + 1)
    g = [_exact(g0)]
    for n in range(1, N + 1):
        s = Fraction(0)
        for i in range(n):
            wgt = Fraction(_binom(n - 1, i)) if binomial else Fraction(1)
            s += wgt * factorial(i) * k ** i / c0 ** (i + 1) * g[n - 1 - i]
        g.append(-s / 2)
    a = tuple(float(abs(c0 ** n / k ** n * g[n] / factorial(n))) for n in range(N + 1))
    return SingularSeries(tuple(g), a, max(a))


def _binom(n: int, k: int) -> int:
    from math import comb
    return comb(n, k)


# ---------------------------------------------------------------------------
# vanishing orders
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class VanishingFit:
    """Fitted power ``p`` in ``|q(t_s + tau)| ~ C tau^p``."""

    exponent: Optional[float]
    constant: Optional[float]
    exact_zero: bool = False


def vanishing_orders(table: BoundaryDataTable, taus: Optional[Sequence[float]] = None,
                     zero_tol: float = 1e-14) -> dict[str, VanishingFit]:
    """Log-log fits of the boundary columns near the singular time.

    Columns are shifted by their singular values: ``T wbar + 2/(gamma+1)``
    and ``kappa - tau`` are fitted, together with ``T^n w``, ``T^n wbar``
    (``n >= 2``) and ``T^(n-1) kappa`` (``n >= 2``).  A column that vanishes
    to ``zero_tol`` on every sample is reported as an exact zero.
    """
    if taus is None:
        lo = max(100.0 * table.delta0, 10.0 * table.step)
        hi = min(100.0 * lo, 0.5 * (table.t[-1] - table.t_singular))
        taus = np.geomspace(lo, hi, 40)
    taus = np.asarray(taus, dtype=float)
    ts = table.t_singular + taus
    g = table.eos.gamma
    series = {"Tw": table.at(ts, "T1w"),
              "Twbar+2/(g+1)": table.at(ts, "T1wbar") + 2.0 / (g + 1.0),
              "kappa-t": table.at(ts, "kappa") - taus}
    for n in range(2, table.order + 1):
        series[f"T{n}w"] = table.at(ts, f"T{n}w")
        series[f"T{n}wbar"] = table.at(ts, f"T{n}wbar")
        series[f"T{n - 1}kappa"] = table.at(ts, f"T{n - 1}kappa")
    out = {}
    for name, q in series.items():
        aq = np.abs(q)
        if np.all(aq <= zero_tol):
            out[name] = VanishingFit(None, None, True)
            continue
        p, logc = np.polyfit(np.log(taus), np.log(np.maximum(aq, 1e-300)), 1)
        out[name] = VanishingFit(float(p), float(np.exp(logc)))
    return out
