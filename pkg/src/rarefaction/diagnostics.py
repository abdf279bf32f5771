"""Energies, fluxes, growth fits and convergence studies on marched grids.

For a multiplier ``X = a L + b Lbar`` and a scalar ``psi`` on the acoustical
grid, the energy on a slice and the flux through a cone are

    E(t) = int 1/2 (b |Lbar psi|^2 + a (kappa/c) |L psi|^2) 4 pi r^2 du,
    F(u) = int a |L psi|^2 4 pi r^2 dt,

with ``Lbar psi = 2 T psi + (kappa/c) L psi``.  They satisfy the balance

    E(t2) - E(t1) + F(u2) - F(u1) = int int Q mu 4 pi r^2 du dt,

where ``mu = c kappa`` and ``Q = Q0 + Q1 + Q2 + Q3`` collects the wave-operator
source, the deformation of the multiplier and the null-frame terms.  See
:func:`bulk_density`.

Multipliers:

* ``local``: ``a = kappa/c``, ``b = 1``.
* ``global_w``: ``a = t^(1+s) c/kappa``, ``b = 1``.
* ``global_wbar``: ``a = kappa/c``, ``b = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import trapezoid

from .evolution import AcousticalGrid, residuals, time_derivative

KINDS = ("local", "global_w", "global_wbar")


class RunTooShortError(ValueError):
    """Raised when a fit needs a longer run than was provided."""


@dataclass
class PsiField:
    """A scalar on the grid with its ``L`` derivative."""

    name: str
    values: np.ndarray
    L: np.ndarray
    T: Optional[np.ndarray] = None

    def transversal(self, u: np.ndarray) -> np.ndarray:
        """``T psi``: stored if available, otherwise second-order differences."""
        if self.T is not None:
            return self.T
        return t_derivative(self.values, u, 1)


def fd_weights(x0: float, xs: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights for the ``m``-th derivative at ``x0`` on nodes ``xs``.

    Fornberg's recursion; the weights are exact for polynomials of degree
    ``len(xs) - 1``.
    """
    n = len(xs)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def t_derivative(f: np.ndarray, u: np.ndarray, n: int, accuracy: int = 2) -> np.ndarray:
    """``T^n f`` along the last axis with ``accuracy``-order local stencils.

    Each node uses the ``n + accuracy`` (rounded up to odd for centering)
    nearest grid points, shifted inwards near the ends, so one-sided
    derivatives keep the same order as centered ones.
    """
    f = np.asarray(f, dtype=float)
    if n == 0:
        return f.copy()
    # removing the u = 0 value changes no derivative but keeps constants exact
    f = f - f[..., :1]
    u = np.asarray(u, dtype=float)
    width = n + accuracy
    width += (width + 1) % 2 if width < len(u) else 0
    width = min(width, len(u))
    if width < n + 1:
        raise ValueError(f"need at least {n + 1} nodes for T^{n}")
    out = np.empty_like(f)
    half = width // 2
    for j in range(len(u)):
        lo = min(max(j - half, 0), len(u) - width)
        w = fd_weights(u[j], u[lo:lo + width], n)
        out[..., j] = f[..., lo:lo + width] @ w
    return out


def psi_field(grid: AcousticalGrid, base: str, n: int, max_order: int = 4) -> PsiField:
    """``T^n`` of ``w`` or ``wbar`` together with ``L T^n`` (``= T^n L``).

    Grids from the commuted march supply ``T^n``, ``L T^n`` and ``T^(n+1)``
    directly.  Otherwise they are obtained by differencing in ``u``, which
    loses accuracy quickly with ``n`` (roughly ``du^-n`` times the solution
    error).
    """
    if base not in ("w", "wbar"):
        raise KeyError("psi must be built from 'w' or 'wbar'")
    tw = grid.towers
    if tw is not None and tw[base].shape[1] > n:
        T = tw[base][:, n + 1] if tw[base].shape[1] > n + 1 else None
        return PsiField(f"T{n}{base}", tw[base][:, n], tw["L" + base][:, n], T)
    if n > max_order:
        raise ValueError(f"n={n} exceeds the stencil order limit {max_order}")
    if len(grid.u) < n + 3:
        raise ValueError("too few u-nodes for the requested T-order")
    vals = t_derivative(grid.field(base), grid.u, n)
    Lv = t_derivative(grid.field("L" + base), grid.u, n)
    return PsiField(f"T{n}{base}", vals, Lv)


def _kappa(grid: AcousticalGrid) -> np.ndarray:
    """Evolved ``kappa`` for commuted grids, ``-T r`` by differences otherwise."""
    if grid.towers is not None:
        return grid.towers["kappa"][:, 0]
    return grid.kappa


def _resolve(grid: AcousticalGrid, psi) -> PsiField:
    if isinstance(psi, PsiField):
        return psi
    if isinstance(psi, str):
        import re
        m = re.fullmatch(r"T(\d+)(wbar|w)", psi)
        if not m:
            raise KeyError(f"cannot parse psi selector {psi!r}")
        return psi_field(grid, m.group(2), int(m.group(1)))
    base, n = psi
    return psi_field(grid, base, int(n))


def multiplier(grid: AcousticalGrid, kind: str, s: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients ``(a, b)`` of ``X = a L + b Lbar`` on the grid."""
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    kap, c = _kappa(grid), grid.c
    if kind in ("local", "global_wbar"):
        a = kap / c
    elif kind == "global_w":
        a = grid.t[:, None] ** (1.0 + s) * c / kap
    else:
        raise KeyError(f"unknown multiplier kind {kind!r}; expected one of {KINDS}")
    return a, np.ones_like(a)


def energy_density(grid: AcousticalGrid, psi: PsiField, a: np.ndarray, b: np.ndarray,
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise ``(e, f)`` with ``E = int e du`` and ``F = int f dt`` (including 4 pi r^2)."""
    kap, c = _kappa(grid), grid.c
    Lpsi = psi.L
    Lb = 2.0 * psi.transversal(grid.u) + kap / c * Lpsi
    area = 4.0 * np.pi * grid.r ** 2
    e = 0.5 * (b * Lb ** 2 + a * kap / c * Lpsi ** 2) * area
    f = a * Lpsi ** 2 * area
    return e, f


@dataclass
class EnergyReport:
    """Energy and flux series for one multiplier and one ``psi``.

    Attributes
    ----------
    kind : str
    psi : str
    s : float
    t : ndarray
        Slice times of ``E``.
    E : ndarray
    u : ndarray
        Cone labels of ``F``.
    F : ndarray
        Flux through each cone over the whole run.
    fits : dict
        Growth diagnostics (see :func:`energy`).
    """

    kind: str
    psi: str
    s: float
    t: np.ndarray
    E: np.ndarray
    u: np.ndarray
    F: np.ndarray
    fits: dict = field(default_factory=dict)

    def __add__(self, other: "EnergyReport") -> "EnergyReport":
        if not (np.array_equal(self.t, other.t) and np.array_equal(self.u, other.u)):
            raise ValueError("reports live on different grids")
        rep = EnergyReport(f"{self.kind}+{other.kind}", f"{self.psi}+{other.psi}", self.s,
                           self.t, self.E + other.E, self.u, self.F + other.F)
        rep.fits = _fits(rep.t, rep.E, t_singular=other.fits.get("t_singular", 1.0))
        return rep


def _fits(t: np.ndarray, E: np.ndarray, t_singular: float) -> dict:
    tau = t - t_singular
    out = {"t_singular": t_singular, "sup_E": float(np.max(E)),
           "sup_E_over_tau2": float(np.max(E / tau ** 2))}
    m = (E > 0) & (tau > 0)
    if np.count_nonzero(m) >= 3:
        p, lc = np.polyfit(np.log(tau[m]), np.log(E[m]), 1)
        out["growth_exponent"] = float(p)
        out["growth_constant"] = float(np.exp(lc))
    return out


def energy(grid: AcousticalGrid, psi, kind: str = "local", s: float = 0.5) -> EnergyReport:
    """Energy ``E(t)`` on every stored slice and flux ``F(u)`` through every cone.

    ``psi`` is a selector such as ``"T3w"``, ``("wbar", 2)`` or a
    :class:`PsiField`.  The integrals use the trapezoid rule.  ``fits`` holds
    ``sup_E``, ``sup_E_over_tau2`` (``tau = t - t_singular``) and a log-log
    growth exponent of ``E`` against ``tau``.
    """
    p = _resolve(grid, psi)
    a, b = multiplier(grid, kind, s)
    e, f = energy_density(grid, p, a, b)
    E = trapezoid(e, grid.u, axis=1)
    F = trapezoid(f, grid.t, axis=0)
    rep = EnergyReport(kind, p.name, s, grid.t.copy(), E, grid.u.copy(), F)
    rep.fits = _fits(grid.t, E, grid.t_singular)
    return rep


def flux(grid: AcousticalGrid, psi, kind: str = "local", u: Optional[float] = None,
         s: float = 0.5, t_range: Optional[tuple[float, float]] = None) -> np.ndarray:
    """Running flux ``F^{[t0, t]}(u)`` through one cone (or all cones if ``u`` is None).

    Returns an array over the stored times (cumulative trapezoid) with shape
    ``(nt,)`` for a single cone or ``(nt, nu)`` for all.
    """
    from scipy.integrate import cumulative_trapezoid
    p = _resolve(grid, psi)
    a, b = multiplier(grid, kind, s)
    _, f = energy_density(grid, p, a, b)
    t = grid.t
    if t_range is not None:
        m = (t >= t_range[0]) & (t <= t_range[1])
        t, f = t[m], f[m]
    cum = cumulative_trapezoid(f, t, axis=0, initial=0.0)
    if u is None:
        return cum
    j = int(np.argmin(np.abs(grid.u - u)))
    return cum[:, j]


def global_energy(grid: AcousticalGrid, n: int = 3, s: float = 0.5) -> EnergyReport:
    """``E_{T^n}`` with the global multipliers: the ``w`` part plus the ``wbar`` part."""
    return energy(grid, ("w", n), "global_w", s) + energy(grid, ("wbar", n), "global_wbar", s)


def local_energy(grid: AcousticalGrid, n: int = 3) -> EnergyReport:
    """``E_{T^n w} + E_{T^n wbar}`` with the local multiplier."""
    return energy(grid, ("w", n), "local") + energy(grid, ("wbar", n), "local")


def decade_sups(t: np.ndarray, E: np.ndarray, t_from: float = 10.0) -> list[tuple[float, float]]:
    """``sup E`` over successive decades ``[10^k, 10^(k+1))`` starting at ``t_from``."""
    out = []
    lo = t_from
    while lo < t[-1]:
        hi = lo * 10.0
        m = (t >= lo) & (t < hi) if hi < t[-1] else (t >= lo)
        if np.any(m):
            out.append((lo, float(np.max(E[m]))))
        lo = hi
    return out


# ---------------------------------------------------------------------------
# balance identity
# ---------------------------------------------------------------------------
def bulk_density(grid: AcousticalGrid, psi: PsiField, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``Q mu 4 pi r^2`` on interior time levels (rows ``1 .. nt-2``).

    Q is the sum of four terms:

    * ``Q0 = -rho (a L psi + b Lbar psi)``, where ``mu rho`` is the
      wave-operator expression ``-(2 kappa v/(c r)) L psi - 2 ((v+c)/r) T psi
      - (kappa/c) L L psi - 2 L T psi - L(kappa/c) L psi``.
    * ``Q1 = L(b) |Lbar psi|^2 / (2 mu)``.
    * ``Q2 = (Lbar a - a L(kappa/c)) |L psi|^2 / (2 mu)``.
    * ``Q3 = -(a tr chi + b tr chibar) L psi Lbar psi / (2 mu)``, with
      ``tr chi = 2 (v+c)/r`` and ``tr chibar = 2 (kappa/c)(v-c)/r``.

    ``L`` of grid quantities is taken with the three-point time stencil and
    ``T`` with second-order ``u``-differences.
    """
    sl = slice(1, -1)
    t, u = grid.t, grid.u
    kap, c, v, r = _kappa(grid), grid.c, grid.v, grid.r
    k_c = kap / c
    Lpsi = psi.L
    Tpsi = psi.transversal(u)
    LLpsi = time_derivative(t, Lpsi)
    LTpsi = np.gradient(Lpsi, u, axis=1, edge_order=2)[sl]
    L_kc = time_derivative(t, k_c)
    La = time_derivative(t, a)
    Lb_coef = time_derivative(t, b)
    Ta = np.gradient(a, u, axis=1, edge_order=2)[sl]
    kap, c, v, r, k_c, Lpsi, Tpsi, a, b = (x[sl] for x in (kap, c, v, r, k_c, Lpsi, Tpsi, a, b))
    mu = c * kap
    Lbpsi = 2.0 * Tpsi + k_c * Lpsi
    mu_box = (-2.0 * kap * v / (c * r) * Lpsi - 2.0 * (v + c) / r * Tpsi - k_c * LLpsi
              - 2.0 * LTpsi - L_kc * Lpsi)
    rho = mu_box / mu
    Lbar_a = 2.0 * Ta + k_c * La
    trchi = 2.0 * (v + c) / r
    trchib = 2.0 * k_c * (v - c) / r
    Q = (-rho * (a * Lpsi + b * Lbpsi)
         + Lb_coef * Lbpsi ** 2 / (2.0 * mu)
         + (Lbar_a - a * L_kc) * Lpsi ** 2 / (2.0 * mu)
         - (a * trchi + b * trchib) * Lpsi * Lbpsi / (2.0 * mu))
    return Q * mu * 4.0 * np.pi * r ** 2


@dataclass(frozen=True)
class BalanceReport:
    """Terms of the integrated balance on ``[t1, t2] x [u0, u1]``."""

    dE: float
    dF: float
    bulk: float

    @property
    def defect(self) -> float:
        return self.dE + self.dF - self.bulk

    @property
    def scale(self) -> float:
        return max(abs(self.dE), abs(self.dF), abs(self.bulk))


def energy_balance(grid: AcousticalGrid, psi: PsiField, a: np.ndarray, b: np.ndarray,
                   ) -> BalanceReport:
    """Integrated divergence identity over the interior time levels."""
    e, f = energy_density(grid, psi, a, b)
    sl = slice(1, -1)
    t = grid.t[sl]
    E = trapezoid(e[sl], grid.u, axis=1)
    F = trapezoid(f[sl], t, axis=0)
    q = bulk_density(grid, psi, a, b)
    bulk = trapezoid(trapezoid(q, grid.u, axis=1), t)
    return BalanceReport(float(E[-1] - E[0]), float(F[-1] - F[0]), float(bulk))


# ---------------------------------------------------------------------------
# kappa growth
# ---------------------------------------------------------------------------
@dataclass
class KappaGrowth:
    """Least-squares ``kappa ~ alpha ln t + beta`` per cone on the last decade."""

    u: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    t_window: tuple[float, float]
    max_rel_dev: float          # max |kappa - ln t| / ln t for t >= 10

    def as_dict(self) -> dict:
        return {"u": self.u.tolist(), "alpha": self.alpha.tolist(), "beta": self.beta.tolist(),
                "t_window": list(self.t_window), "max_rel_dev_t_ge_10": self.max_rel_dev}


def kappa_growth(grid: AcousticalGrid, t_min_run: float = 100.0) -> KappaGrowth:
    """Fit ``kappa(t, u)`` against ``ln t`` on ``[t_end/10, t_end]``.

    Raises
    ------
    RunTooShortError
        If the run ends before ``t_min_run``.
    """
    t_end = float(grid.t[-1])
    if t_end < t_min_run:
        raise RunTooShortError(f"kappa growth needs t_end >= {t_min_run}, got {t_end}")
    kap = grid.kappa
    lnt = np.log(grid.t)
    m = grid.t >= t_end / 10.0
    A = np.vstack([lnt[m], np.ones(np.count_nonzero(m))]).T
    coef, *_ = np.linalg.lstsq(A, kap[m], rcond=None)
    late = grid.t >= 10.0
    rel = np.abs(kap[late] - lnt[late, None]) / lnt[late, None]
    return KappaGrowth(grid.u.copy(), coef[0], coef[1], (t_end / 10.0, t_end),
                       float(np.max(rel)) if rel.size else float("nan"))


# ---------------------------------------------------------------------------
# convergence studies
# ---------------------------------------------------------------------------
@dataclass
class CauchyTable:
    """Sup-norm differences between successive runs of a family."""

    deltas: list
    d: list
    ratios: list
    order: Optional[float]
    t_common: tuple
    limit: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"deltas": self.deltas, "d": self.d, "ratios": self.ratios, "order": self.order,
                "t_common": list(self.t_common), "limit": self.limit}


def delta_convergence(runs: Sequence[AcousticalGrid], deltas: Sequence[float],
                      t_star: Optional[float] = None, n_times: int = 60,
                      fields: Sequence[str] = ("w", "wbar", "r")) -> CauchyTable:
    """Compare runs started at ``t_singular + delta_k`` on their common domain.

    Each run is Hermite-interpolated in time onto ``n_times`` points of
    ``[t_singular + max delta, t_star]``.  The u-grids must coincide.  The
    ``limit`` entry compares ``c`` on the first common slice with the 1-D
    pattern ``c0 - (gamma-1)/(gamma+1) u``, where ``c0`` is ``c`` at ``u = 0``
    on the singular sphere (extrapolated from the slice).
    """
    if len(runs) < 3:
        raise ValueError("need at least three runs")
    order = np.argsort(deltas)[::-1]
    runs = [runs[i] for i in order]
    deltas = [float(deltas[i]) for i in order]
    u = runs[0].u
    for g in runs[1:]:
        if not np.allclose(g.u, u):
            raise ValueError("runs use different u-grids")
    ts = runs[0].t_singular
    t0 = ts + deltas[0]
    t1 = min(g.t[-1] for g in runs) if t_star is None else t_star
    if any(g.t[0] > t0 + 1e-14 for g in runs) or any(g.t[-1] < t1 - 1e-12 for g in runs):
        raise ValueError("runs do not share the common domain")
    tc = np.linspace(t0, t1, n_times)
    vals = [np.concatenate([g.interp(tc, f) for f in fields], axis=1) for g in runs]
    d = [float(np.max(np.abs(vals[k] - vals[k + 1]))) for k in range(len(runs) - 1)]
    ratios = [d[k + 1] / d[k] if d[k] > 0 else float("nan") for k in range(len(d) - 1)]
    fit = None
    pos = [(dl, dk) for dl, dk in zip(deltas[1:], d) if dk > 0]
    if len(pos) >= 2:
        fit = float(np.polyfit(np.log([p[0] for p in pos]), np.log([p[1] for p in pos]), 1)[0])
    g = runs[-1]
    c_slice = g.derived_interp(t0, "c")[0]
    kk = (g.gamma - 1.0) / (g.gamma + 1.0)
    c0 = float(c_slice[0])
    dev = float(np.max(np.abs(c_slice - (c0 - kk * u))))
    return CauchyTable(deltas, d, ratios, fit, (float(t0), float(t1)),
                       {"t": float(t0), "max_dev_from_1d": dev, "c0": c0})


def refinement_orders(grids: Sequence[AcousticalGrid], norm: str = "l2") -> dict[str, list]:
    """Observed orders ``log2(R_h / R_{h/2})`` of residual norms for successively halved grids."""
    reps = [residuals(g) for g in grids]
    out: dict[str, list] = {}
    for key in reps[0].max:
        vals = [getattr(r, norm)[key] for r in reps]
        out[key] = [float(np.log2(vals[i] / vals[i + 1])) for i in range(len(vals) - 1)]
    out["norms"] = {key: [getattr(r, norm)[key] for r in reps] for key in reps[0].max}
    return out
