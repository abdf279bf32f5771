"""Command-line front end: ``rarefaction <subcommand> [options]``.

Subcommands
-----------
riemann1d   tabulate the planar piston fan
boundary    solve the transversal hierarchy on C0 and write the table
evolve      march Taylor (or constant-state) data and write the grid
diagnose    kappa growth, energies and residuals of an ``evolve`` output
sweep       delta-convergence or grid-refinement family
verify      closed-form and exact-arithmetic self checks

Configuration is read from a TOML file (``--config``) with the sections
``[eos]``, ``[background]``, ``[boundary]``, ``[evolve]``, ``[diagnose]`` and
``[output]`` (see ``configs/`` and the README); command-line flags override the
file.  Outputs go to ``$RAREFACTION_OUTPUT_ROOT/<output.dir>`` (the root
defaults to the working directory).  Every run writes ``manifest.json`` with
the resolved configuration and the library version, plus CSV data and a
gnuplot script where applicable.  Files are schema-checked after writing.

Exit status: 0 success, 1 invalid configuration, 2 numerical failure (fold,
CFL violation, non-finite state, failed verification), 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .background import (BackgroundProvider, PerturbationSpec, constant_background,
                         perturbed_background)
from .boundary_data import build_table, singular_series, vanishing_orders
from .constant_oracle import QUANTITIES, closed_form, decay_type_of, integrate_power_log
from .core_state import GammaLaw, VacuumError
from .diagnostics import (RunTooShortError, decade_sups, delta_convergence, global_energy,
                          kappa_growth, local_energy, refinement_orders)
from .evolution import (AcousticalGrid, CFLError, FoldError, build_taylor_data,
                        constant_state_data, march, march_commuted, residuals)
from .riemann1d import FanRegionError, PistonProblem, sample_fan

ENV_OUTPUT_ROOT = "RAREFACTION_OUTPUT_ROOT"
EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 1, 2, 3


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class VerificationError(ArithmeticError):
    """A self check did not meet its tolerance."""


class OutputFormatError(OSError):
    """An output file failed its read-back check."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------
@dataclass
class RunConfig:
    """Resolved configuration of one invocation.

    The TOML section of each field is given in brackets.

    Attributes
    ----------
    gamma : float
        [eos] adiabatic exponent, > 1.
    background : str
        [background] ``"constant"`` or ``"perturbed"``.
    epsilon, delta_exp : float
        [background] perturbation size and decay loss (perturbed only).
    seed : int
        [background] random seed of the perturbed family.
    order : int
        [boundary] transversal order of the C0 table.
    step, step_max, grading : float
        [boundary] RK4 step near the singular time, its cap far away, and the
        growth rate ``step = grading * (t - t_s)`` in between.
    initial : str
        [evolve] ``"constant-state"`` (exact rest state with a linear
        foliation) or ``"taylor"`` (order-``N`` data at ``t_s + delta``).
    delta : float
        [evolve] start offset from the singular time.
    N : int
        [evolve] Taylor order in ``u``.
    u_star : float
        [evolve] width of the rarefaction region in ``u``.
    nu : int
        [evolve] number of ``u``-intervals.
    t_end : float
        [evolve] final time (the C0 table is built to the same time).
    cfl : float
        [evolve] Courant number.
    store_every : int
        [evolve] keep every n-th level.
    commute : int
        [evolve] if positive, march the ``T^k``-commuted system with
        ``k <= commute`` (Taylor data only); the towers are written to the
        grid CSV and used by ``diagnose --energy``.
    s : float
        [diagnose] weight exponent of the global multiplier, in (0, 1).
    energy_order : int
        [diagnose] ``n`` in ``E_{T^n}``.
    c1, vp : float
        [riemann1d] undisturbed sound speed and piston speed.
    n_samples : int
        [riemann1d] number of fan samples.
    sweep : str
        [sweep] ``"delta"`` or ``"grid"``.
    deltas : list of float
        [sweep] start offsets for the delta family.
    levels : int
        [sweep] number of halvings for the grid family.
    output_dir : str
        [output] directory under the output root.
    """

    gamma: float = 1.4
    background: str = "constant"
    epsilon: float = 1e-2
    delta_exp: float = 0.1
    seed: int = 1
    order: int = 2
    step: float = 1e-3
    step_max: Optional[float] = None
    grading: float = 0.01
    initial: str = "constant-state"
    delta: float = 1e-3
    N: int = 2
    u_star: float = 0.1
    nu: int = 20
    t_end: float = 2.0
    cfl: float = 0.4
    store_every: int = 1
    commute: int = 0
    s: float = 0.5
    energy_order: int = 3
    c1: float = 1.0
    vp: float = 1.0
    n_samples: int = 101
    sweep: str = "delta"
    deltas: tuple = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
    levels: int = 3
    output_dir: str = "out"

    def validate(self) -> "RunConfig":
        """Check all ranges; raise :class:`ConfigError` on the first violation."""
        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise ConfigError(msg)

        need(math.isfinite(self.gamma) and self.gamma > 1.0, "gamma must be > 1")
        need(self.background in ("constant", "perturbed"),
             "background must be 'constant' or 'perturbed'")
        need(self.epsilon >= 0.0, "epsilon must be non-negative")
        need(0.0 < self.delta_exp < 0.5, "delta_exp must lie in (0, 1/2)")
        need(1 <= self.order <= 8, "order must lie in 1..8")
        need(self.step > 0.0, "step must be positive")
        need(self.step_max is None or self.step_max >= self.step, "step_max must be >= step")
        need(self.grading > 0.0, "grading must be positive")
        need(self.initial in ("constant-state", "taylor"),
             "initial must be 'constant-state' or 'taylor'")
        need(self.delta > 0.0, "delta must be positive")
        need(1 <= self.N <= self.order, "N must lie in 1..order")
        need(self.u_star > 0.0, "u_star must be positive")
        # the fan reaches vacuum where c0 - k u = 0 (c0 = 1 in the unit chart)
        k = (self.gamma - 1.0) / (self.gamma + 1.0)
        need(self.u_star < 1.0 / k, f"u_star must be below the vacuum bound {1.0 / k:.6g}")
        need(self.nu >= 4, "nu must be >= 4")
        need(self.t_end > 1.0 + self.delta, "t_end must exceed t_singular + delta")
        need(0.0 < self.cfl <= 1.0, "cfl must lie in (0, 1]")
        need(self.store_every >= 1, "store_every must be >= 1")
        need(0 <= self.commute <= 6, "commute must lie in 0..6")
        need(self.commute == 0 or self.initial == "taylor", "commute needs initial = 'taylor'")
        need(0.0 < self.s < 1.0, "s must lie in (0, 1)")
        need(0 <= self.energy_order <= 4, "energy_order must lie in 0..4")
        need(self.c1 > 0.0 and self.vp >= 0.0, "need c1 > 0 and vp >= 0")
        need(self.n_samples >= 2, "n_samples must be >= 2")
        need(self.sweep in ("delta", "grid"), "sweep must be 'delta' or 'grid'")
        need(len(self.deltas) >= 3 and all(d > 0 for d in self.deltas),
             "deltas needs at least three positive entries")
        need(self.levels >= 2, "levels must be >= 2")
        return self

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["deltas"] = list(self.deltas)
        return d


#: TOML layout: section -> {key: RunConfig field}.
CONFIG_SECTIONS = {
    "eos": {"gamma": "gamma"},
    "background": {"kind": "background", "epsilon": "epsilon", "delta_exp": "delta_exp",
                   "seed": "seed"},
    "boundary": {"order": "order", "step": "step", "step_max": "step_max",
                 "grading": "grading"},
    "evolve": {"initial": "initial", "delta": "delta", "N": "N", "u_star": "u_star",
               "nu": "nu", "t_end": "t_end", "cfl": "cfl", "store_every": "store_every",
               "commute": "commute"},
    "diagnose": {"s": "s", "energy_order": "energy_order"},
    "riemann1d": {"c1": "c1", "vp": "vp", "n_samples": "n_samples"},
    "sweep": {"kind": "sweep", "deltas": "deltas", "levels": "levels"},
    "output": {"dir": "output_dir"},
}


def _coerce(name: str, value: Any) -> Any:
    ftype = {f.name: f.type for f in fields(RunConfig)}[name]
    try:
        if value is None:
            return None
        if ftype in ("float", "Optional[float]"):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if ftype == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if ftype == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
        if ftype == "tuple":
            return tuple(float(x) for x in value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name}: {value!r}") from None
    return value


def load_config(path: Optional[str], overrides: dict[str, Any]) -> RunConfig:
    """Merge defaults, the TOML file at ``path`` and flag ``overrides``."""
    values: dict[str, Any] = {}
    if path is not None:
        try:
            import tomllib  # type: ignore[import-not-found]
        except ModuleNotFoundError:          # Python < 3.11
            import tomli as tomllib
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        for section, table in data.items():
            if section not in CONFIG_SECTIONS or not isinstance(table, dict):
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in table.items():
                if key not in CONFIG_SECTIONS[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                name = CONFIG_SECTIONS[section][key]
                values[name] = _coerce(name, value)
    for name, value in overrides.items():
        if value is not None:
            values[name] = _coerce(name, value)
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# output: CSV, JSON, plot scripts, schema checks
# ---------------------------------------------------------------------------
def output_root() -> Path:
    return Path(os.environ.get(ENV_OUTPUT_ROOT, "."))


def _fmt(x: float) -> str:
    return repr(float(x))          # shortest round-trip form, '.' decimal


def write_csv(path: Path, columns: dict[str, np.ndarray]) -> None:
    """Write equal-length numeric columns with a header row."""
    names = list(columns)
    cols = [np.asarray(columns[n], dtype=float).ravel() for n in names]
    if len({len(c) for c in cols}) != 1:
        raise ValueError("columns differ in length")
    with open(path, "w", newline="", encoding="ascii") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(names)
        for row in zip(*cols):
            wr.writerow([_fmt(x) for x in row])


def read_csv(path: Path, expected: Optional[Sequence[str]] = None) -> dict[str, np.ndarray]:
    """Read a file written by :func:`write_csv`, checking header and row shape."""
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise OutputFormatError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    if expected is not None and list(expected) != header:
        raise OutputFormatError(f"{path}: header {header} != expected {list(expected)}")
    if any(len(r) != len(header) for r in body):
        raise OutputFormatError(f"{path}: ragged rows")
    try:
        arr = np.array(body, dtype=float).reshape(len(body), len(header))
    except ValueError as exc:
        raise OutputFormatError(f"{path}: non-numeric entry ({exc})") from None
    return {h: arr[:, i] for i, h in enumerate(header)}


MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["command", "version", "config", "outputs", "results"],
    "properties": {
        "command": {"type": "string"},
        "version": {"type": "string"},
        "config": {"type": "object", "required": ["gamma", "background", "seed"]},
        "outputs": {"type": "array", "items": {"type": "string"}},
        "results": {"type": "object"},
    },
}


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def write_json(path: Path, obj: dict, schema: Optional[dict] = None) -> None:
    """Deterministic JSON (sorted keys, indent 2), validated on read-back."""
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    path.write_text(text, encoding="utf-8")
    if schema is not None:
        validate_json(json.loads(path.read_text(encoding="utf-8")), schema, path)


def validate_json(obj: Any, schema: dict, path: Any = "<json>") -> None:
    import jsonschema
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        raise OutputFormatError(f"{path}: {exc.message}") from None


def write_gnuplot(path: Path, csv_name: str, x: str, ys: Sequence[str], title: str,
                  logx: bool = False, logy: bool = False) -> None:
    """Plot script for ``gnuplot``; reads ``csv_name`` with a header row."""
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             f"set title '{title}'", f"set xlabel '{x}'", "set grid"]
    if logx:
        lines.append("set logscale x")
    if logy:
        lines.append("set logscale y")
    plots = [f"'{csv_name}' using '{x}':'{y}' with lines title '{y}'" for y in ys]
    lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


class _Run:
    """Collects outputs of one subcommand and writes the manifest."""

    def __init__(self, command: str, cfg: RunConfig, out_dir: Optional[str] = None) -> None:
        self.command = command
        self.cfg = cfg
        self.dir = output_root() / (out_dir or cfg.output_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self._csv: list[tuple[Path, list[str]]] = []

    def csv(self, name: str, columns: dict[str, np.ndarray]) -> Path:
        p = self.dir / name
        write_csv(p, columns)
        self._csv.append((p, list(columns)))
        self.outputs.append(name)
        return p

    def plot(self, name: str, csv_name: str, x: str, ys: Sequence[str], **kw) -> None:
        write_gnuplot(self.dir / name, csv_name, x, ys, f"{self.command}: {csv_name}", **kw)
        self.outputs.append(name)

    def finish(self, results: dict) -> dict:
        for p, header in self._csv:
            read_csv(p, header)
        manifest = {"command": self.command, "version": __version__,
                    "config": self.cfg.as_dict(), "outputs": sorted(self.outputs + ["manifest.json"]),
                    "results": results}
        write_json(self.dir / "manifest.json", manifest, MANIFEST_SCHEMA)
        return manifest


# ---------------------------------------------------------------------------
# shared builders
# ---------------------------------------------------------------------------
def make_provider(cfg: RunConfig) -> BackgroundProvider:
    eos = GammaLaw(cfg.gamma)
    if cfg.background == "constant":
        return constant_background(eos)
    return perturbed_background(PerturbationSpec(cfg.epsilon, cfg.delta_exp), cfg.seed, eos,
                                t_max=max(2.0e3, 1.1 * cfg.t_end))


def make_table(cfg: RunConfig, provider: BackgroundProvider, t_end: float, order: int):
    return build_table(provider, order, t_end, cfg.step, step_max=cfg.step_max,
                       grading=cfg.grading)


def evolve_grid(cfg: RunConfig, table=None, delta: Optional[float] = None,
                nu: Optional[int] = None) -> tuple[AcousticalGrid, Any]:
    """Build the C0 table (unless given) and march the configured data."""
    provider = make_provider(cfg)
    if table is None:
        table = make_table(cfg, provider, cfg.t_end, max(cfg.order, cfg.N, cfg.commute + 1))
    u = np.linspace(0.0, cfg.u_star, (nu or cfg.nu) + 1)
    d = cfg.delta if delta is None else delta
    if cfg.initial == "constant-state":
        data = constant_state_data(provider, d, u)
        grid = march(data, provider, cfg.t_end, cfl=cfg.cfl, store_every=cfg.store_every)
    elif cfg.commute > 0:
        grid = march_commuted(table, d, cfg.commute, u, cfg.t_end, cfl=cfg.cfl,
                              store_every=cfg.store_every)
    else:
        data = build_taylor_data(table, d, cfg.N, u)
        grid = march(data, table, cfg.t_end, cfl=cfg.cfl, store_every=cfg.store_every)
    return grid, table


TOWER_NAMES = ("w", "wbar", "r", "kappa")
GRID_COLUMNS = ("t", "u", "w", "wbar", "r", "kappa_aux", "Lw", "Lwbar", "Lr", "Lkappa_aux")


def grid_columns(grid: AcousticalGrid) -> dict[str, np.ndarray]:
    """Long-format columns (one row per level and node)."""
    T, U = np.meshgrid(grid.t, grid.u, indexing="ij")
    out = {"t": T, "u": U}
    for name in GRID_COLUMNS[2:]:
        out[name] = getattr(grid, name)
    out["c"], out["v"], out["kappa"] = grid.c, grid.v, grid.kappa
    if grid.towers is not None:
        for name in TOWER_NAMES:
            for k in range(1, grid.towers[name].shape[1]):
                out[f"T{k}{name}"] = grid.towers[name][:, k]
                out[f"LT{k}{name}"] = grid.towers["L" + name][:, k]
    return out


def read_grid(run_dir: Path) -> AcousticalGrid:
    """Rebuild an :class:`AcousticalGrid` from an ``evolve`` output directory."""
    try:
        man = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise OutputFormatError(f"{run_dir}/manifest.json: {exc}") from None
    validate_json(man, MANIFEST_SCHEMA, run_dir / "manifest.json")
    if man["command"] != "evolve":
        raise OutputFormatError(f"{run_dir} holds a {man['command']!r} run, not 'evolve'")
    cols = read_csv(run_dir / "grid.csv")
    t = np.unique(cols["t"])
    u = np.unique(cols["u"])
    shape = (len(t), len(u))
    if len(cols["t"]) != shape[0] * shape[1]:
        raise OutputFormatError("grid.csv is not a full tensor grid")
    arr = {k: cols[k].reshape(shape) for k in GRID_COLUMNS[2:]}
    cfg = man["config"]
    towers = None
    K = int(cfg.get("commute", 0))
    if K > 0:
        base = {"w": "w", "wbar": "wbar", "r": "r", "kappa": "kappa_aux"}
        towers = {}
        for name in TOWER_NAMES:
            towers[name] = np.stack([arr[base[name]]] + [cols[f"T{k}{name}"].reshape(shape)
                                                         for k in range(1, K + 1)], axis=1)
            towers["L" + name] = np.stack(
                [arr["L" + base[name]]] + [cols[f"LT{k}{name}"].reshape(shape)
                                           for k in range(1, K + 1)], axis=1)
    return AcousticalGrid(t=t, u=u, gamma=float(cfg["gamma"]), t_singular=1.0,
                          info={"config": cfg}, towers=towers, **arr)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------
def cmd_riemann1d(cfg: RunConfig, args) -> dict:
    run = _Run("riemann1d", cfg, args.out)
    prob = PistonProblem(cfg.c1, cfg.vp, GammaLaw(cfg.gamma))
    fan = sample_fan(prob, cfg.n_samples)
    run.csv("fan.csv", fan)
    run.plot("fan.gp", "fan.csv", "xi", ["c", "v", "w", "wbar"])
    xi = fan["xi"]
    res = {"head": prob.head, "tail": prob.tail, "vacuum": prob.vacuum,
           "dv_dxi": float(np.mean(np.diff(fan["v"]) / np.diff(xi))) if len(xi) > 1 else None,
           "dc_dxi": float(np.mean(np.diff(fan["c"]) / np.diff(xi))) if len(xi) > 1 else None}
    return run.finish(res)


ORACLE_TIMES = (2.0, math.e, 10.0, 100.0)


def cmd_boundary(cfg: RunConfig, args) -> dict:
    run = _Run("boundary", cfg, args.out)
    provider = make_provider(cfg)
    t_end = args.t_end_table if args.t_end_table is not None else max(cfg.t_end, 100.0)
    table = make_table(cfg, provider, t_end, cfg.order)
    cols = {"t": table.t}
    cols.update({name: table[name] for name in table.names()})
    run.csv("boundary.csv", cols)
    ys = [f"T1wbar", "T0kappa"] + ([f"T2w", "T2wbar"] if cfg.order >= 2 else [])
    run.plot("boundary.gp", "boundary.csv", "t", ys, logx=True)
    res: dict[str, Any] = {"nodes": len(table.t), "t_end": float(table.t[-1]),
                           "consistency_defect": table.consistency_defect()}
    if cfg.background == "constant":
        eos = GammaLaw(cfg.gamma)
        errs = {}
        for q, col in QUANTITIES.items():
            if (col[1].isdigit() and int(col[1]) > cfg.order) or (q == "Tkappa" and cfg.order < 2):
                continue
            ts = np.array([x for x in ORACLE_TIMES if x <= table.t[-1]])
            exact = np.asarray(closed_form(q, ts, eos))
            num = table.at(ts, col)
            scale = np.maximum(np.abs(exact), 1e-300)
            errs[q] = float(np.max(np.where(exact == 0.0, np.abs(num), np.abs(num - exact) / scale)))
        res["oracle_max_rel_err"] = errs
        res["oracle_times"] = [x for x in ORACLE_TIMES if x <= table.t[-1]]
    near = make_table(dataclasses.replace(cfg, step=min(cfg.step, 1e-5), step_max=None),
                      provider, provider.t_singular + 0.1, cfg.order)
    fits = vanishing_orders(near, np.geomspace(1e-3, 2e-2, 40))
    res["vanishing_orders"] = {k: ("exact zero" if f.exact_zero else f.exponent)
                               for k, f in fits.items()}
    return run.finish(res)


def cmd_evolve(cfg: RunConfig, args) -> dict:
    run = _Run("evolve", cfg, args.out)
    grid, _ = evolve_grid(cfg)
    run.csv("grid.csv", grid_columns(grid))
    run.plot("grid.gp", "grid.csv", "t", ["w", "wbar", "kappa"])
    rep = residuals(grid)
    res = {"steps": grid.info["steps"], "levels": len(grid.t), "node1": grid.info["node1"],
           "residuals": rep.as_dict()}
    if cfg.initial == "constant-state":
        res["max_drift"] = float(max(np.max(np.abs(grid.w - grid.w[0])),
                                     np.max(np.abs(grid.wbar - grid.wbar[0]))))
    return run.finish(res)


def cmd_diagnose(cfg: RunConfig, args) -> dict:
    src = Path(args.run)
    if not src.is_absolute():
        src = output_root() / src
    grid = read_grid(src)
    gcfg = grid.info["config"]
    run = _Run("diagnose", cfg, args.out or str(src / "diagnose"))
    res: dict[str, Any] = {"source": str(args.run)}
    if args.residuals:
        res["residuals"] = residuals(grid).as_dict()
    if args.kappa:
        kg = kappa_growth(grid, t_min_run=args.kappa_min_t)
        res["kappa_growth"] = kg.as_dict()
    if args.energy:
        n = cfg.energy_order
        E = global_energy(grid, n, cfg.s) if args.energy == "global" else local_energy(grid, n)
        run.csv("energy.csv", {"t": E.t, "E": E.E})
        run.csv("flux.csv", {"u": E.u, "F": E.F})
        run.plot("energy.gp", "energy.csv", "t", ["E"], logx=True)
        res["energy"] = {"kind": args.energy, "n": n, "s": cfg.s, "fits": E.fits,
                         "max_flux": float(np.max(E.F)),
                         "decade_sups": decade_sups(E.t, E.E, 1.0 + float(gcfg.get("delta", 0.0)))}
    return run.finish(res)


def cmd_sweep(cfg: RunConfig, args) -> dict:
    run = _Run("sweep", cfg, args.out)
    if cfg.initial != "taylor":
        cfg = dataclasses.replace(cfg, initial="taylor")
    provider = make_provider(cfg)
    table = make_table(cfg, provider, cfg.t_end, max(cfg.order, cfg.N))
    if cfg.sweep == "delta":
        grids = [evolve_grid(cfg, table, delta=d)[0] for d in cfg.deltas]
        tab = delta_convergence(grids, list(cfg.deltas))
        run.csv("cauchy.csv", {"delta": tab.deltas[1:], "d": tab.d})
        run.plot("cauchy.gp", "cauchy.csv", "delta", ["d"], logx=True, logy=True)
        return run.finish({"delta_convergence": tab.as_dict()})
    grids = [evolve_grid(cfg, table, nu=cfg.nu * 2 ** i)[0] for i in range(cfg.levels)]
    orders = refinement_orders(grids)
    run.csv("refinement.csv", {"nu": [cfg.nu * 2 ** i for i in range(cfg.levels)],
                               **{f"l2_{k}": v for k, v in orders["norms"].items()}})
    run.plot("refinement.gp", "refinement.csv", "nu", ["l2_w", "l2_wbar", "l2_r"],
             logx=True, logy=True)
    return run.finish({"grid_refinement": orders})


VERIFY_TARGETS = ("all", "constant-oracle", "singular-series", "integral")


def _verify_constant_oracle(eos: GammaLaw) -> dict:
    checks = {}
    table = build_table(constant_background(eos), 2, 100.0, 1e-3)
    ts = np.array(ORACLE_TIMES)
    for q, col in QUANTITIES.items():
        exact = np.asarray(closed_form(q, ts, eos))
        num = table.at(ts, col)
        err = np.abs(num - exact) / np.maximum(np.abs(exact), 1.0)
        checks[f"closed_form/{q}"] = {"err": float(err.max()), "tol": 1e-6,
                                      "pass": bool(err.max() <= 1e-6)}
    deep = build_table(constant_background(eos), 4, 1.0e3, 1e-4, step_max=1e-2)
    for n in range(1, 5):
        for base, col in (("w", f"T{n}w"), ("wbar", f"T{n}wbar"), ("kappa", f"T{n - 1}kappa")):
            K = decay_type_of(n, base).fit_constant(deep.t, deep[col])
            checks[f"envelope/{col}"] = {"K": K, "pass": bool(math.isfinite(K))}
    return checks


def _verify_singular_series(eos: GammaLaw) -> dict:
    ser = singular_series(1, 3, N=3)
    got = [str(x) for x in ser.g[1:4]]
    ser14 = singular_series(1, eos.gamma, N=30)
    return {"singular_series/gamma3": {"values": got, "pass": got == ["-1/2", "0", "-1/8"]},
            f"singular_series/gamma{eos.gamma}": {
                "max_a": ser14.C_I, "bound": 2.0 * ser14.a[0] + 1.0,
                "pass": bool(ser14.C_I <= 2.0 * ser14.a[0] + 1.0)}}


def _verify_integral() -> dict:
    from scipy.integrate import quad
    worst = 0.0
    for a in range(1, 6):
        for b in range(0, 4):
            for t in ORACLE_TIMES:
                ref, _ = quad(lambda s: s ** -a * math.log(s) ** b, 1.0, t,
                              epsabs=1e-13, epsrel=1e-12, limit=200)
                worst = max(worst, abs(integrate_power_log(a, b, t) - ref))
    return {"integrate_power_log": {"err": worst, "tol": 1e-10, "pass": worst <= 1e-10}}


def cmd_verify(cfg: RunConfig, args) -> dict:
    run = _Run("verify", cfg, args.out)
    eos = GammaLaw(cfg.gamma)
    target = args.target
    checks: dict[str, dict] = {}
    if target in ("all", "constant-oracle"):
        checks.update(_verify_constant_oracle(eos))
    if target in ("all", "singular-series"):
        checks.update(_verify_singular_series(eos))
    if target in ("all", "integral"):
        checks.update(_verify_integral())
    man = run.finish({"target": target, "checks": checks})
    for name, c in checks.items():
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {name}")
    if not all(c["pass"] for c in checks.values()):
        raise VerificationError("one or more checks failed")
    return man


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------
def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--out", help="output directory under the output root")
    p.add_argument("--gamma", type=float)
    p.add_argument("--background", choices=("constant", "perturbed"))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta-exp", dest="delta_exp", type=float)
    p.add_argument("--seed", type=int)


def _evolve_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--order", type=int, help="C0 table order")
    p.add_argument("--step", type=float, help="C0 RK4 step near the singular time")
    p.add_argument("--step-max", dest="step_max", type=float)
    p.add_argument("--initial", choices=("constant-state", "taylor"))
    p.add_argument("--delta", type=float)
    p.add_argument("-N", dest="N", type=int)
    p.add_argument("--u-star", dest="u_star", type=float)
    p.add_argument("--nu", type=int)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--cfl", type=float)
    p.add_argument("--store-every", dest="store_every", type=int)
    p.add_argument("--commute", type=int, help="evolve T^k towers up to this k")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rarefaction", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("riemann1d", help="planar piston fan")
    _common(p)
    p.add_argument("--c1", type=float)
    p.add_argument("--vp", type=float)
    p.add_argument("--n", dest="n_samples", type=int)

    p = sub.add_parser("boundary", help="C0 transversal data")
    _common(p)
    p.add_argument("--order", type=int)
    p.add_argument("--step", type=float)
    p.add_argument("--step-max", dest="step_max", type=float)
    p.add_argument("--t-end", dest="t_end_table", type=float,
                   help="final time of the table (default max(evolve.t_end, 100))")

    p = sub.add_parser("evolve", help="march the rarefaction region")
    _common(p)
    _evolve_flags(p)

    p = sub.add_parser("diagnose", help="diagnostics of an evolve output")
    _common(p)
    p.add_argument("run", help="evolve output directory")
    p.add_argument("--kappa", action="store_true", help="fit kappa ~ alpha ln t")
    p.add_argument("--kappa-min-t", dest="kappa_min_t", type=float, default=100.0)
    p.add_argument("--energy", choices=("global", "local"))
    p.add_argument("--residuals", action="store_true")
    p.add_argument("-s", dest="s", type=float)
    p.add_argument("--energy-order", dest="energy_order", type=int)

    p = sub.add_parser("sweep", help="delta or grid convergence family")
    _common(p)
    _evolve_flags(p)
    p.add_argument("--kind", dest="sweep", choices=("delta", "grid"))
    p.add_argument("--deltas", type=float, nargs="+")
    p.add_argument("--levels", type=int)

    p = sub.add_parser("verify", help="closed-form self checks")
    _common(p)
    p.add_argument("target", nargs="?", default="all", choices=VERIFY_TARGETS)
    return ap


_NOT_CONFIG = {"command", "config", "out", "run", "kappa", "kappa_min_t", "energy",
               "residuals", "t_end_table", "target"}

COMMANDS = {"riemann1d": cmd_riemann1d, "boundary": cmd_boundary, "evolve": cmd_evolve,
            "diagnose": cmd_diagnose, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        man = COMMANDS[args.command](cfg, args)
    except (FoldError, CFLError, FloatingPointError, VacuumError, FanRegionError,
            RunTooShortError, VerificationError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, UnicodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{args.command}: wrote {len(man['outputs'])} files")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
