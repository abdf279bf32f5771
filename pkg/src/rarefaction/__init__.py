"""Spherically symmetric centered rarefaction waves for the compressible Euler equations.

The package builds the rarefaction region issuing from a singular sphere in
the acoustical coordinates ``(t, u)``:

* :mod:`~rarefaction.core_state` - gamma law, Riemann invariants, frames, units.
* :mod:`~rarefaction.riemann1d` - the planar piston fan (the limiting pattern).
* :mod:`~rarefaction.background` - exterior solutions traced along the first cone ``C0``.
* :mod:`~rarefaction.boundary_data` - transversal derivatives on ``C0`` to any order.
* :mod:`~rarefaction.constant_oracle` - closed forms for the rest-state exterior.
* :mod:`~rarefaction.evolution` - Taylor data and the characteristic march.
* :mod:`~rarefaction.diagnostics` - energies, fluxes, kappa growth, convergence.
* :mod:`~rarefaction.cli` - the ``rarefaction`` command.
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

from .core_state import GammaLaw, FluidState, InvariantPair, FramePoint, VacuumError  # noqa: E402
from .riemann1d import PistonProblem, FanRegionError, fan_state, fan_invariants, sample_fan  # noqa: E402
from .background import (ConstantBackground, PerturbationSpec, PerturbedBackground,  # noqa: E402
                         constant_background, perturbed_background, integrate_C0)
from .boundary_data import (BoundaryDataTable, build_table, singular_series,  # noqa: E402
                            vanishing_orders)
from .constant_oracle import closed_form, integrate_power_log, decay_type_of  # noqa: E402
from .evolution import (AcousticalGrid, TaylorData, build_taylor_data, march,  # noqa: E402
                        residuals, FoldError, CFLError)
from .diagnostics import (energy, flux, global_energy, kappa_growth,  # noqa: E402
                          delta_convergence, energy_balance)

__all__ = [
    "GammaLaw", "FluidState", "InvariantPair", "FramePoint", "VacuumError",
    "PistonProblem", "FanRegionError", "fan_state", "fan_invariants", "sample_fan",
    "ConstantBackground", "PerturbationSpec", "PerturbedBackground", "constant_background",
    "perturbed_background", "integrate_C0",
    "BoundaryDataTable", "build_table", "singular_series", "vanishing_orders",
    "closed_form", "integrate_power_log", "decay_type_of",
    "AcousticalGrid", "TaylorData", "build_taylor_data", "march", "residuals",
    "FoldError", "CFLError",
    "energy", "flux", "global_energy", "kappa_growth", "delta_convergence", "energy_balance",
]
