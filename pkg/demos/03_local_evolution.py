"""From the singular sphere into the rarefaction region.

Initial data on the slice ``t = 1 + delta`` are Taylor polynomials in the
acoustical coordinate ``u`` whose coefficients are the transversal data on
``C0``.  Marching them forward shows two things: right after the singular
time the sound speed is the planar fan, ``c = c0 - (gamma-1)/(gamma+1) u``,
and the solutions converge as ``delta -> 0``.
"""
import numpy as np

from rarefaction import (ConstantBackground, GammaLaw, PerturbationSpec, PerturbedBackground,
                         build_table, build_taylor_data, delta_convergence, march, residuals)
from rarefaction.evolution import default_u_star


def main() -> None:
    eos = GammaLaw(1.4)
    u = np.linspace(0.0, default_u_star(eos.gamma), 61)
    table = build_table(ConstantBackground(eos), 4, 1.5, step=1e-4)

    print("deviation from the planar fan at t = 1 + 2 delta:")
    for d in (1e-2, 5e-3, 2.5e-3):
        grid = march(build_taylor_data(table, d, 2, u), table, 1.0 + 2 * d)
        dev = np.max(np.abs(grid.c[-1] - (1.0 - eos.k * u)))
        print(f"  delta = {d:.2e}: max |c - (1 - k u)| = {dev:.3e} = {dev / (2 * d):.4f} x 2 delta")

    deltas = [1e-2 / 2 ** i for i in range(5)]
    runs = [march(build_taylor_data(table, d, 2, u), table, 1.5) for d in deltas]
    ct = delta_convergence(runs, deltas, t_star=1.5)
    print("\nsup differences between successive delta-halved runs on [1.01, 1.5]:")
    for dl, dd in zip(deltas[1:], ct.d):
        print(f"  delta = {dl:.2e}: {dd:.3e}")
    print("  ratios:", ", ".join(f"{r:.3f}" for r in ct.ratios))

    bg = PerturbedBackground(PerturbationSpec(1e-2, 0.1), seed=1, eos=eos)
    ptable = build_table(bg, 4, 3.0, step=1e-4)
    grid = march(build_taylor_data(ptable, 1e-2, 3, np.linspace(0, 0.1, 41)), ptable, 3.0)
    rep = residuals(grid)
    print("\nperturbed exterior, residuals of the transport laws (independent stencils):")
    print("  ", {k: f"{v:.1e}" for k, v in rep.max.items()},
          f"kappa discrepancy {rep.kappa_discrepancy:.1e}")


if __name__ == "__main__":
    main()
