"""Transversal derivatives on the first cone, for a rest-state exterior.

On the cone ``C0`` bounding the rarefaction, the transversal derivatives
``T^n w``, ``T^n wbar`` and ``T^(n-1) kappa`` solve linear ODEs in ``t``
that start at the singular sphere (``t = 1``).  For gas at rest the first
orders have closed forms; the table is checked against them, and the
behaviour near the singular time is measured.
"""
import numpy as np

from rarefaction import ConstantBackground, GammaLaw, build_table, closed_form, vanishing_orders
from rarefaction.constant_oracle import QUANTITIES, decay_type_of


def main() -> None:
    eos = GammaLaw(1.4)
    table = build_table(ConstantBackground(eos), 4, 100.0, step=1e-3)
    ts = np.array([2.0, np.e, 10.0, 100.0])
    print("table vs closed form at t =", ", ".join(f"{t:.3g}" for t in ts))
    for q, col in QUANTITIES.items():
        exact = closed_form(q, ts, eos)
        num = table.at(ts, col)
        print(f"  {q:7s} {np.array2string(num, precision=6)}  max |diff| "
              f"{np.max(np.abs(num - exact)):.1e}")

    print("\nlong-time envelopes t^-a ln^b t (smallest constant K on t >= 2):")
    for n in (2, 3, 4):
        for base, col in (("w", f"T{n}w"), ("wbar", f"T{n}wbar"), ("kappa", f"T{n - 1}kappa")):
            d = decay_type_of(n, base)
            K = d.fit_constant(table.t, table[col], t_min=2.0)
            print(f"  {col:8s} type (a={d.a}, b={d.b})  K = {K:.3f}")

    near = build_table(ConstantBackground(eos), 2, 1.1, step=1e-5)
    print("\nvanishing orders at the singular time (power of t - 1):")
    for name, fit in vanishing_orders(near, np.geomspace(1e-3, 2e-2, 40)).items():
        print(f"  {name:14s} {'identically zero' if fit.exact_zero else f'{fit.exponent:.3f}'}")


if __name__ == "__main__":
    main()
