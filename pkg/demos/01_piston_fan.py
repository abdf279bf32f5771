"""The planar piston fan: the pattern every spherical wave reduces to near its centre.

A piston withdrawn at speed ``vp`` from gas at rest with sound speed ``c1``
opens a centered rarefaction.  Inside the fan ``xi = x/t`` the sound speed
and velocity are linear in ``xi``, and the outgoing invariant ``w`` is
constant.  Run with ``python demos/01_piston_fan.py``.
"""
import numpy as np

from rarefaction import GammaLaw, PistonProblem, sample_fan
from rarefaction.core_state import characteristic_speeds, FluidState


def main() -> None:
    eos = GammaLaw(1.4)
    prob = PistonProblem(c1=1.0, vp=1.0, eos=eos)
    print(f"fan occupies {prob.head:.3f} <= x/t <= {prob.tail:.3f}; vacuum: {prob.vacuum}")
    fan = sample_fan(prob, 6)
    print(f"{'xi':>7} {'c':>8} {'v':>8} {'w':>8} {'wbar':>8} {'v+c':>8}")
    for xi, c, v, w, wb in zip(fan["xi"], fan["c"], fan["v"], fan["w"], fan["wbar"]):
        lam, _ = characteristic_speeds(FluidState(c, v))
        print(f"{xi:7.3f} {c:8.4f} {v:8.4f} {w:8.4f} {wb:8.4f} {lam:8.4f}")
    # the outgoing characteristic speed equals xi: the fan is centered
    lam = fan["v"] + fan["c"]
    print("max |(v + c) - xi| =", float(np.max(np.abs(lam - fan["xi"]))))
    print(f"dc/dxi = {np.polyfit(fan['xi'], fan['c'], 1)[0]:.6f}  "
          f"(gamma-1)/(gamma+1) = {eos.k:.6f}")
    fast = PistonProblem(c1=1.0, vp=6.0, eos=eos)
    print(f"vp = 6 exceeds the escape speed 2 c1/(gamma-1) = 5: vacuum = {fast.vacuum}")


if __name__ == "__main__":
    main()
