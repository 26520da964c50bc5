"""Finite-difference check of the quadratic D3 eigen-equation on the recursive integral.

The node set is frozen at the center (truncation widened by one unit) so
the stencil differences see only smooth changes of the integrand. A wrong
eigenvalue is evaluated alongside as a control. Takes about 1.5 minutes.
"""

import argparse
import json
import math
import time

import numpy as np

from todaq.wavefunc import psi_dn

STENCIL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lam", default="0.2,0.5,0.4")
    ap.add_argument("--x", default="0.1,-0.2,0.3")
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--tol", type=float, default=1e-3)
    a = ap.parse_args()
    lam = tuple(float(v) for v in a.lam.split(","))
    x0 = np.array([float(v) for v in a.x.split(",")])
    t0 = time.perf_counter()
    center = psi_dn(3, lam, tuple(x0), tol=a.tol)
    plan = tuple((k, (T + 1.0, h)) for k, (T, h) in center.plan)
    f = lambda x: psi_dn(3, lam, tuple(x), plan=plan).value
    c = f(x0)
    lap = 0j
    for i in range(3):
        e = np.zeros(3)
        e[i] = a.h
        vals = np.array([f(x0 + k * e) for k in range(-2, 3)])
        lap += STENCIL @ vals / a.h ** 2
    x1, x2, x3 = x0
    V = math.exp(x2 - x1) + math.exp(x3 - x2) + math.exp(-x3 - x2)
    E = 0.5 * sum(l * l for l in lam)
    res = lambda E_: abs(-0.5 * lap + V * c - E_ * c) / abs(c)
    print(json.dumps({"lambda": lam, "x": list(x0), "value_re": c.real, "value_im": c.imag,
                      "eigenvalue": E, "residual": res(E), "control_eigenvalue": E + 0.5,
                      "control_residual": res(E + 0.5), "fd_step": a.h,
                      "seconds": round(time.perf_counter() - t0, 1)}))


if __name__ == "__main__":
    main()
