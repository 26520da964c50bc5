"""Table of the D2 factorization constant over several spectral points.

For each (l1, l2) prints the ratio spread, the measured constant, the
printed constant ``4 e^{-2 pi l2}`` and their quotient next to ``e^{4 pi l2}``.
"""

import argparse
import math

from todaq.wavefunc import factorization_check


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", default="0.3:0.7,0:0.5,-0.2:0.45,0.1:0.2,0.4:1.0")
    a = ap.parse_args()
    print(f"{'l1':>6} {'l2':>6} {'spread':>9} {'constant':>16} {'printed':>10} "
          f"{'quotient':>12} {'e^(4pi l2)':>12} {'half-order spread':>18}")
    for p in a.points.split(","):
        l1, l2 = (float(v) for v in p.split(":"))
        r = factorization_check(l1, l2)
        print(f"{l1:6.2f} {l2:6.2f} {r.spread:9.1e} {r.constant.real:16.9g} "
              f"{r.printed_constant.real:10.4g} {r.discrepancy.real:12.6g} "
              f"{math.exp(4 * math.pi * l2):12.6g} {r.printed_orders_spread:18.1e}")


if __name__ == "__main__":
    main()
