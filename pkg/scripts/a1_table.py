"""Ratio of the A1 contour formula to K_{2i nu}(2 e^y) over a (nu, y) grid."""

import argparse

import numpy as np

from todaq.wavefunc import chi_a1_report


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nu", default="0,0.25,0.5,1,2")
    ap.add_argument("--y", default="-1.5,-1,0,1,1.5")
    a = ap.parse_args()
    ys = [float(v) for v in a.y.split(",")]
    print(f"{'nu':>6} {'spread':>9} {'mean ratio':>26}")
    for nu in (float(v) for v in a.nu.split(",")):
        r = chi_a1_report(nu, ys)
        print(f"{nu:6.2f} {r.spread:9.1e} {r.constant.real:+.12f}{r.constant.imag:+.1e}i")


if __name__ == "__main__":
    main()
