"""Compare the D3 recursive quadrature with a crude Monte-Carlo estimate."""

import argparse

from todaq.wavefunc import monte_carlo_dn, psi_dn


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", default="0.2,0.5,0.4")
    ap.add_argument("--x", default="0.1,-0.2,0.3")
    ap.add_argument("--samples", type=int, default=2_000_000)
    a = ap.parse_args()
    lam = tuple(float(v) for v in a.lam.split(","))
    x = tuple(float(v) for v in a.x.split(","))
    w = psi_dn(3, lam, x)
    est, se = monte_carlo_dn(3, lam, x, samples=a.samples)
    print(f"quadrature  {w.value:.6f}  ({w.seconds:.1f} s, {w.nodes} nodes)")
    print(f"monte carlo {est:.6f} +- {se:.3f}")
    print(f"difference / stderr = {abs(est - w.value) / se:.2f}")


if __name__ == "__main__":
    main()
