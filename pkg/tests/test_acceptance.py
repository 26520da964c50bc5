"""One test per acceptance criterion; each prints a PASS/FAIL line with the measured values."""

import math
import time

from acceptance_log import LINES as ACCEPTANCE_LINES
from example_n4 import printed_L, printed_R, printed_Rstar
from todaq.kernels import (d_to_c_pair, d_to_cminus_pair, gamma_beta_pair, twisted_a_pair,
                           verify_h2_intertwining, verify_recursive_intertwining)
from todaq.lax import (bound_twisted_a, build_R, build_Rstar, verify_det_identity,
                       verify_factorization, verify_MN_intertwining)
from todaq.wavefunc import (chi_a1_report, eigen_residual, factorization_check, psi_d2, psi_dn)


def report(k: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_factorization():
    t0 = time.perf_counter()
    reps = {n: verify_factorization(n) for n in (2, 3, 4, 5)}
    dt = time.perf_counter() - t0
    bad = {n: len(r.residuals) for n, r in reps.items() if not r.passed}
    report(1, not bad and dt <= 30,
           f"L(x)-RR* and L(z)-R*R vanish for n=2..5 at g1=2 (failing ranks {bad or 'none'}), {dt:.2f} s")


def test_criterion_02_golden_example():
    unit = {i: 1 for i in range(1, 6)}
    Lx, _ = bound_twisted_a(4, unit)
    built = {"L": Lx, "R": build_R(4, unit).m, "R*": build_Rstar(4, unit).m}
    printed = {"L": printed_L(), "R": printed_R(), "R*": printed_Rstar()}
    diffs = []
    for name in built:
        a, b = built[name], printed[name]
        for ij in sorted(set(a.nonzero_entries()) | set(b.nonzero_entries())):
            if a[ij] != b[ij]:
                diffs.append(f"{name}{list(ij)} built '{a[ij].text()}' printed '{b[ij].text()}'")
    total = sum(len(m.nonzero_entries()) for m in printed.values())
    report(2, not diffs, f"{total - len(diffs)}/{total} printed entries reproduced; mismatches: "
           + ("; ".join(diffs) if diffs else "none")
           + " (printed R R* equals the built L, so the printed L entries are inconsistent)")


def test_criterion_03_det_identity():
    t0 = time.perf_counter()
    reps = {n: verify_det_identity(n) for n in (2, 3, 4)}
    dt = time.perf_counter() - t0
    bad = [n for n, r in reps.items() if not r.passed]
    report(3, not bad and dt <= 60, f"det(L(x)-lam)-det(L(z)-lam)=0 for n=2,3,4 (failing {bad or 'none'}), {dt:.2f} s")


def test_criterion_04_kernel_intertwining():
    pairs = {"twisted-A": twisted_a_pair, "D->C": d_to_c_pair,
             "D->C(n-1)": d_to_cminus_pair, "gamma/beta": gamma_beta_pair}
    bad = []
    for name, make in pairs.items():
        for n in (2, 3, 4):
            rep = verify_h2_intertwining(*make(n))
            if not rep.passed:
                bad.append(f"{name} n={n}: {sorted(rep.residuals)}")
    report(4, not bad, f"hbar^0 and hbar^1 residuals zero for 4 kernels x n=2,3,4 with symbolic couplings "
           f"(failures: {bad or 'none'})")


def test_criterion_05_MN():
    ok = {n: verify_MN_intertwining(n).passed for n in (2, 3)}
    mut = {(m, n): verify_MN_intertwining(n, m).passed
           for m in ("M:corner-sign", "N:corner-sign") for n in (2, 3)}
    report(5, all(ok.values()) and not any(mut.values()),
           f"M/N residuals zero for n=2,3: {ok}; corner-sign mutants pass: {sum(mut.values())}/4")


def test_criterion_06_recursive():
    reps = {k: verify_recursive_intertwining(k) for k in (1, 2)}
    neg = verify_recursive_intertwining(1, counterterm=False)
    ok = all(r.passed for r in reps.values())
    notes = {k: [n for n in r.notes if n.startswith("LAM")] for k, r in reps.items()}
    report(6, ok and not neg.passed, f"LAM-graded residual zero for k=1,2 {notes}; "
           f"without divergence term: {'fails' if not neg.passed else 'passes'}")


def test_criterion_07_a1():
    parts, ok, worst_t = [], True, 0.0
    for nu in (0.25, 0.5, 1.0):
        t0 = time.perf_counter()
        rep = chi_a1_report(nu, (-1.0, 0.0, 1.0), tol=1e-8)
        worst_t = max(worst_t, (time.perf_counter() - t0) / 3)
        ok &= rep.passed
        parts.append(f"nu={nu}: spread {rep.spread:.1e}, ratio {rep.constant.real:+.12f}{rep.constant.imag:+.1e}i")
    report(7, ok and worst_t <= 1.0, "; ".join(parts)
           + f"; printed ratio is +1, measured constant is -1 (fixed sign discrepancy); "
             f"max {worst_t:.3f} s per point")


def test_criterion_08_d2_factorization():
    t0 = time.perf_counter()
    rep = factorization_check(0.3, 0.7)
    dt = time.perf_counter() - t0
    report(8, rep.passed and dt <= 300,
           f"ratio spread {rep.spread:.1e} (tol 1e-6) with orders i(l2+l1), i(l2-l1); "
           f"constant {rep.constant.real:.11f}{rep.constant.imag:+.1e}i vs printed 4e^(-2pi l2) = "
           f"{rep.printed_constant.real:.6f} (after dividing by Gamma(2i l2)); discrepancy "
           f"{rep.discrepancy.real:.4f} = e^(4pi l2) = {math.exp(4 * math.pi * 0.7):.4f}; "
           f"printed half orders give spread {rep.printed_orders_spread:.1e}; {dt:.1f} s")


def test_criterion_09_eigen_residuals():
    t0 = time.perf_counter()
    q = eigen_residual("quadratic", (0.3, 0.7), (0.1, -0.2))
    h4 = eigen_residual("quartic", (0.3, 0.7), (0.1, -0.2))
    dt = time.perf_counter() - t0
    report(9, q.residual <= 1e-5 and h4.residual <= 1e-4 and dt <= 600,
           f"quadratic residual {q.residual:.1e} (E={q.eigenvalue}, h={q.fd_step}); "
           f"quartic residual {h4.residual:.1e} (E={h4.eigenvalue:.6g}, h={h4.fd_step}); {dt:.1f} s")


def test_criterion_10_consistency():
    lam, x = (0.3, 0.7), (0.2, -0.1)
    a = psi_dn(2, lam, x).value
    b = psi_d2(*lam, *x).value
    c = psi_d2(*lam, *x, form="threeD").value
    d1, d2 = abs(a - b) / abs(b), abs(c - b) / abs(b)
    report(10, d1 <= 1e-5 and d2 <= 1e-6,
           f"recursion vs direct D2 {d1:.1e} (tol 1e-5); twoD vs threeD {d2:.1e} (tol 1e-6)")
