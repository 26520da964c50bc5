import json
from pathlib import Path

import pytest

from example_n4 import EXAMPLE_TYPOS, printed_L, printed_R, printed_Rstar
from todaq.cli import canonical_matrix
from todaq.kernels import H2Spec
from todaq.laurent import var
from todaq.lax import (LaxSpec, bound_twisted_a, build_L, build_R, build_Rstar,
                       char_hamiltonians, verify_det_identity, verify_factorization,
                       verify_MN_intertwining)

UNIT4 = {i: 1 for i in range(1, 6)}


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_factorization_paper_couplings(n):
    rep = verify_factorization(n)
    assert rep.passed, rep.residuals


def test_factorization_symbolic_couplings():
    assert verify_factorization(2, g=None).passed
    assert verify_factorization(3, g=None).passed


def test_factorization_detects_lax_coupling_mismatch():
    rep = verify_factorization(3, g_lax={1: 2, 2: 3, 3: 1, 4: 1})
    assert not rep.passed and rep.residuals


def _diff_entries(a, b):
    return {ij for ij in set(a.nonzero_entries()) | set(b.nonzero_entries()) if a[ij] != b[ij]}


def test_golden_R_and_Rstar_match_printed():
    assert not _diff_entries(build_R(4, UNIT4).m, printed_R())
    assert not _diff_entries(build_Rstar(4, UNIT4).m, printed_Rstar())


def test_golden_L_matches_printed_except_typos():
    Lx, _ = bound_twisted_a(4, UNIT4)
    assert _diff_entries(Lx, printed_L()) == EXAMPLE_TYPOS


def test_printed_L_typos_are_inconsistent_with_printed_factors():
    # the printed R R* reproduces the built L, not the printed entries
    prod = printed_R() * printed_Rstar()
    assert _diff_entries(prod, printed_L()) == EXAMPLE_TYPOS
    Lx, _ = bound_twisted_a(4, UNIT4)
    assert not _diff_entries(prod, Lx)


def test_built_example_regression():
    pinned = json.loads((Path(__file__).parent / "golden/example_n4_built.json").read_text())
    Lx, _ = bound_twisted_a(4, UNIT4)
    assert canonical_matrix(Lx) == pinned["L"]
    assert canonical_matrix(build_R(4, UNIT4).m) == pinned["R"]
    assert canonical_matrix(build_Rstar(4, UNIT4).m) == pinned["R*"]


@pytest.mark.parametrize("n", [2, 3])
def test_det_identity(n):
    assert verify_det_identity(n).passed


def test_det_identity_mutation_fails():
    assert not verify_det_identity(2, drop_term=0).passed


@pytest.mark.parametrize("n", [2, 3])
def test_MN_intertwining(n):
    assert verify_MN_intertwining(n).passed


@pytest.mark.parametrize("mut", ["M:corner-sign", "N:corner-sign"])
def test_MN_single_sign_mutation_fails(mut):
    rep = verify_MN_intertwining(2, mutate=mut)
    assert not rep.passed
    assert all(k.startswith(mut[0]) for k in rep.residuals)


def test_D2_quadratic_hamiltonian_from_char_poly():
    ch = char_hamiltonians(build_L(LaxSpec.make("D", 2)))
    p1, p2 = var("PX1"), var("PX2")
    V = H2Spec.make("D", 2).potential()
    assert ch.by_power[2] == -(p1 * p1 + p2 * p2) + V.scale(2)
    assert not ch.u_terms


def test_twisted_a_spectral_terms():
    ch = char_hamiltonians(build_L(LaxSpec.make("TwistedA", 2)))
    lam = var("LAM")
    g = [var(f"G{i}") for i in range(1, 4)]
    assert ch.u_terms[1] == lam
    assert ch.u_terms[-1] == (lam * g[0] * g[1] ** 2 * g[2]).scale(-16)


@pytest.mark.parametrize("family", ["D", "C", "TwistedA"])
def test_rank_below_two_rejected(family):
    with pytest.raises(ValueError):
        LaxSpec.make(family, 1)


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        LaxSpec.make("B", 3)
