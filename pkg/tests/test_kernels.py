import pytest

from todaq.kernels import (H2Spec, d_to_c_pair, d_to_cminus_pair, gamma_beta_pair,
                           printed_twisted_a_potential, twisted_a_pair,
                           verify_h2_intertwining, verify_recursive_intertwining)
from todaq.laurent import GaussianRational
from todaq.lax import coupling_limit_kernels

PAIRS = {
    "twisted-a": lambda n: twisted_a_pair(n),
    "d-to-c": d_to_c_pair,
    "d-to-cminus": lambda n: d_to_cminus_pair(n),
    "gamma-beta": lambda n: gamma_beta_pair(n),
}


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("kind", sorted(PAIRS))
def test_hbar_intertwining_symbolic(kind, n):
    F, left, right = PAIRS[kind](n)
    rep = verify_h2_intertwining(F, left, right)
    assert rep.passed, rep.residuals
    assert rep.notes[:2] == ["hbar^0: zero", "hbar^1: zero"]


def test_imaginary_phase_fails():
    F, left, right = twisted_a_pair(2)
    assert not verify_h2_intertwining(F, left, right, c=GaussianRational(0, 1)).passed


@pytest.mark.parametrize("k", [0, 1, 3])
def test_dropping_a_kernel_term_fails(k):
    F, left, right = d_to_c_pair(3)
    G = type(F)(tuple(t for i, t in enumerate(F.terms) if i != k % len(F.terms)), "mutant")
    assert not verify_h2_intertwining(G, left, right).passed


class _PrintedChain(H2Spec):
    def potential(self):
        return printed_twisted_a_potential(self.rank)


def test_printed_chain_indexing_breaks_intertwining():
    # chain couplings indexed g_i e^{x_{i+1}-x_i} are not intertwined by the kernel
    F, left, right = twisted_a_pair(3)
    printed = _PrintedChain("TwistedA", 3, left.couplings, "X")
    assert not verify_h2_intertwining(F, printed, right).passed


@pytest.mark.parametrize("k", [1, 2])
def test_recursive_kernel(k):
    rep = verify_recursive_intertwining(k)
    assert rep.passed, rep.residuals
    assert "LAM^2: zero" in rep.notes


def test_recursive_kernel_needs_counterterm():
    assert not verify_recursive_intertwining(1, counterterm=False).passed


def test_recursive_rejects_k0():
    with pytest.raises(ValueError):
        verify_recursive_intertwining(0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_coupling_limits(n):
    rep = coupling_limit_kernels(n)
    assert rep.passed, (rep.residuals, rep.notes)


def test_potential_d2():
    # e^{x2-x1} + e^{-x1-x2}
    V = H2Spec.make("D", 2).potential()
    assert V.text() == "+ 1 * X1^-1 X2^-1 + 1 * X1^-1 X2"
