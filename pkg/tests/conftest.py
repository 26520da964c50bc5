import sys
from fractions import Fraction
from pathlib import Path

import sympy as sp
from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from todaq.laurent import GaussianRational, LaurentPoly, PolyMatrix  # noqa: E402

settings.register_profile("default", deadline=None)
settings.load_profile("default")

VARS = ("X1", "X2", "Z1")

small_q = st.fractions(min_value=-4, max_value=4, max_denominator=3)
gauss = st.builds(GaussianRational, small_q, st.one_of(st.just(Fraction(0)), small_q))
monomial = st.dictionaries(st.sampled_from(VARS), st.integers(-2, 2).filter(bool), max_size=3).map(
    lambda d: tuple(sorted(d.items())))
laurent = st.dictionaries(monomial, gauss, max_size=4).map(LaurentPoly)


def matrices(n: int):
    return st.lists(st.lists(laurent.filter(lambda p: len(p) <= 2), min_size=n, max_size=n),
                    min_size=n, max_size=n).map(PolyMatrix)


SYMS = {v: sp.Symbol(v) for v in VARS + ("X3", "X4", "Z2", "Z3", "Z4", "U", "LAM")}


def to_sympy(p: LaurentPoly):
    """Independent oracle representation of a Laurent polynomial."""
    out = sp.Integer(0)
    for m, c in p.terms.items():
        coef = sp.Rational(int(c.re.numerator), int(c.re.denominator)) + sp.I * sp.Rational(
            int(c.im.numerator), int(c.im.denominator))
        term = coef
        for v, e in m:
            term *= SYMS.setdefault(v, sp.Symbol(v)) ** e
        out += term
    return sp.expand(out)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
