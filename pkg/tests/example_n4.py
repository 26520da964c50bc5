"""Transcription of the printed n = 4 example (L after momentum binding, R, R*).

Notation: ``a_i = e^{x_i - z_i}``, ``d_0 = e^{x_1 + z_1}``,
``d_i = e^{z_{i+1} - x_i}`` for ``i = 1, 2, 3`` and ``d_4 = e^{-x_4 - z_4}``.
Entries are copied row by row; ``EXAMPLE_TYPOS`` lists the two L entries
whose printed form disagrees with ``R R*``.
"""

from fractions import Fraction

from todaq.laurent import LaurentPoly, PolyMatrix, const, var

X = lambda i: var(f"X{i}")
Z = lambda i: var(f"Z{i}")
u = var("U")
ui = var("U", -1)
half = const(Fraction(1, 2))


def a(i):
    return X(i) * Z(i) ** -1


def d(i):
    if i == 0:
        return X(1) * Z(1)
    if i == 4:
        return (X(4) * Z(4)) ** -1
    return Z(i + 1) * X(i) ** -1


def _m(rows):
    return PolyMatrix([[LaurentPoly.coerce(e) for e in r] for r in rows])


def printed_L() -> PolyMatrix:
    o = 0
    c = (ui * d(3) * d(4)).scale(2)
    return _m([
        [a(4) - d(4), a(4) * d(3), o, o, o, o, -u * half, o],
        [-1, a(3) - d(3), a(3) * d(2), o, o, o, o, -u * half],
        [o, -1, a(2) - d(2), a(2) * d(1), o, o, o, o],
        [o, o, -1, a(1) + d(0) - d(1), (a(1) * d(0)).scale(2), o, o, o],
        [o, o, o, -1, -a(1) - d(0) + d(1), (a(2) * d(1)).scale(2), o, o],
        [o, o, o, o, -1, -a(2) + d(2), a(3) * d(2), o],
        [c, o, o, o, o, -1, -a(3) + d(3), a(4) * d(3)],
        [o, c, o, o, o, o, -1, -a(4) + d(4)],
    ])


def printed_R() -> PolyMatrix:
    o = 0
    return _m([
        [o, o, o, -u * half, u * a(4), o, o, o],
        [o, o, o, o, -u, u * a(3), o, o],
        [o, o, o, o, o, -u, u * a(2), o],
        [(X(1) * Z(1)).scale(2), o, o, o, o, o, -u, u * a(1)],
        [-1, Z(2) * X(1) ** -1, o, o, o, o, o, -u * half],
        [o, -1, Z(3) * X(2) ** -1, o, o, o, o, o],
        [o, o, -1, Z(4) * X(3) ** -1, o, o, o, o],
        [o, o, o, -1, ((Z(4) * X(4)) ** -1).scale(2), o, o, o],
    ])


def printed_Rstar() -> PolyMatrix:
    o = 0
    return _m([
        [o, o, o, half, a(1), o, o, o],
        [o, o, o, o, 1, a(2), o, o],
        [o, o, o, o, o, 1, a(3), o],
        [(ui * (Z(4) * X(4)) ** -1).scale(2), o, o, o, o, o, 1, a(4)],
        [ui, ui * Z(4) * X(3) ** -1, o, o, o, o, o, half],
        [o, ui, ui * Z(3) * X(2) ** -1, o, o, o, o, o],
        [o, o, ui, ui * Z(2) * X(1) ** -1, o, o, o, o],
        [o, o, o, ui, (ui * X(1) * Z(1)).scale(2), o, o, o],
    ])


EXAMPLE_TYPOS = {(4, 5), (5, 6)}
