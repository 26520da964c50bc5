"""Lax matrices, factorization matrices and intertwiners, with exact checks.

Basis conventions
-----------------
``example``
    Twisted-A family. Rows ``1..n`` carry weights ``e_n, ..., e_1`` and rows
    ``n+1..2n`` carry ``-e_1, ..., -e_n``. The diagonal entry of a row is
    its weight paired with the momenta.
``half-swapped``
    C and D families. Rows ``1..n`` carry ``-e_1, ..., -e_n`` and rows
    ``n+1..2n`` carry ``e_n, ..., e_1``, so the special end of the Dynkin
    diagram sits in the central block. Same diagonal rule.

Momenta are ``p_x = dF/dx`` and ``p_z = -dF/dz``. The z-side twisted-A
matrix is the x-side builder evaluated at ``z'_k = -z_{n+1-k}``,
``p_{z'_k} = -p_{z_{n+1-k}}`` with reflected couplings ``g'_{n+2-i} = g_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Tuple, Union

from .kernels import (Coupling, GenFunc, f_d_to_c, f_d_to_cminus, f_gamma_beta,
                      f_twisted_a, gamma_beta, genfunc_grad, paper_couplings,
                      reflected_couplings, block_of)
from .laurent import LaurentPoly, PolyMatrix, const, determinant, substitute, var
from .reports import IdentityReport, couplings_text

LAMBDA = "LAM"
U = "U"


@dataclass(frozen=True)
class LaxSpec:
    """Family, rank and couplings of a Lax matrix.

    Attributes
    ----------
    family : {'TwistedA', 'C', 'D'}
    rank : int
    couplings : tuple of (index, LaurentPoly)
        TwistedA: ``g_1..g_{n+1}``; C/D: chain ``c_1..c_{n-1}`` and end ``c_n``.
        Missing entries default to 1 (C/D) or to the variables ``Gi`` (TwistedA).
    """

    family: str
    rank: int
    couplings: Tuple[Tuple[int, LaurentPoly], ...] = ()

    @classmethod
    def make(cls, family: str, rank: int,
             couplings: Optional[Mapping[int, Coupling]] = None) -> "LaxSpec":
        if family not in ("TwistedA", "C", "D"):
            raise ValueError(f"unknown family {family!r}")
        if rank < 2:
            raise ValueError("unsupported rank < 2")
        c = tuple(sorted((k, LaurentPoly.coerce(v)) for k, v in (couplings or {}).items()))
        return cls(family, rank, c)

    def coupling(self, i: int) -> LaurentPoly:
        d = dict(self.couplings)
        if i in d:
            return d[i]
        return var(f"G{i}") if self.family == "TwistedA" else const(1)


@dataclass(frozen=True)
class LaxMatrix:
    """A matrix together with its provenance."""

    spec: Optional[LaxSpec]
    m: PolyMatrix
    basis_convention: str
    label: str = ""

    def __getitem__(self, ij):
        return self.m[ij]

    @property
    def dim(self) -> int:
        return self.m.dim


# ----------------------------------------------------------------------------
# coordinate maps

@dataclass(frozen=True)
class Coords:
    """Exponentials, momenta and couplings used by a builder."""

    e: Callable[[int], LaurentPoly]
    p: Callable[[int], LaurentPoly]
    g: Callable[[int], LaurentPoly]


def x_coords(spec: LaxSpec, block: str = "X", mom: str = "PX") -> Coords:
    return Coords(lambda i: var(f"{block}{i}"), lambda i: var(f"{mom}{i}"), spec.coupling)


def reflected_coords(spec: LaxSpec, block: str = "Z", mom: str = "PZ") -> Coords:
    n = spec.rank
    return Coords(lambda i: var(f"{block}{n + 1 - i}", -1),
                  lambda i: -var(f"{mom}{n + 1 - i}"),
                  lambda i: spec.coupling(n + 2 - i))


# ----------------------------------------------------------------------------
# builders

def _twisted_a(n: int, c: Coords) -> PolyMatrix:
    u = var(U)
    e, p, g = c.e, c.p, c.g
    E: Dict[Tuple[int, int], LaurentPoly] = {}
    for k in range(1, n + 1):
        E[(k, k)] = p(n + 1 - k)
        E[(n + k, n + k)] = -p(k)
    for k in range(1, n):
        E[(k, k + 1)] = g(n + 1 - k) * e(n + 1 - k) * e(n - k) ** -1
        E[(n + k, n + k + 1)] = g(k + 1) * e(k + 1) * e(k) ** -1
    E[(n, n + 1)] = (g(1) * e(1) ** 2).scale(4)
    for i in range(1, 2 * n):
        E[(i + 1, i)] = const(-1)
    corner = (g(n) * g(n + 1) * (e(n) * e(n - 1)) ** -1 * u ** -1).scale(2)
    E[(1, 2 * n - 1)] = E[(2, 2 * n)] = u.scale(Fraction(-1, 2))
    E[(2 * n - 1, 1)] = E[(2 * n, 2)] = corner
    return PolyMatrix.from_entries(2 * n, E)


def _cd(family: str, n: int, c: Coords) -> PolyMatrix:
    e, p, g = c.e, c.p, c.g
    N = 2 * n
    E: Dict[Tuple[int, int], LaurentPoly] = {}
    for i in range(1, n + 1):
        E[(i, i)] = -p(i)
        E[(N + 1 - i, N + 1 - i)] = p(i)
    for i in range(1, n):
        q = g(i) * e(i + 1) * e(i) ** -1
        E[(i, i + 1)] = q
        E[(N - i, N + 1 - i)] = q
        E[(i + 1, i)] = const(-1)
        E[(N + 1 - i, N - i)] = const(-1)
    if family == "D":
        q = g(n) * (e(n) * e(n - 1)) ** -1
        E[(n - 1, n + 1)] = q
        E[(n, n + 2)] = q
        E[(n + 1, n - 1)] = const(-1)
        E[(n + 2, n)] = const(-1)
    else:
        E[(n, n + 1)] = (g(n) * e(n) ** -2).scale(2)
        E[(n + 1, n)] = const(-2)
    return PolyMatrix.from_entries(N, E)


def build_L(spec: LaxSpec, coords: Optional[Coords] = None, label: str = "") -> LaxMatrix:
    """Lax matrix in momentum variables.

    Parameters
    ----------
    spec : LaxSpec
    coords : Coords, optional
        Defaults to ``Xi``, ``PXi`` and the couplings of ``spec``.
    """
    c = coords or x_coords(spec)
    if spec.family == "TwistedA":
        return LaxMatrix(spec, _twisted_a(spec.rank, c), "example", label or "L")
    return LaxMatrix(spec, _cd(spec.family, spec.rank, c), "half-swapped", label or "L")


def build_L_z(spec: LaxSpec) -> LaxMatrix:
    """Twisted-A matrix on the z side (reflected coordinates and couplings)."""
    if spec.family != "TwistedA":
        raise ValueError("reflected builder is specific to the twisted family")
    return build_L(spec, reflected_coords(spec), "L(z)")


def _gmap(g: Optional[Mapping[int, Coupling]], i: int) -> LaurentPoly:
    return var(f"G{i}") if g is None else LaurentPoly.coerce(g[i])


def build_R(n: int, g: Optional[Mapping[int, Coupling]] = None) -> LaxMatrix:
    """Left factor of the twisted-A Lax matrix, ``L(x) = R R*``."""
    X = lambda i: var(f"X{i}")
    Z = lambda i: var(f"Z{i}")
    G = lambda i: _gmap(g, i)
    u = var(U)
    E: Dict[Tuple[int, int], LaurentPoly] = {}
    for k in range(1, n + 1):
        j = n + 1 - k
        E[(k, n + k)] = u * X(j) * Z(j) ** -1
        if k >= 2:
            E[(k, n + k - 1)] = -u
        E[(n + k, k)] = const(-1)
    for k in range(1, n):
        E[(n + k, k + 1)] = G(k + 1) * Z(k + 1) * X(k) ** -1
    E[(1, n)] = u.scale(Fraction(-1, 2))
    E[(n + 1, 2 * n)] = u.scale(Fraction(-1, 2))
    E[(n, 1)] = (G(1) * Z(1) * X(1)).scale(2)
    E[(2 * n, n + 1)] = (G(n + 1) * (Z(n) * X(n)) ** -1).scale(2)
    return LaxMatrix(None, PolyMatrix.from_entries(2 * n, E), "example", "R")


def build_Rstar(n: int, g: Optional[Mapping[int, Coupling]] = None) -> LaxMatrix:
    """Right factor of the twisted-A Lax matrix, ``L(z) = R* R``."""
    X = lambda i: var(f"X{i}")
    Z = lambda i: var(f"Z{i}")
    G = lambda i: _gmap(g, i)
    ui = var(U, -1)
    E: Dict[Tuple[int, int], LaurentPoly] = {}
    for k in range(1, n + 1):
        E[(k, n + k)] = X(k) * Z(k) ** -1
        if k >= 2:
            E[(k, n + k - 1)] = const(1)
        E[(n + k, k)] = ui
    for k in range(1, n):
        j = n + 1 - k
        E[(n + k, k + 1)] = ui * G(j) * Z(j) * X(j - 1) ** -1
    E[(1, n)] = const(Fraction(1, 2))
    E[(n + 1, 2 * n)] = const(Fraction(1, 2))
    E[(n, 1)] = (ui * G(n + 1) * (Z(n) * X(n)) ** -1).scale(2)
    E[(2 * n, n + 1)] = (ui * G(1) * Z(1) * X(1)).scale(2)
    return LaxMatrix(None, PolyMatrix.from_entries(2 * n, E), "example", "R*")


def build_M(n: int, mutate_corner: bool = False) -> LaxMatrix:
    """Intertwiner with ``M L^D(x) = L^C(z) M`` (unit couplings, half-swapped basis).

    ``mutate_corner`` flips the sign of ``M(n+1, n)``.
    """
    X = lambda i: var(f"X{i}")
    Z = lambda i: var(f"Z{i}")
    N = 2 * n
    E: Dict[Tuple[int, int], LaurentPoly] = {}
    for i in range(1, n + 1):
        E[(i, i)] = X(i) * Z(i) ** -1
        E[(N + 1 - i, N + 1 - i)] = const(1)
    for i in range(1, n):
        E[(i + 1, i)] = const(1)
        E[(N - i, N + 1 - i)] = Z(i + 1) * X(i) ** -1
    E[(n, n + 1)] = (X(n) * Z(n)) ** -1
    E[(n + 1, n)] = const(-1 if mutate_corner else 1)
    return LaxMatrix(None, PolyMatrix.from_entries(N, E), "half-swapped", "M")


def build_N(n: int, mutate_corner: bool = False) -> LaxMatrix:
    """Intertwiner with ``N L^D(x) = L^{C_{n-1}}(z) N``.

    ``N`` is ``(2n-2) x 2n``. It is stored padded to ``2n x 2n`` with two
    zero rows at the bottom; the target Lax matrix is padded to match.
    ``mutate_corner`` flips the sign of the central entry ``N(n, n)``.
    """
    X = lambda i: var(f"X{i}")
    Z = lambda i: var(f"Z{i}")
    E: Dict[Tuple[int, int], LaurentPoly] = {}
    for i in range(1, n):
        E[(i, i)] = const(1)
        E[(i, i + 1)] = X(i + 1) * Z(i) ** -1
        r = 2 * n - 1 - i
        E[(r, 2 * n - i)] = const(1)
        E[(r, 2 * n + 1 - i)] = Z(i) * X(i) ** -1
    E[(n - 1, n + 1)] = (X(n) * Z(n - 1)) ** -1
    E[(n, n)] = const(-1 if mutate_corner else 1)
    return LaxMatrix(None, PolyMatrix.from_entries(2 * n, E), "half-swapped", "N")


def pad(m: PolyMatrix, size: int) -> PolyMatrix:
    """Embed ``m`` in the top-left corner of a ``size x size`` zero matrix."""
    rows = [[m.entries[i][j] if i < m.dim and j < m.dim else LaurentPoly()
             for j in range(size)] for i in range(size)]
    return PolyMatrix(rows)


# ----------------------------------------------------------------------------
# momenta

def momenta_from_genfunc(F: GenFunc, side: str, block: Optional[str] = None,
                         mom: Optional[str] = None) -> Dict[str, LaurentPoly]:
    """Bindings ``PXi -> dF/dx_i`` (x-side) or ``PZi -> -dF/dz_i`` (z-side)."""
    if side not in ("x-side", "z-side"):
        raise ValueError("side must be 'x-side' or 'z-side'")
    block = block or ("X" if side == "x-side" else "Z")
    mom = mom or ("PX" if side == "x-side" else "PZ")
    sign = 1 if side == "x-side" else -1
    out = {}
    for v in F.block_vars(block):
        out[mom + v[len(block):]] = genfunc_grad(F, v).scale(sign)
    return out


def _bind(m: PolyMatrix, *bindings: Mapping[str, LaurentPoly]) -> PolyMatrix:
    b: Dict[str, LaurentPoly] = {}
    for x in bindings:
        b.update(x)
    return m.substitute(b)


# ----------------------------------------------------------------------------
# twisted-A checks

def _coupling_map(n: int, g: Optional[Mapping[int, Coupling]]) -> Dict[int, LaurentPoly]:
    return {i: _gmap(g, i) for i in range(1, n + 2)}


def bound_twisted_a(n: int, g: Optional[Mapping[int, Coupling]] = None,
                    F: Optional[GenFunc] = None,
                    g_lax: Optional[Mapping[int, Coupling]] = None) -> Tuple[PolyMatrix, PolyMatrix]:
    """``(L(x), L(z))`` after binding momenta to the twisted-A kernel.

    ``g_lax`` overrides the couplings of the Lax matrices only (mutation).
    """
    gg = _coupling_map(n, g)
    gl = _coupling_map(n, g_lax) if g_lax is not None else gg
    F = F or f_twisted_a(n, gg)
    spec = LaxSpec.make("TwistedA", n, gl)
    Lx = _bind(build_L(spec).m, momenta_from_genfunc(F, "x-side"))
    Lz = _bind(build_L_z(spec).m, momenta_from_genfunc(F, "z-side"))
    return Lx, Lz


def verify_factorization(n: int, g: Optional[Mapping[int, Coupling]] = "paper",
                         g_lax: Optional[Mapping[int, Coupling]] = None) -> IdentityReport:
    """``L(x) = R R*``, ``L(z) = R* R`` and the corollaries they imply.

    The implied intertwinings are ``L(x) R = R L(z)`` and
    ``R* L(x) = L(z) R*``; the ordering ``R L(x) = L(z) R`` is evaluated and
    recorded in the notes without affecting the verdict.

    Parameters
    ----------
    g : mapping or 'paper' or None
        Couplings; ``'paper'`` is ``g1 = 2``, others 1; ``None`` is symbolic.
    g_lax : mapping, optional
        Couplings used only inside the Lax matrices (negative control).
    """
    if isinstance(g, str):
        g = paper_couplings(n)
    gg = _coupling_map(n, g)
    R, Rs = build_R(n, gg).m, build_Rstar(n, gg).m
    Lx, Lz = bound_twisted_a(n, gg, g_lax=g_lax)
    rep = IdentityReport("factorization", n, couplings_text({f"g{i}": v for i, v in gg.items()}))
    if g_lax is not None:
        rep.couplings.update({f"lax-g{i}": str(v) for i, v in g_lax.items()})
    rep.add_matrix_residual("L(x)-RR*", Lx - R * Rs)
    rep.add_matrix_residual("L(z)-R*R", Lz - Rs * R)
    # corollaries implied by the two factorizations
    rep.add_matrix_residual("L(x)R-RL(z)", Lx * R - R * Lz)
    rep.add_matrix_residual("R*L(x)-L(z)R*", Rs * Lx - Lz * Rs)
    literal = R * Lx - Lz * R
    rep.notes.append("ordering R L(x) = L(z) R: " + ("holds" if literal.is_zero() else
                     f"does not hold ({len(literal.nonzero_entries())} nonzero entries)"))
    return rep


def char_poly(L: PolyMatrix) -> LaurentPoly:
    """``det(L - LAM * Id)``."""
    lam = var(LAMBDA)
    n = L.dim
    m = PolyMatrix([[L.entries[i][j] - (lam if i == j else 0) for j in range(n)] for i in range(n)])
    return determinant(m)


@dataclass
class CharHamiltonians:
    """Coefficients of the characteristic polynomial.

    Attributes
    ----------
    by_power : dict
        ``{k: coefficient of LAM^k}`` (u-independent part).
    u_terms : dict
        ``{j: coefficient of U^j}`` for ``j != 0``.
    """

    by_power: Dict[int, LaurentPoly]
    u_terms: Dict[int, LaurentPoly]

    def h(self, k: int, n: int) -> LaurentPoly:
        """``h_{2k}``: coefficient of ``LAM^{2n-2k}``."""
        return self.by_power.get(2 * n - 2 * k, LaurentPoly())


def char_hamiltonians(L: LaxMatrix) -> CharHamiltonians:
    """Split ``det(L - LAM)`` into powers of LAM, isolating U-dependent terms."""
    d = char_poly(L.m)
    by_u = d.coefficients_in(U)
    u0 = by_u.pop(0, LaurentPoly())
    return CharHamiltonians(u0.coefficients_in(LAMBDA), by_u)


def verify_det_identity(n: int, g: Optional[Mapping[int, Coupling]] = "paper",
                        drop_term: Optional[int] = None) -> IdentityReport:
    """``det(L(x) - LAM) = det(L(z) - LAM)`` with momenta from the twisted-A kernel.

    ``drop_term`` removes one term of ``dF/dx_1`` (negative control).
    """
    if isinstance(g, str):
        g = paper_couplings(n)
    gg = _coupling_map(n, g)
    F = f_twisted_a(n, gg)
    spec = LaxSpec.make("TwistedA", n, gg)
    bx = momenta_from_genfunc(F, "x-side")
    if drop_term is not None:
        items = bx["PX1"].sorted_terms()
        del items[drop_term % len(items)]
        bx["PX1"] = LaurentPoly(dict(items))
    Lx = _bind(build_L(spec).m, bx)
    Lz = _bind(build_L_z(spec).m, momenta_from_genfunc(F, "z-side"))
    rep = IdentityReport("det-identity", n, couplings_text({f"g{i}": v for i, v in gg.items()}))
    if drop_term is not None:
        rep.notes.append(f"mutation: dropped term {drop_term} of PX1")
    rep.add_residual("det(L(x)-LAM)-det(L(z)-LAM)", char_poly(Lx) - char_poly(Lz))
    return rep


# ----------------------------------------------------------------------------
# C/D intertwiners

def verify_MN_intertwining(n: int, mutate: Optional[str] = None) -> IdentityReport:
    """``M L^D(x) = L^C(z) M`` and ``N L^D(x) = L^{C_{n-1}}(z) N`` (unit couplings).

    Parameters
    ----------
    mutate : {'M:corner-sign', 'N:corner-sign'}, optional
    """
    rep = IdentityReport("MN-intertwining", n)
    if mutate:
        rep.notes.append(f"mutation: {mutate}")
    # M
    F = f_d_to_c(n)
    LD = _bind(build_L(LaxSpec.make("D", n)).m, momenta_from_genfunc(F, "x-side"))
    LC = _bind(build_L(LaxSpec.make("C", n), Coords(lambda i: var(f"Z{i}"), lambda i: var(f"PZ{i}"),
                                                     lambda i: const(1))).m,
               momenta_from_genfunc(F, "z-side"))
    M = build_M(n, mutate_corner=(mutate == "M:corner-sign")).m
    rep.add_matrix_residual("M", M * LD - LC * M)
    # N
    F = f_d_to_cminus(n, {i: 1 for i in range(1, n + 1)})
    LD = _bind(build_L(LaxSpec.make("D", n)).m, momenta_from_genfunc(F, "x-side"))
    if n - 1 >= 2:
        specC = LaxSpec.make("C", n - 1)
        LCm = build_L(specC, Coords(lambda i: var(f"Z{i}"), lambda i: var(f"PZ{i}"),
                                    lambda i: const(1))).m
    else:
        LCm = _c1_lax()
    LCm = _bind(LCm, momenta_from_genfunc(F, "z-side"))
    N = build_N(n, mutate_corner=(mutate == "N:corner-sign")).m
    rep.add_matrix_residual("N", N * LD - pad(LCm, 2 * n) * N)
    return rep


def _c1_lax() -> PolyMatrix:
    """Rank-one C Lax matrix in the half-swapped basis."""
    Z1, P1 = var("Z1"), var("PZ1")
    return PolyMatrix([[-P1, (Z1 ** -2).scale(2)], [-2, P1]])


# ----------------------------------------------------------------------------
# coupling limits

def coupling_limit_kernels(n: int) -> IdentityReport:
    """Limits ``g1 -> 0`` of the twisted-A kernel and ``g'1 -> 0`` of the gamma/beta kernel.

    Term sets (linear forms) must coincide exactly; coefficients are compared
    at unit couplings.
    """
    rep = IdentityReport("coupling-limits", n)
    # twisted-A -> D/C
    gsym = {i: var(f"G{i}") for i in range(1, n + 2)}
    lim = f_twisted_a(n, gsym).substitute_couplings({"G1": const(0)}).nonzero()
    target = f_d_to_c(n)
    if set(lim.term_set()) != set(target.term_set()):
        rep.passed = False
        rep.residuals["g1->0 term set"] = str(sorted(set(lim.term_set()) ^ set(target.term_set())))
    unit = {f"G{i}": const(1) for i in range(1, n + 2)}
    for f, c in lim.substitute_couplings(unit).term_set().items():
        rep.add_residual(f"g1->0 coefficient {f}", c - target.term_set()[f])
    # gamma/beta -> D/C_{n-1}, shifting z_{j+1} -> z_j
    gb = f_gamma_beta(n).substitute_couplings({"GP1": const(0)}).nonzero()
    def shift(f):
        return tuple(sorted(((f"Z{int(v[1:]) - 1}" if block_of(v) == "Z" else v), e) for v, e in f))
    shifted = GenFunc(tuple((c, shift(f)) for c, f in gb.terms
                            if all(v != "Z1" for v, _ in f)), "limit")
    decoupled = [f for _, f in gb.terms if any(v == "Z1" for v, _ in f)]
    if decoupled:
        rep.notes.append(f"terms still containing z1 after the limit: {decoupled}")
        rep.passed = False
    t2 = f_d_to_cminus(n)
    if set(shifted.term_set()) != set(t2.term_set()):
        rep.passed = False
        rep.residuals["g'1->0 term set"] = str(sorted(set(shifted.term_set()) ^ set(t2.term_set())))
    unit = {f"G{i}": const(1) for i in range(1, n + 1)}
    unit.update({f"GP{i}": const(1) for i in range(1, n + 1)})
    tt = t2.substitute_couplings(unit).term_set()
    for f, c in shifted.substitute_couplings(unit).term_set().items():
        if f in tt:
            rep.add_residual(f"g'1->0 coefficient {f}", c - tt[f])
    return rep
