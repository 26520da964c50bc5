"""Exact multivariate Laurent polynomials over the Gaussian rationals.

Variables are short string ids. By convention ``Xi``, ``Zi``, ``Wi`` and ``Y``
stand for the exponentials ``e^{x_i}``, ``e^{z_i}``, ``e^{w_i}`` and ``e^{y}``,
``PXi``/``PZi`` for momenta, ``Gi``/``GPi`` for couplings, and ``U``, ``LAM``,
``HBAR`` for the spectral parameter, the characteristic-polynomial variable
and Planck's constant.

All values are immutable; every operation returns a new object.
"""

from __future__ import annotations

import heapq
from fractions import Fraction

from gmpy2 import mpq as _Q
from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple, Union

__all__ = [
    "GaussianRational",
    "Monomial",
    "LaurentPoly",
    "PolyMatrix",
    "RationalExpr",
    "FractionFieldRequired",
    "poly_arith",
    "substitute",
    "determinant",
    "cofactor_determinant",
    "var",
    "const",
    "I",
]

Number = Union[int, Fraction, "GaussianRational"]


class FractionFieldRequired(ValueError):
    """Raised when a substitution would need division by a non-monomial."""


class GaussianRational:
    """Exact complex rational ``re + i*im``.

    Parameters
    ----------
    re, im : int or Fraction
        Real and imaginary parts, stored as GMP rationals in lowest terms.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction] = 0, im: Union[int, Fraction] = 0):
        self.re = re if type(re) is _Q else _Q(re)
        self.im = im if type(im) is _Q else _Q(im)

    @staticmethod
    def coerce(x: Number) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction, type(_Q()))):
            return GaussianRational(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussianRational")

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def __add__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GaussianRational.coerce(o) - self

    def __mul__(self, o):
        o = GaussianRational.coerce(o)
        if not self.im and not o.im:
            return GaussianRational(self.re * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __truediv__(self, o):
        o = GaussianRational.coerce(o)
        n = o.re * o.re + o.im * o.im
        if not n:
            raise ZeroDivisionError("GaussianRational division by zero")
        p = self * o.conjugate()
        return GaussianRational(p.re / n, p.im / n)

    def __rtruediv__(self, o):
        return GaussianRational.coerce(o) / self

    def __eq__(self, o):
        if isinstance(o, (int, Fraction, type(_Q()))):
            return not self.im and self.re == o
        if isinstance(o, GaussianRational):
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def text(self) -> str:
        """Unsigned-magnitude-free text, e.g. ``3``, ``-1/2``, ``(1+2i)``."""
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


I = GaussianRational(0, 1)
_ONE = GaussianRational(1)


# A monomial is a tuple of (variable, nonzero exponent) pairs sorted by variable.
Monomial = Tuple[Tuple[str, int], ...]
_UNIT: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        s = d.get(v, 0) + e
        if s:
            d[v] = s
        else:
            del d[v]
    return tuple(sorted(d.items()))


def _mono_inv(a: Monomial) -> Monomial:
    return tuple((v, -e) for v, e in a)


def _mono_text(m: Monomial) -> str:
    return " ".join(v if e == 1 else f"{v}^{e}" for v, e in m)


class LaurentPoly:
    """Sparse Laurent polynomial with Gaussian-rational coefficients.

    Parameters
    ----------
    terms : mapping Monomial -> coefficient, optional
        Zero coefficients are dropped.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        t: Dict[Monomial, GaussianRational] = {}
        if terms:
            for m, c in terms.items():
                c = GaussianRational.coerce(c)
                if not c.is_zero():
                    t[m] = c
        self.terms = t
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, GaussianRational]) -> "LaurentPoly":
        p = cls.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    # constructors
    @classmethod
    def constant(cls, c: Number) -> "LaurentPoly":
        return cls({_UNIT: c})

    @classmethod
    def monomial(cls, exps: Mapping[str, int] | Iterable[Tuple[str, int]], c: Number = 1) -> "LaurentPoly":
        items = exps.items() if isinstance(exps, Mapping) else exps
        d: Dict[str, int] = {}
        for v, e in items:
            d[v] = d.get(v, 0) + e
        m = tuple(sorted((v, e) for v, e in d.items() if e))
        return cls({m: c})

    @staticmethod
    def coerce(x) -> "LaurentPoly":
        if isinstance(x, LaurentPoly):
            return x
        return LaurentPoly.constant(x)

    # predicates
    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def __len__(self):
        return len(self.terms)

    # arithmetic
    def __add__(self, o):
        o = LaurentPoly.coerce(o)
        if len(o.terms) > len(self.terms):
            a, b = o.terms, self.terms
        else:
            a, b = self.terms, o.terms
        t = dict(a)
        for m, c in b.items():
            s = t.get(m)
            if s is None:
                t[m] = c
            else:
                s = s + c
                if s.is_zero():
                    del t[m]
                else:
                    t[m] = s
        return LaurentPoly._raw(t)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-LaurentPoly.coerce(o))

    def __rsub__(self, o):
        return LaurentPoly.coerce(o) - self

    def __mul__(self, o):
        o = LaurentPoly.coerce(o)
        if not self.terms or not o.terms:
            return LaurentPoly._raw({})
        t: Dict[Monomial, GaussianRational] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                s = t.get(m)
                t[m] = c if s is None else s + c
        return LaurentPoly._raw({m: c for m, c in t.items() if not c.is_zero()})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse_monomial() ** (-k)
        r = LaurentPoly.constant(1)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    def inverse_monomial(self) -> "LaurentPoly":
        """Inverse of a single-term polynomial."""
        if len(self.terms) != 1:
            raise FractionFieldRequired("requires fraction field: inverse of a non-monomial")
        (m, c), = self.terms.items()
        return LaurentPoly._raw({_mono_inv(m): _ONE / c})

    def scale(self, c: Number) -> "LaurentPoly":
        c = GaussianRational.coerce(c)
        if c.is_zero():
            return LaurentPoly._raw({})
        return LaurentPoly._raw({m: v * c for m, v in self.terms.items()})

    def __eq__(self, o):
        if not isinstance(o, LaurentPoly):
            try:
                o = LaurentPoly.coerce(o)
            except TypeError:
                return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # calculus on exponential variables
    def log_derivative(self, v: str) -> "LaurentPoly":
        """Derivative with respect to ``log v`` (i.e. ``d/dx`` when ``v = e^x``)."""
        t = {}
        for m, c in self.terms.items():
            e = dict(m).get(v, 0)
            if e:
                t[m] = c * e
        return LaurentPoly._raw(t)

    def coefficients_in(self, v: str) -> Dict[int, "LaurentPoly"]:
        """Split by the exponent of ``v``: ``{k: coefficient of v^k}``."""
        out: Dict[int, Dict[Monomial, GaussianRational]] = {}
        for m, c in self.terms.items():
            e = 0
            rest = []
            for w, k in m:
                if w == v:
                    e = k
                else:
                    rest.append((w, k))
            out.setdefault(e, {})[tuple(rest)] = c
        return {k: LaurentPoly._raw(t) for k, t in out.items()}

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        """Numeric value at a point (floating point)."""
        s = 0j
        for m, c in self.terms.items():
            x = complex(c)
            for v, e in m:
                x *= values[v] ** e
            s += x
        return s

    def conjugate_coefficients(self) -> "LaurentPoly":
        return LaurentPoly._raw({m: c.conjugate() for m, c in self.terms.items()})

    # serialization
    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: mc[0])

    def text(self) -> str:
        """Canonical text: terms in monomial order, explicit signs."""
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            if c.is_real():
                sign = "-" if c.re < 0 else "+"
                mag = str(abs(c.re))
            else:
                sign, mag = "+", c.text()
            parts.append(f"{sign} {mag}" + (f" * {_mono_text(m)}" if m else ""))
        return " ".join(parts)

    __str__ = text

    def __repr__(self):
        return f"LaurentPoly({self.text()!r})"


def var(name: str, power: int = 1) -> LaurentPoly:
    """The polynomial ``name^power``."""
    return LaurentPoly.monomial({name: power})


def const(c: Number) -> LaurentPoly:
    return LaurentPoly.constant(c)


def poly_arith(a: LaurentPoly, b: LaurentPoly, op: str) -> LaurentPoly:
    """Apply ``op`` in {'add', 'sub', 'mul'} to two polynomials."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def substitute(p: LaurentPoly, bindings: Mapping[str, LaurentPoly]) -> LaurentPoly:
    """Ring homomorphism sending each bound variable to its image.

    Raises
    ------
    FractionFieldRequired
        If a variable occurring with a negative exponent is bound to a
        non-monomial.
    """
    cache: Dict[Tuple[str, int], LaurentPoly] = {}

    def power(v: str, e: int) -> LaurentPoly:
        key = (v, e)
        r = cache.get(key)
        if r is None:
            b = LaurentPoly.coerce(bindings[v])
            if e < 0 and not b.is_monomial():
                raise FractionFieldRequired(
                    f"requires fraction field: {v}^{e} bound to a non-monomial")
            r = b ** e
            cache[key] = r
        return r

    out = LaurentPoly._raw({})
    for m, c in p.terms.items():
        free = []
        term = None
        for v, e in m:
            if v in bindings:
                f = power(v, e)
                term = f if term is None else term * f
            else:
                free.append((v, e))
        base = LaurentPoly._raw({tuple(free): c})
        out = out + (base if term is None else base * term)
    return out


# exact division in the Laurent ring, lex order on dense exponent vectors
def _lex_key(m: Monomial, order: Sequence[str]) -> Tuple[int, ...]:
    d = dict(m)
    return tuple(d.get(v, 0) for v in order)


def exact_divide(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Quotient ``a / b`` when ``b`` divides ``a`` exactly.

    Raises
    ------
    ArithmeticError
        If the division is not exact.
    ZeroDivisionError
        If ``b`` is zero.
    """
    if b.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if a.is_zero():
        return a
    if b.is_monomial():
        return a * b.inverse_monomial()
    order = sorted(a.variables() | b.variables())
    keys: Dict[Monomial, Tuple[int, ...]] = {}

    def key(m: Monomial) -> Tuple[int, ...]:
        k = keys.get(m)
        if k is None:
            k = keys[m] = _lex_key(m, order)
        return k

    bt = sorted(b.terms.items(), key=lambda mc: key(mc[0]), reverse=True)
    lm_b, lc_b = bt[0]
    low_b = bt[-1][0]
    low_a = min(a.terms, key=key)
    floor = key(_mono_mul(low_a, _mono_inv(low_b)))
    inv_lm = _mono_inv(lm_b)
    inv_lc = _ONE / lc_b
    r = dict(a.terms)
    heap = [(tuple(-x for x in key(m)), m) for m in r]
    heapq.heapify(heap)
    q: Dict[Monomial, GaussianRational] = {}
    while heap:
        _, lm = heapq.heappop(heap)
        c0 = r.get(lm)
        if c0 is None:
            continue
        qm = _mono_mul(lm, inv_lm)
        if key(qm) < floor:
            raise ArithmeticError("polynomial division is not exact")
        qc = c0 * inv_lc
        q[qm] = qc
        for m, c in bt:
            mm = _mono_mul(m, qm)
            s = r.get(mm)
            if s is None:
                r[mm] = -(c * qc)
                heapq.heappush(heap, (tuple(-x for x in key(mm)), mm))
            else:
                v = s - c * qc
                if v.is_zero():
                    del r[mm]
                else:
                    r[mm] = v
    return LaurentPoly._raw(q)


class PolyMatrix:
    """Dense square matrix of Laurent polynomials.

    Parameters
    ----------
    entries : sequence of sequences
        Row-major entries; scalars are promoted.
    """

    __slots__ = ("dim", "entries")

    def __init__(self, entries: Sequence[Sequence]):
        rows = [tuple(LaurentPoly.coerce(x) for x in r) for r in entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("PolyMatrix must be square and non-empty")
        self.dim = n
        self.entries = tuple(rows)

    @classmethod
    def zeros(cls, n: int) -> "PolyMatrix":
        z = LaurentPoly()
        return cls([[z] * n for _ in range(n)])

    @classmethod
    def identity(cls, n: int) -> "PolyMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_entries(cls, n: int, entries: Mapping[Tuple[int, int], object]) -> "PolyMatrix":
        """Build from a ``{(row, col): value}`` map with 1-based indices."""
        rows = [[LaurentPoly() for _ in range(n)] for _ in range(n)]
        for (i, j), v in entries.items():
            if not (1 <= i <= n and 1 <= j <= n):
                raise IndexError(f"entry ({i},{j}) outside {n}x{n}")
            rows[i - 1][j - 1] = rows[i - 1][j - 1] + LaurentPoly.coerce(v)
        return cls(rows)

    def __getitem__(self, ij: Tuple[int, int]) -> LaurentPoly:
        """1-based access."""
        i, j = ij
        return self.entries[i - 1][j - 1]

    def map(self, f) -> "PolyMatrix":
        return PolyMatrix([[f(x) for x in r] for r in self.entries])

    def _check(self, o: "PolyMatrix"):
        if not isinstance(o, PolyMatrix) or o.dim != self.dim:
            raise ValueError("dimension mismatch")

    def __add__(self, o):
        self._check(o)
        return PolyMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, o.entries)])

    def __sub__(self, o):
        self._check(o)
        return PolyMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, o.entries)])

    def __neg__(self):
        return self.map(lambda x: -x)

    def __mul__(self, o):
        if not isinstance(o, PolyMatrix):
            c = LaurentPoly.coerce(o)
            return self.map(lambda x: x * c)
        self._check(o)
        n = self.dim
        cols = list(zip(*o.entries))
        out = []
        for r in self.entries:
            row = []
            for c in cols:
                s = LaurentPoly()
                for a, b in zip(r, c):
                    if a.terms and b.terms:
                        s = s + a * b
                row.append(s)
            out.append(row)
        return PolyMatrix(out)

    def __rmul__(self, o):
        c = LaurentPoly.coerce(o)
        return self.map(lambda x: c * x)

    def __eq__(self, o):
        return isinstance(o, PolyMatrix) and self.entries == o.entries

    def __hash__(self):
        return hash(self.entries)

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(list(zip(*self.entries)))

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.entries for x in r)

    def nonzero_entries(self) -> Dict[Tuple[int, int], LaurentPoly]:
        """``{(i, j): entry}`` for nonzero entries, 1-based."""
        return {(i + 1, j + 1): x for i, r in enumerate(self.entries)
                for j, x in enumerate(r) if not x.is_zero()}

    def substitute(self, bindings: Mapping[str, LaurentPoly]) -> "PolyMatrix":
        return self.map(lambda x: substitute(x, bindings))

    def det(self) -> LaurentPoly:
        return determinant(self)

    def __repr__(self):
        return f"PolyMatrix(dim={self.dim})"


def cofactor_determinant(m: PolyMatrix) -> LaurentPoly:
    """Determinant by Laplace expansion along rows, memoized on column sets.

    Independent of :func:`determinant`; used as an oracle and as the
    fallback for structurally zero pivots.
    """
    rows = m.entries
    n = m.dim

    @lru_cache(maxsize=None)
    def minor(row: int, cols: Tuple[int, ...]) -> LaurentPoly:
        if row == n:
            return LaurentPoly.constant(1)
        s = LaurentPoly()
        for k, c in enumerate(cols):
            a = rows[row][c]
            if a.is_zero():
                continue
            sub = minor(row + 1, cols[:k] + cols[k + 1:])
            if sub.is_zero():
                continue
            t = a * sub
            s = s - t if k % 2 else s + t
        return s

    return minor(0, tuple(range(n)))


def determinant(m: PolyMatrix) -> LaurentPoly:
    """Exact determinant by fraction-free (Bareiss) elimination.

    Each step divides exactly by the previous pivot. If the next pivot is
    zero, Sylvester's identity is used instead: the remaining trailing block
    has determinant ``det(m) * p^(k-1)`` for previous pivot ``p`` and block
    size ``k``, and that block is expanded by cofactors.
    """
    n = m.dim
    a = [list(r) for r in m.entries]
    prev = LaurentPoly.constant(1)
    for k in range(n - 1):
        piv = a[k][k]
        if piv.is_zero():
            block = PolyMatrix([row[k:] for row in a[k:]])
            size = n - k
            d = cofactor_determinant(block)
            return exact_divide(d, prev ** (size - 1)) if size > 1 else d
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                num = piv * a[i][j]
                if not aik.is_zero() and not a[k][j].is_zero():
                    num = num - aik * a[k][j]
                a[i][j] = exact_divide(num, prev)
            a[i][k] = LaurentPoly()
        prev = piv
    return a[n - 1][n - 1]


class RationalExpr:
    """Quotient ``num / den`` of Laurent polynomials, never normalized.

    Equality is decided by cross-multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num = LaurentPoly.coerce(num)
        den = LaurentPoly.coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("RationalExpr with zero denominator")
        if den.is_monomial() and den != LaurentPoly.constant(1):
            num = num * den.inverse_monomial()
            den = LaurentPoly.constant(1)
        self.num = num
        self.den = den

    @staticmethod
    def coerce(x) -> "RationalExpr":
        return x if isinstance(x, RationalExpr) else RationalExpr(x)

    def __add__(self, o):
        o = RationalExpr.coerce(o)
        if self.den == o.den:
            return RationalExpr(self.num + o.num, self.den)
        return RationalExpr(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(-self.num, self.den)

    def __sub__(self, o):
        return self + (-RationalExpr.coerce(o))

    def __rsub__(self, o):
        return RationalExpr.coerce(o) - self

    def __mul__(self, o):
        o = RationalExpr.coerce(o)
        return RationalExpr(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = RationalExpr.coerce(o)
        return RationalExpr(self.num * o.den, self.den * o.num)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, o):
        o = RationalExpr.coerce(o)
        return self.num * o.den == o.num * self.den

    __hash__ = None  # equality is not a normal form

    def log_derivative(self, v: str) -> "RationalExpr":
        dn, dd = self.num.log_derivative(v), self.den.log_derivative(v)
        if dd.is_zero():
            return RationalExpr(dn, self.den)
        return RationalExpr(dn * self.den - self.num * dd, self.den * self.den)

    def __repr__(self):
        return f"RationalExpr(({self.num.text()}) / ({self.den.text()}))"
