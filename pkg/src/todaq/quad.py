"""Quadrature on horizontal complex contours and the special functions it needs.

The integrands met here decay like ``exp(-e^{|t|})`` once each variable is
moved to a suitable line ``Im z = theta``. For such integrands the plain
trapezoidal rule on a truncated line already converges geometrically in the
step, so the default node rule is the identity map. The ``'sinh'`` map
``t = sinh(s)`` turns single-exponential decay into double-exponential
decay and is used for slowly decaying paths.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "ContourSpec",
    "QuadResult",
    "QuadratureError",
    "InadmissibleContour",
    "ExpTerm",
    "check_admissible",
    "choose_offsets",
    "integrate_contour_1d",
    "integrate_nested",
    "bessel_K_imag_order",
    "complex_gamma",
]


# relative rounding floor applied to sum |w f| in error estimates
ROUNDOFF = 4 * np.finfo(float).eps


class QuadratureError(RuntimeError):
    """Refinement budget exhausted; carries the last two estimates."""

    def __init__(self, msg: str, estimates: Tuple[complex, complex] = (0j, 0j), level: int = 0):
        super().__init__(msg)
        self.estimates = estimates
        self.level = level


class InadmissibleContour(ValueError):
    """Contour offsets do not make every exponential term decay."""


@dataclass(frozen=True)
class ContourSpec:
    """Horizontal integration path ``z = t + i*pi*offset`` for real ``t``.

    Attributes
    ----------
    offset : float
        Imaginary offset in units of pi.
    half_width : float or None
        Truncation ``|t| <= T`` in the node variable; ``None`` searches for it.
    max_level : int
        Number of step halvings allowed (node budget).
    tol : float
        Absolute tolerance on successive estimates.
    rtol : float
        Relative tolerance on successive estimates.
    h0 : float
        Initial step in the node variable.
    node_map : {'identity', 'sinh'}
    tilt : float
        Smooth tilt ``+ i*tilt*(t + sqrt(t^2+1))/2`` added to the path; zero
        for a straight line. Makes a purely oscillatory tail at ``+inf``
        decay.
    """

    offset: float = 0.0
    half_width: Optional[float] = None
    max_level: int = 10
    tol: float = 1e-12
    rtol: float = 0.0
    h0: float = 0.5
    node_map: str = "identity"
    tilt: float = 0.0

    def path(self, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Points ``z(s)`` and weights ``dz/ds``."""
        if self.node_map == "sinh":
            t, dt = np.sinh(s), np.cosh(s)
        elif self.node_map == "identity":
            t, dt = s, np.ones_like(s)
        else:
            raise ValueError(f"unknown node map {self.node_map!r}")
        z = t + 1j * math.pi * self.offset
        dz = dt.astype(complex)
        if self.tilt:
            r = np.sqrt(t * t + 1.0)
            z = z + 0.5j * self.tilt * (t + r)
            dz = dz * (1.0 + 0.5j * self.tilt * (1.0 + t / r))
        return z, dz


@dataclass(frozen=True)
class QuadResult:
    """Integral value with a conservative error estimate.

    Attributes
    ----------
    value : complex
    abs_error_estimate : float
        Difference of the last two refinement levels, plus propagated inner
        errors for nested integrals.
    nodes_used : int
    plan : tuple
        ``(half_width, step)`` per level; pass back to reuse the node set.
    """

    value: complex
    abs_error_estimate: float
    nodes_used: int
    plan: Tuple[Tuple[float, float], ...] = ()


# ----------------------------------------------------------------------------
# admissibility

@dataclass(frozen=True)
class ExpTerm:
    """Exponent term ``coeff * exp(sum_j form[j] * z_j)`` over integration variables."""

    coeff: complex
    form: Tuple[int, ...]


def check_admissible(terms: Sequence[ExpTerm], offsets: Sequence[float],
                     eps: float = 1e-12) -> Tuple[bool, List[str]]:
    """Term-by-term decay test for contour offsets (units of pi).

    Each term must have non-positive real part on the shifted contour, and
    the terms with strictly negative real part must have linear forms that
    positively span the integration space, so the exponent tends to minus
    infinity along every real direction.
    """
    m = len(offsets)
    reasons = []
    neg = []
    for k, t in enumerate(terms):
        if len(t.form) != m:
            raise ValueError("linear form length does not match the number of offsets")
        phase = math.pi * sum(a * o for a, o in zip(t.form, offsets))
        re = (complex(t.coeff) * cmath.exp(1j * phase)).real
        if re > eps * abs(t.coeff):
            reasons.append(f"term {k} grows: real part {re:+.3g}")
        elif re < -eps * abs(t.coeff) and any(t.form):
            neg.append(t.form)
    if not neg:
        reasons.append("no decaying term")
        return False, reasons
    A = np.array(neg, dtype=float).T
    for j in range(m):
        for sgn in (1.0, -1.0):
            b = np.zeros(m)
            b[j] = sgn
            r = linprog(np.zeros(A.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
            if r.status != 0:
                reasons.append(f"no decay along {'+' if sgn > 0 else '-'}direction {j}")
    return not reasons, reasons


def choose_offsets(terms: Sequence[ExpTerm], m: int,
                   candidates: Sequence[float] = (0.0, 1.0)) -> Tuple[float, ...]:
    """First admissible offset vector in lexicographic order of ``candidates``."""
    from itertools import product
    for offs in product(candidates, repeat=m):
        ok, _ = check_admissible(terms, offs)
        if ok:
            return tuple(offs)
    raise InadmissibleContour("no admissible offsets among the candidates")


# ----------------------------------------------------------------------------
# one dimension

def _find_half_width(g: Callable[[np.ndarray], np.ndarray], start: float, tiny: float,
                     grow: float = 1.0, limit: float = 60.0) -> float:
    """Smallest ``T`` (stepping by ``grow``) with ``|g|`` below ``tiny`` just inside and beyond."""
    probe = np.linspace(0.0, 1.0, 5)
    T = start
    while T < limit:
        s = np.concatenate([T + probe, -T - probe])
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            v = np.abs(g(s))
        if np.all(np.isfinite(v)) and v.max() <= tiny:
            return T
        T += grow
    raise QuadratureError(f"integrand does not decay within |t| < {limit}")


def _scale(g: Callable[[np.ndarray], np.ndarray], c: ContourSpec) -> float:
    s = np.linspace(-3.0, 3.0, 61)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        v = np.abs(g(s))
    v = v[np.isfinite(v)]
    return float(v.max()) if v.size else 1.0


def integrate_contour_1d(f: Callable[[np.ndarray], np.ndarray], c: ContourSpec,
                         terms: Optional[Sequence[ExpTerm]] = None,
                         plan: Optional[Tuple[float, float]] = None) -> QuadResult:
    """Integral of ``f(z) dz`` along the contour ``c``.

    Parameters
    ----------
    f : callable
        Vectorized over complex arrays.
    c : ContourSpec
    terms : sequence of ExpTerm, optional
        Exponential terms of ``log f``; if given, the offset is checked first.
    plan : (half_width, step), optional
        Evaluate once with this node set and no refinement.

    Raises
    ------
    InadmissibleContour
    QuadratureError
    """
    if terms is not None:
        ok, why = check_admissible(terms, [c.offset])
        if not ok:
            raise InadmissibleContour("; ".join(why))

    def g(s):
        z, dz = c.path(s)
        return f(z) * dz

    floor = [0.0]

    def trap(T, h):
        k = int(round(T / h))
        s = h * np.arange(-k, k + 1)
        v = g(s)
        floor[0] = ROUNDOFF * h * float(np.abs(v).sum())
        return h * np.sum(v), 2 * k + 1

    if plan is not None:
        v, n = trap(*plan)
        return QuadResult(complex(v), 0.0, n, (tuple(plan),))

    T = c.half_width
    if T is None:
        tiny = 1e-3 * max(c.tol, 1e-300) + 1e-17 * _scale(g, c)
        T = _find_half_width(g, 2.0, tiny, 0.5 if c.node_map == "sinh" else 1.0)
    h = c.h0
    prev, nodes = trap(T, h)
    total = nodes
    for level in range(1, c.max_level + 1):
        h /= 2
        cur, nodes = trap(T, h)
        total += nodes
        err = abs(cur - prev)
        if level >= 2 and err <= max(c.tol, c.rtol * abs(cur)):
            return QuadResult(complex(cur), max(float(err), floor[0]), total, ((T, h),))
        prev = cur
    raise QuadratureError(
        f"no convergence after {c.max_level} halvings (|diff| = {err:.3g})", (prev, cur))


# ----------------------------------------------------------------------------
# several dimensions

def _tensor_block(f: Callable[..., np.ndarray], outer: Tuple[complex, ...],
                  cs: Sequence[ContourSpec], plan: Optional[Sequence[Tuple[float, float]]] = None,
                  max_points: int = 4_000_000) -> QuadResult:
    """Tensor-product trapezoid over the innermost ``len(cs)`` variables."""
    m = len(cs)

    def evaluate(Ts, hs):
        axes, wts = [], []
        for c, T, h in zip(cs, Ts, hs):
            k = int(round(T / h))
            s = h * np.arange(-k, k + 1)
            z, dz = c.path(s)
            axes.append(z)
            wts.append(dz * h)
        shape = [len(a) for a in axes]
        npts = int(np.prod(shape))
        if npts > max_points:
            raise QuadratureError(f"tensor grid of {npts} points exceeds the budget")
        grids = []
        for j, a in enumerate(axes):
            sh = [1] * m
            sh[j] = -1
            grids.append(a.reshape(sh))
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            vals = f(*outer, *grids)
        vals = np.broadcast_to(vals, shape)
        w = wts[0]
        for j in range(1, m):
            w = np.multiply.outer(w, wts[j])
        return vals, w, npts

    if plan is not None:
        Ts, hs = zip(*plan)
        vals, w, n = evaluate(Ts, hs)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("non-finite integrand on the frozen node set")
        return QuadResult(complex(np.sum(vals * w)), 0.0, n, tuple(plan))

    Ts = [c.half_width if c.half_width is not None else 4.0 for c in cs]
    hs = [c.h0 for c in cs]
    tol = min(c.tol for c in cs)
    rtol = max(c.rtol for c in cs)
    max_level = min(c.max_level for c in cs)
    total = 0
    prev = None
    level = 0
    while True:
        vals, w, n = evaluate(Ts, hs)
        total += n
        grew = False
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("non-finite integrand: contour inadmissible for these parameters")
        peak = float(np.abs(vals).max()) or 1.0
        tiny = 1e-3 * tol + 1e-17 * peak
        for j, c in enumerate(cs):
            if c.half_width is not None:
                continue
            edge = np.abs(np.take(vals, [0, -1], axis=j)).max()
            if edge > tiny:
                Ts[j] += 1.0 if c.node_map == "identity" else 0.5
                grew = True
                if Ts[j] > 60:
                    raise QuadratureError(f"level {j}: integrand does not decay")
        if grew:
            prev = None
            continue
        cur = complex(np.sum(vals * w))
        if prev is not None:
            err = abs(cur - prev)
            if level >= 2 and err <= max(tol, rtol * abs(cur)):
                floor = ROUNDOFF * float(np.abs(vals * w).sum())
                return QuadResult(cur, max(float(err), floor), total, tuple(zip(Ts, hs)))
        if level >= max_level:
            raise QuadratureError(
                f"tensor block: no convergence after {max_level} halvings",
                (prev if prev is not None else cur, cur))
        prev = cur
        hs = [h / 2 for h in hs]
        level += 1


def integrate_nested(f: Callable[..., np.ndarray], contours: Sequence[ContourSpec],
                     vector_levels: int = 1, tighten: float = 0.1,
                     plan: Optional[Sequence[Tuple[float, float]]] = None) -> QuadResult:
    """Iterated contour integral ``int dz_1 ... int dz_m f(z_1, ..., z_m)``.

    The outer ``m - vector_levels`` variables are integrated one at a time,
    each node calling the next level; the innermost ``vector_levels``
    variables are integrated together on a tensor grid. Inner tolerances are
    multiplied by ``tighten`` per level and inner error estimates are added to
    the outer one with the quadrature weights.

    Parameters
    ----------
    f : callable
        ``f(z_1, ..., z_m)`` broadcasting over array arguments.
    contours : sequence of ContourSpec
        Outermost first.
    vector_levels : int
    tighten : float
    plan : sequence of (half_width, step), optional
        Frozen node set for every level (as returned in ``QuadResult.plan``).

    Raises
    ------
    QuadratureError
        Message annotated with the failing level.
    """
    m = len(contours)
    vector_levels = max(1, min(vector_levels, m))
    n_outer = m - vector_levels

    def level(j: int, outer: Tuple[complex, ...], cs: List[ContourSpec],
              frozen: Optional[Sequence[Tuple[float, float]]]) -> QuadResult:
        if j == n_outer:
            try:
                return _tensor_block(f, outer, cs[j:], frozen[j:] if frozen else None)
            except QuadratureError as e:
                raise QuadratureError(f"level {j}: {e}", e.estimates, j) from None
        c = cs[j]
        inner_cs = [replace(x, tol=x.tol * tighten) for x in cs]
        inner_plan: List[Tuple[Tuple[float, float], ...]] = []
        inner_err = [0.0]
        nodes = [0]

        def g(z):
            out = np.empty(z.shape, dtype=complex)
            for i, zi in enumerate(z.ravel()):
                r = level(j + 1, outer + (zi,), inner_cs, frozen)
                out.flat[i] = r.value
                inner_err[0] = max(inner_err[0], r.abs_error_estimate)
                nodes[0] += r.nodes_used
                if not inner_plan or len(r.plan) and r.plan[0][1] < inner_plan[-1][0][1]:
                    inner_plan.append(r.plan)
            return out

        try:
            r = integrate_contour_1d(g, c, plan=frozen[j] if frozen else None)
        except QuadratureError as e:
            raise QuadratureError(f"level {j}: {e}", e.estimates, j) from None
        T, h = r.plan[0]
        # sum of |weights| along the final line bounds propagated inner error
        k = int(round(T / h))
        s = h * np.arange(-k, k + 1)
        _, dz = c.path(s)
        wsum = float(h * np.abs(dz).sum())
        plan_out = r.plan + (inner_plan[-1] if inner_plan else ())
        return QuadResult(r.value, r.abs_error_estimate + wsum * inner_err[0],
                          r.nodes_used + nodes[0], plan_out)

    return level(0, (), list(contours), list(plan) if plan else None)


# ----------------------------------------------------------------------------
# special functions

def bessel_K_imag_order(mu: float, x: float, tol: float = 1e-15) -> float:
    """Macdonald function ``K_{i mu}(x) = int_0^inf exp(-x cosh t) cos(mu t) dt``.

    Raises
    ------
    ValueError
        If ``x <= 0``.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    c = ContourSpec(offset=0.0, tol=tol * max(math.exp(-x), 1e-300), h0=0.5, max_level=12)
    r = integrate_contour_1d(lambda t: 0.5 * np.exp(-x * np.cosh(t.real)) * np.cos(mu * t.real), c)
    return float(r.value.real)


_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
)


def _sin_pi(s: complex) -> complex:
    a = s.real
    a -= 2.0 * round(a / 2.0)
    return cmath.sin(math.pi * complex(a, s.imag))


def complex_gamma(s: complex) -> complex:
    """Gamma function by the Lanczos approximation (g = 7, 9 terms).

    Uses the reflection formula for ``Re s < 1/2``.

    Raises
    ------
    ValueError
        At the poles ``s = 0, -1, -2, ...``.
    """
    s = complex(s)
    if s.imag == 0 and s.real <= 0 and s.real == int(s.real):
        raise ValueError(f"Gamma has a pole at {s.real:g}")
    if s.real < 0.5:
        return math.pi / (_sin_pi(s) * complex_gamma(1.0 - s))
    z = s - 1.0
    acc = complex(_LANCZOS[0])
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * acc
