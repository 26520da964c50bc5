"""Integral representations of A1 and D_n Toda wave functions and their checks.

Kernels are evaluated in the absorbed-hbar convention (exponents without
``i/hbar``); convergence comes from moving variables to horizontal lines
``Im = pi``. The D2 functions returned here are *reduced*: the constant
``Gamma(2i*lambda_2)`` of the two-variable representation is left out, so
``lambda_2 = 0`` gives a finite value. Every normalization constant is
measured and reported next to the printed one, never assumed.
"""

from __future__ import annotations

import cmath
import math
import time
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .kernels import recursive_kernel
from .quad import (ContourSpec, ExpTerm, InadmissibleContour, QuadResult,
                   QuadratureError, bessel_K_imag_order, check_admissible,
                   choose_offsets, complex_gamma, integrate_contour_1d,
                   integrate_nested)

__all__ = [
    "WavePoint",
    "A1Report",
    "FactorizationReport",
    "EigenResidual",
    "FDNoiseWarning",
    "chi_a1",
    "chi_a1_report",
    "psi_d2",
    "d2_terms",
    "factorization_check",
    "eigen_residual",
    "psi_dn",
    "dn_integrand",
    "monte_carlo_dn",
]

PI = math.pi


class FDNoiseWarning(RuntimeWarning):
    """Finite-difference step too small for the quadrature noise."""


@dataclass
class WavePoint:
    """One wave-function sample.

    Attributes
    ----------
    n : int
    lam : tuple of float
    x : tuple of float
    value : complex
    error : float
    seconds : float
    nodes : int
    notes : list of str
        Contour choices and other run metadata.
    plan : tuple
        Frozen node set for reuse at nearby points.
    """

    n: int
    lam: Tuple[float, ...]
    x: Tuple[float, ...]
    value: complex
    error: float
    seconds: float = 0.0
    nodes: int = 0
    notes: List[str] = field(default_factory=list)
    plan: tuple = ()

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "lambda": list(self.lam),
            "x": list(self.x),
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "error": self.error,
            "seconds": round(self.seconds, 6),
        }


# ----------------------------------------------------------------------------
# A1

def _a1_integrand(nu: float, y: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: np.exp(2j * nu * (x + y) + np.exp(-x) + np.exp(x + 2 * y))


A1_TERMS = (ExpTerm(1.0, (-1,)), ExpTerm(1.0, (1,)))


def chi_a1(nu: float, y: float, tol: float = 1e-13) -> complex:
    """Contour formula ``-(e^{2 pi nu}/2) int_{Im x = pi} e^{2i nu (x+y)} exp(e^{-x} + e^{x+2y}) dx``.

    Validated for ``|nu| <= 5`` and ``|y| <= 3``.

    Raises
    ------
    QuadratureError
    """
    c = ContourSpec(offset=1.0, tol=tol * math.exp(-2 * PI * abs(nu)), max_level=12)
    r = integrate_contour_1d(_a1_integrand(nu, y), c, terms=A1_TERMS)
    return -cmath.exp(2 * PI * nu) / 2 * r.value


@dataclass
class A1Report:
    """Contour formula against the Macdonald function ``K_{2i nu}(2 e^y)``.

    ``ratios[j] = chi_a1(nu, ys[j]) / K_{2i nu}(2 e^{ys[j]})``; the printed
    formula claims the ratio is 1.
    """

    nu: float
    ys: Tuple[float, ...]
    ratios: Tuple[complex, ...]
    spread: float
    constant: complex
    claimed: complex = 1.0
    tol: float = 1e-8

    @property
    def passed(self) -> bool:
        return self.spread <= self.tol

    def to_dict(self) -> dict:
        return {
            "check": "a1-contour",
            "nu": self.nu,
            "y": list(self.ys),
            "ratio_re": [r.real for r in self.ratios],
            "ratio_im": [r.imag for r in self.ratios],
            "spread": self.spread,
            "constant_re": self.constant.real,
            "constant_im": self.constant.imag,
            "claimed": complex(self.claimed).real,
            "pass": self.passed,
        }


def chi_a1_report(nu: float, ys: Sequence[float] = (-1.0, 0.0, 1.0), tol: float = 1e-8) -> A1Report:
    """Ratio of the contour formula to ``K_{2i nu}(2 e^y)`` over ``ys``."""
    rs = []
    for y in ys:
        k = bessel_K_imag_order(2 * nu, 2 * math.exp(y))
        rs.append(chi_a1(nu, y) / k)
    arr = np.array(rs)
    mean = complex(arr.mean())
    spread = float(np.abs(arr - mean).max() / abs(mean))
    return A1Report(nu, tuple(ys), tuple(rs), spread, mean, 1.0, tol)


# ----------------------------------------------------------------------------
# D2 (direct transcription of the two- and three-variable integrals)

def d2_terms(form: str = "twoD") -> Tuple[Tuple[str, ...], List[ExpTerm]]:
    """Integration variables and exponential terms (coefficient 1) of the D2 integrand."""
    if form == "twoD":
        names = ("x11", "z11")
        forms = [(0, 1), (0, -1), (0, -1), (1, -1), (-1, -1)]
    elif form == "threeD":
        names = ("x11", "z11", "y")
        forms = [(0, 1, 0), (0, -1, 0), (0, -1, 0), (1, -1, 0), (-1, -1, 0),
                 (0, 0, -1), (-1, 0, -1)]
    else:
        raise ValueError(f"unknown form {form!r}")
    return names, [ExpTerm(1.0, f) for f in forms]


def _d2_core(l1, l2, x21, x22, x11, z11):
    ph = 1j * l2 * (x22 + x21) - 2j * l2 * z11 + 1j * (l2 + l1) * x11
    F = (np.exp(z11 - x21) + np.exp(x22 - z11) + np.exp(-x22 - z11)
         + np.exp(x11 - z11) + np.exp(-x11 - z11))
    return ph + F


def _power(base: np.ndarray, expo: complex) -> np.ndarray:
    """Principal power, refusing bases on or near the branch cut."""
    bad = (base.real <= 0) & (np.abs(base.imag) <= 1e-300 + 1e-14 * np.abs(base))
    if np.any(bad):
        raise InadmissibleContour("power factor base meets the branch cut")
    return np.exp(expo * np.log(base))


def _d2_twoD(l1, l2, x21, x22):
    def f(x11, z11):
        base = np.exp(-x22) + np.exp(-x11)
        return np.exp(_d2_core(l1, l2, x21, x22, x11, z11)) * _power(base, 2j * l2)
    return f


def _d2_threeD(l1, l2, x21, x22):
    # y is translated by log S(x11) along its own contour, an exact change of
    # variables that keeps the tilted tail bounded for all x11
    def f(x11, z11, y):
        S = np.exp(-x22) + np.exp(-x11)
        yy = y + np.log(S)
        ex = (_d2_core(l1, l2, x21, x22, x11, z11) + 2j * l2 * yy
              + np.exp(-x22 - yy) + np.exp(-x11 - yy))
        return np.exp(ex)
    return f


def _d2_contours(form: str, l2: float, tol: float) -> List[ContourSpec]:
    names, terms = d2_terms("twoD")
    offs = choose_offsets(terms, 2)
    cs = [ContourSpec(offset=o, tol=tol, max_level=8, h0=0.5) for o in offs]
    if form == "threeD":
        # the tilt turns the oscillatory +inf tail into exponential decay of
        # rate 2*|l2|*|tilt| >= 1; capped so the -inf side stays bounded
        tilt = math.copysign(min(10.0, max(1.0, 0.5 / abs(l2))), l2) if l2 else 1.0
        cs.append(ContourSpec(offset=1.0, tol=tol, max_level=8, h0=0.5, tilt=tilt))
    return cs


def psi_d2(l1: float, l2: float, x21: float, x22: float, form: str = "twoD",
           tol: Optional[float] = None, plan: Optional[tuple] = None) -> WavePoint:
    """Reduced D2 wave function ``Psi / Gamma(2i*lambda_2)``.

    Parameters
    ----------
    l1, l2 : float
        Spectral parameters.
    x21, x22 : float
        Position; validated for ``|x| <= 2``.
    form : {'twoD', 'threeD'}
        ``'twoD'`` integrates over ``(x11, z11)`` with the power factor;
        ``'threeD'`` adds the ``y`` integral and divides by its exact value
        ``e^{-2 pi l2} Gamma(-2i l2)``.
    tol : float, optional
        Relative tolerance; ``1e-11`` for ``twoD`` and ``1e-9`` for ``threeD``.
    plan : tuple, optional
        Frozen node set from a previous call.

    Raises
    ------
    QuadratureError
    InadmissibleContour
    ValueError
        ``threeD`` at ``l2 = 0``, where the ``y`` integral diverges.
    """
    t0 = time.perf_counter()
    if tol is None:
        tol = 1e-9 if form == "threeD" else 1e-11
    names, terms = d2_terms("twoD")
    cs = _d2_contours(form, l2, 1.0)
    offs = [c.offset for c in cs[:2]]
    ok, why = check_admissible(terms, offs)
    if not ok:
        raise InadmissibleContour("; ".join(why))
    notes = [f"offsets {dict(zip(names, offs))} (units of pi)"]
    if form == "twoD":
        f = _d2_twoD(l1, l2, x21, x22)
        norm = 1.0
    elif form == "threeD":
        if l2 == 0:
            raise ValueError("threeD form diverges at lambda_2 = 0")
        f = _d2_threeD(l1, l2, x21, x22)
        norm = math.exp(-2 * PI * l2) * complex_gamma(-2j * l2)
        notes.append(f"y: offset 1, tilt {cs[2].tilt:+g}, shifted by log(e^-x22 + e^-x11)")
    else:
        raise ValueError(f"unknown form {form!r}")
    # scale the absolute tolerance by a cheap magnitude probe
    probe = integrate_nested(f, [replace(c, tol=1e-4 * abs(norm)) for c in cs],
                             vector_levels=len(cs)) if plan is None else None
    scale = abs(probe.value) if probe is not None else 1.0
    cs = [replace(c, tol=tol * max(scale, 1e-300)) for c in cs]
    r = integrate_nested(f, cs, vector_levels=len(cs), plan=plan)
    return WavePoint(2, (l1, l2), (x21, x22), r.value / norm, r.abs_error_estimate / abs(norm),
                     time.perf_counter() - t0, r.nodes_used, notes, r.plan)


# ----------------------------------------------------------------------------
# factorization

@dataclass
class FactorizationReport:
    """Ratio of the D2 integral to a product of two Macdonald functions.

    Attributes
    ----------
    lam : (float, float)
    grid : list of (xi, eta)
    ratios : list of complex
    spread : float
        ``std(r) / |mean(r)|``.
    constant : complex
        ``mean(r)``.
    orders : (float, float)
        Imaginary orders used for the K factors at ``xi`` and ``eta``.
    printed_orders_spread : float
        Spread obtained with the printed orders ``(l2 +- l1)/2``.
    printed_constant : complex
        ``4 e^{-2 pi l2}``, the printed prefactor divided by ``Gamma(2i l2)``.
    derived_constant : complex
        ``4 e^{+2 pi l2}``, from evaluating the same chain of substitutions.
    """

    lam: Tuple[float, float]
    grid: List[Tuple[float, float]]
    ratios: List[complex]
    spread: float
    constant: complex
    orders: Tuple[float, float]
    printed_orders_spread: float
    printed_constant: complex
    derived_constant: complex
    tol: float = 1e-6
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.spread <= self.tol

    @property
    def discrepancy(self) -> complex:
        """``constant / printed_constant`` (1 if the printed prefactor were right)."""
        return self.constant / self.printed_constant

    def to_dict(self) -> dict:
        return {
            "check": "d2-factorization",
            "lambda": list(self.lam),
            "grid": [list(g) for g in self.grid],
            "ratio_re": [r.real for r in self.ratios],
            "ratio_im": [r.imag for r in self.ratios],
            "spread": self.spread,
            "constant_re": self.constant.real,
            "constant_im": self.constant.imag,
            "orders": list(self.orders),
            "printed_orders_spread": self.printed_orders_spread,
            "printed_constant": self.printed_constant.real,
            "derived_constant": self.derived_constant.real,
            "discrepancy_re": self.discrepancy.real,
            "discrepancy_im": self.discrepancy.imag,
            "pass": self.passed,
            "seconds": round(self.seconds, 3),
        }


def factorization_check(l1: float, l2: float,
                        grid: Optional[Sequence[Tuple[float, float]]] = None,
                        tol: float = 1e-6, quad_tol: float = 1e-11) -> FactorizationReport:
    """Test ``Psi(xi, eta) / (K_{i a}(2e^{xi/2}) K_{i b}(2e^{-eta/2}))`` for constancy.

    ``a = l2 + l1`` and ``b = l2 - l1`` are the orders forced by the A1
    eigen-equation; the printed orders ``a/2, b/2`` are also tried and
    their spread is reported.
    """
    t0 = time.perf_counter()
    if grid is None:
        grid = [(xi, eta) for xi in (-1.0, 0.0, 1.0) for eta in (-1.0, 0.0, 1.0)]
    a, b = l2 + l1, l2 - l1
    vals, kk, kp = [], [], []
    for xi, eta in grid:
        x21, x22 = (eta - xi) / 2, (eta + xi) / 2
        vals.append(psi_d2(l1, l2, x21, x22, tol=quad_tol).value)
        kk.append(bessel_K_imag_order(a, 2 * math.exp(xi / 2))
                  * bessel_K_imag_order(b, 2 * math.exp(-eta / 2)))
        kp.append(bessel_K_imag_order(a / 2, 2 * math.exp(xi / 2))
                  * bessel_K_imag_order(b / 2, 2 * math.exp(-eta / 2)))
    v = np.array(vals)
    r = v / np.array(kk)
    rp = v / np.array(kp)
    spread = float(np.std(r) / abs(r.mean()))
    pspread = float(np.std(rp) / abs(rp.mean()))
    return FactorizationReport((l1, l2), list(grid), [complex(x) for x in r], spread,
                               complex(r.mean()), (a, b), pspread,
                               complex(4 * math.exp(-2 * PI * l2)),
                               complex(4 * math.exp(2 * PI * l2)), tol,
                               time.perf_counter() - t0)


# ----------------------------------------------------------------------------
# eigen-equations by finite differences

_D2_STENCIL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFS = np.arange(-2, 3)


@dataclass
class EigenResidual:
    """``|H Psi - E Psi| / |Psi|`` at one point.

    Attributes
    ----------
    residual : float
        ``nan`` when degenerate.
    eigenvalue : float
    value : complex
        ``Psi`` at the point.
    noise_floor : float
        Relative residual expected from rounding noise alone.
    fd_step : float
    degenerate : bool
        The sampled function vanishes at the point.
    """

    operator: str
    residual: float
    eigenvalue: float
    value: complex
    noise_floor: float
    fd_step: float
    degenerate: bool = False

    def __float__(self) -> float:
        return self.residual

    def to_dict(self) -> dict:
        return {
            "check": f"eigen-{self.operator}",
            "residual": self.residual,
            "eigenvalue": self.eigenvalue,
            "noise_floor": self.noise_floor,
            "fd_step": self.fd_step,
            "degenerate": self.degenerate,
        }


def _frozen_sampler(l1, l2, x0, tol):
    """Sampler reusing one node set, with the truncation widened by one unit."""
    wp = psi_d2(l1, l2, x0[0], x0[1], tol=tol)
    plan = tuple((T + 1.0, h) for T, h in wp.plan)

    def sample(x21, x22):
        return psi_d2(l1, l2, x21, x22, plan=plan).value

    def l1norm(x21, x22):
        cs = _d2_contours("twoD", l2, 1.0)
        f = _d2_twoD(l1, l2, x21, x22)
        return abs(integrate_nested(lambda *z: np.abs(f(*z)), cs, 2, plan=plan).value)

    return sample, l1norm


def eigen_residual(operator: str, lam: Tuple[float, float], point: Tuple[float, float],
                   fd_step: Optional[float] = None, quad_tol: float = 1e-9,
                   sampler: Optional[Callable[[float, float], complex]] = None,
                   noise_limit: float = 1e-6) -> EigenResidual:
    """Finite-difference residual of a D2 eigen-equation.

    Parameters
    ----------
    operator : {'quadratic', 'quartic'}
        ``'quadratic'``: ``-(1/2)(d21^2 + d22^2) + e^{x22-x21} + e^{-x22-x21}``
        with ``E = (l1^2 + l2^2)/2``. ``'quartic'``: the product of the two
        A1 operators in ``xi = x22 - x21``, ``eta = x22 + x21`` with
        ``E = nu1^2 nu2^2 / 4``, ``nu1,2 = (l2 +- l1)/2``.
    lam : (l1, l2)
    point : (x21, x22)
    fd_step : float, optional
        Defaults to ``1e-3`` (quadratic) and ``2e-2`` (quartic).
    quad_tol : float
        Tolerance used to fix the node set at the center.
    sampler : callable, optional
        Replaces the wave function (``(x21, x22) -> complex``).
    noise_limit : float
        Warn with :class:`FDNoiseWarning` above this relative noise floor.
    """
    if operator not in ("quadratic", "quartic"):
        raise ValueError(f"unknown operator {operator!r}")
    l1, l2 = lam
    h = fd_step if fd_step is not None else (1e-3 if operator == "quadratic" else 2e-2)
    x21, x22 = point
    l1norm = None
    if sampler is None:
        sampler, l1norm = _frozen_sampler(l1, l2, point, quad_tol)
    if operator == "quadratic":
        E = 0.5 * (l1 * l1 + l2 * l2)
        s1 = np.array([sampler(x21 + k * h, x22) for k in _OFFS])
        s2 = np.array([sampler(x21, x22 + k * h) for k in _OFFS])
        psi = s1[2]
        lap = (_D2_STENCIL @ s1 + _D2_STENCIL @ s2) / (h * h)
        Hpsi = -0.5 * lap + (math.exp(x22 - x21) + math.exp(-x22 - x21)) * psi
        amp = 2 * np.abs(_D2_STENCIL).sum() / (2 * h * h)
    else:
        nu1, nu2 = (l2 + l1) / 2, (l2 - l1) / 2
        E = 0.25 * nu1 * nu1 * nu2 * nu2
        xi, eta = x22 - x21, x22 + x21
        S = np.array([[sampler((eta + b * h - xi - a * h) / 2, (eta + b * h + xi + a * h) / 2)
                       for b in _OFFS] for a in _OFFS])
        psi = S[2, 2]
        dxx = (_D2_STENCIL @ S[:, 2]) / (h * h)
        dee = (_D2_STENCIL @ S[2, :]) / (h * h)
        dxxee = (_D2_STENCIL @ S @ _D2_STENCIL) / h ** 4
        Hpsi = 0.25 * (dxxee - math.exp(-eta) * dxx - math.exp(xi) * dee + math.exp(xi - eta) * psi)
        amp = 0.25 * np.abs(_D2_STENCIL).sum() ** 2 / h ** 4
    if psi == 0:
        return EigenResidual(operator, float("nan"), E, 0j, float("nan"), h, True)
    mag = l1norm(x21, x22) if l1norm is not None else abs(psi)
    noise = float(amp * 4 * np.finfo(float).eps * mag / abs(psi))
    if noise > noise_limit:
        warnings.warn(f"fd_step {h:g} gives a noise floor of {noise:.2e} relative", FDNoiseWarning)
    res = float(abs(Hpsi - E * psi) / abs(psi))
    return EigenResidual(operator, res, E, complex(psi), noise, h)


# ----------------------------------------------------------------------------
# generic D_n recursion

@lru_cache(maxsize=None)
def _kernel_parts(k: int):
    """Numeric data of the kernel lowering ``D_{k+1}`` to ``D_k``."""
    K = recursive_kernel(k)
    terms = [(complex(c.evaluate({})), dict(f)) for c, f in K.base.terms]
    phase = dict(K.phase)
    power = [dict(m) for m in K.power_base.terms]
    return terms, phase, power


def _lin(form: Dict[str, int], env: Dict[str, np.ndarray]):
    s = 0
    for v, a in form.items():
        s = s + a * env[v]
    return s


def _level_log(k: int, lam: float, env: Dict[str, np.ndarray]):
    """Log of the kernel factor ``D_{k+1} -> D_k`` (without the power) and its power base."""
    terms, phase, power = _kernel_parts(k)
    out = 1j * lam * _lin(phase, env)
    for c, f in terms:
        out = out + c * np.exp(_lin(f, env))
    base = sum(np.exp(_lin(p, env)) for p in power)
    return out, base


def _level_offsets(k: int) -> Tuple[Tuple[str, ...], Tuple[float, ...]]:
    terms, _, _ = _kernel_parts(k)
    names = tuple([f"W{i}" for i in range(1, k + 1)] + [f"Z{i}" for i in range(1, k + 1)])
    ets = []
    for c, f in terms:
        form = tuple(f.get(v, 0) for v in names)
        if any(form):
            ets.append(ExpTerm(c, form))
    return names, choose_offsets(ets, len(names))


def _nodes(T: float, h: float, off: float) -> Tuple[np.ndarray, float]:
    m = int(round(T / h))
    return h * np.arange(-m, m + 1) + 1j * PI * off, h


def _psi_levels(lam: Sequence[float], P: np.ndarray, rtol: float, h0: float,
                max_level: int, budget: int, stats: dict,
                frozen: Optional[Dict[int, Tuple[float, float]]] = None) -> Tuple[np.ndarray, float]:
    """``Psi^{D_k}`` at the rows of ``P`` (shape ``(B, k)``) by recursive tensor trapezoids."""
    k = P.shape[1]
    if k == 1:
        return np.exp(1j * lam[0] * P[:, 0]), 0.0
    names, offs = _level_offsets(k - 1)
    stats.setdefault("offsets", {})[k] = dict(zip(names, offs))
    m = k - 1
    T, h = frozen[k] if frozen else (4.0, h0)
    prev = None
    level = 0
    while True:
        ax = [_nodes(T, h, o)[0] for o in offs]
        N = len(ax[0])
        W = np.stack(np.meshgrid(*ax[:m], indexing="ij"), -1).reshape(-1, m)
        inner, inner_err = _psi_levels(lam[:m], W, rtol * 0.1, h0, max_level, budget, stats,
                                       frozen)
        inner = inner.reshape((N,) * m)
        B = P.shape[0]
        size = N ** (2 * m)
        if size > budget:
            raise QuadratureError(f"D{k}: grid of {size} points per evaluation exceeds the budget",
                                  (prev if prev is not None else 0j, 0j), k)
        chunk = max(1, budget // size)
        vals = np.empty(B, dtype=complex)
        edge = 0.0
        peak = 0.0
        for s in range(0, B, chunk):
            Pb = P[s:s + chunk]
            env = {}
            shp = (len(Pb),) + (1,) * (2 * m)
            for i in range(k):
                env[f"X{i+1}"] = Pb[:, i].reshape(shp)
            for j, v in enumerate(names):
                sh = [1] * (2 * m + 1)
                sh[j + 1] = -1
                env[v] = ax[j].reshape(sh)
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                lg, base = _level_log(m, lam[k - 1], env)
                f = np.exp(lg) * _power(np.broadcast_to(base, np.broadcast_shapes(base.shape, lg.shape)),
                                        2j * lam[k - 1]) * inner.reshape((1,) + inner.shape + (1,) * m)
            if not np.all(np.isfinite(f)):
                raise QuadratureError(f"D{k}: non-finite integrand", (0j, 0j), k)
            vals[s:s + chunk] = f.reshape(len(Pb), -1).sum(axis=1) * h ** (2 * m)
            a = np.abs(f)
            peak = max(peak, float(a.max()))
            for ax_i in range(1, 2 * m + 1):
                edge = max(edge, float(np.take(a, [0, -1], axis=ax_i).max()))
        stats["nodes"] = stats.get("nodes", 0) + B * size
        if frozen:
            return vals, 0.0
        if edge > 1e-3 * rtol * peak:
            T += 1.0
            prev = None
            if T > 30:
                raise QuadratureError(f"D{k}: integrand does not decay", (0j, 0j), k)
            continue
        scale = float(np.abs(vals).max()) or 1.0
        if prev is not None:
            err = float(np.abs(vals - prev).max())
            if level >= 2 and err <= rtol * scale:
                stats.setdefault("plan", {})[k] = (T, h)
                return vals, err + inner_err * (2 * T) ** m
        if level >= max_level:
            raise QuadratureError(f"D{k}: no convergence after {max_level} halvings",
                                  (complex(prev[0]) if prev is not None else 0j, complex(vals[0])), k)
        prev = vals
        h /= 2
        level += 1


def psi_dn(n: int, lam: Sequence[float], x: Sequence[float], tol: Optional[float] = None,
           h0: Optional[float] = None, max_level: int = 4, budget: int = 8_000_000,
           plan: Optional[tuple] = None) -> WavePoint:
    """Reduced ``D_n`` wave function from the chain of rank-lowering kernels.

    Each level integrates ``x_{k,*}`` and ``z_{k,*}`` on a tensor trapezoid
    with offsets chosen by the admissibility checker; the lower-rank
    function is tabulated on the shared ``x_{k,*}`` grid.

    Parameters
    ----------
    n : {2, 3}
    lam, x : sequences of length n
    tol : float, optional
        Relative tolerance; defaults to ``1e-9`` for n=2 and ``1e-2`` for n=3.
    plan : tuple, optional
        ``WavePoint.plan`` of a previous call; evaluates on that node set
        without refinement (error reported as 0).

    Raises
    ------
    QuadratureError
        Budget exhausted (reported, never degraded).
    """
    if n not in (2, 3):
        raise ValueError("psi_dn supports n = 2 and n = 3")
    if len(lam) != n or len(x) != n:
        raise ValueError("lam and x must have length n")
    tol = tol if tol is not None else (1e-9 if n == 2 else 1e-2)
    h0 = h0 if h0 is not None else (0.5 if n == 2 else 1.0)
    t0 = time.perf_counter()
    stats: dict = {}
    vals, err = _psi_levels(list(lam), np.array([x], dtype=complex), tol, h0, max_level, budget, stats,
                              dict(plan) if plan else None)
    notes = [f"D{k} level offsets {o}" for k, o in sorted(stats.get("offsets", {}).items())]
    plan = tuple(sorted(stats.get("plan", {}).items()))
    return WavePoint(n, tuple(lam), tuple(x), complex(vals[0]), err,
                     time.perf_counter() - t0, stats.get("nodes", 0), notes, plan)


def dn_integrand(n: int, lam: Sequence[float], x: Sequence[float],
                 pts: Dict[str, np.ndarray]) -> np.ndarray:
    """Full ``D_n`` integrand at sample points.

    ``pts`` maps ``'x{k}_{i}'`` and ``'z{k}_{i}'`` (``k < n``) to complex arrays.
    """
    env_x = {f"x{n}_{i+1}": np.asarray(x[i]) for i in range(n)}
    env_x.update(pts)
    out = 1j * lam[0] * env_x["x1_1"]
    for k in range(1, n):
        env = {f"X{i}": env_x[f"x{k+1}_{i}"] for i in range(1, k + 2)}
        env.update({f"W{i}": env_x[f"x{k}_{i}"] for i in range(1, k + 1)})
        env.update({f"Z{i}": env_x[f"z{k}_{i}"] for i in range(1, k + 1)})
        lg, base = _level_log(k, lam[k], env)
        out = out + lg + 2j * lam[k] * np.log(base)
    return np.exp(out)


def monte_carlo_dn(n: int, lam: Sequence[float], x: Sequence[float], samples: int = 400_000,
                   half_width: float = 5.0, seed: int = 0, batches: int = 20) -> Tuple[complex, float]:
    """Crude Monte-Carlo estimate of the ``D_n`` integral on a truncated box.

    Returns
    -------
    (estimate, standard error)
    """
    rng = np.random.default_rng(seed)
    names = []
    offs = {}
    for k in range(1, n):
        nm, of = _level_offsets(k)
        for v, o in zip(nm, of):
            name = (f"x{k}_{v[1:]}" if v[0] == "W" else f"z{k}_{v[1:]}")
            names.append(name)
            offs[name] = o
    d = len(names)
    vol = (2 * half_width) ** d
    per = samples // batches
    means = []
    for _ in range(batches):
        u = rng.uniform(-half_width, half_width, size=(per, d))
        pts = {v: u[:, j] + 1j * PI * offs[v] for j, v in enumerate(names)}
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            f = dn_integrand(n, lam, x, pts)
        f = np.where(np.isfinite(f), f, 0)
        means.append(vol * f.mean())
    m = np.array(means)
    return complex(m.mean()), float(np.std(m, ddof=1) / math.sqrt(batches))
