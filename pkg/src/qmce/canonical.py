"""Canonical ensemble as the Laplace transform of the density of states.

Z(beta) = integral of Omega(E) exp(-beta*E) dE.  Two evaluation paths:

* the literal closed form for nondegenerate spectra,
  Z = sum_k exp(-beta*E_k) prod_{l != k} pi/(beta*(E_l - E_k)),
  whose terms individually diverge like beta^{-n} as beta -> 0 and
  cancel to ~n digits once beta*(spectral width) < 1;
* the stable path: exact piecewise integration of the polynomial times
  the exponential (cancellation-safe moment recurrences), good for any
  beta > 0 and for degenerate spectra.

The stable path is authoritative; the closed form is retained verbatim
as a cross-check and used only in its comfort zone.  beta is in units
of 1/(k_B T) with k_B = 1, matching the thermodynamic functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dos import PiecewiseDos, build_dos
from .errors import ConvergenceError, InvalidInputError, NoSolutionError
from .piecewise import PiecewisePolynomial
from .spectrum import Spectrum

_SMALL_BETA_WIDTH = 1.0  # below beta*width = 1 the literal sum loses digits
_MAX_BETA_WIDTH = 600.0  # exp range guard for the canonical solver
_EPS = math.ulp(1.0)


@dataclass(frozen=True)
class CanonicalEval:
    """One canonical-ensemble sample: Z and U at a given beta.

    method records which path produced Z: 'closed-form' (literal
    nondegenerate sum) or 'quadrature' (exact piecewise transform).
    U always comes from the stable transform ratio.
    """

    beta: float
    Z: float
    U: float
    method: str


def _literal_terms(s: Spectrum, beta: float) -> tuple[float, float]:
    """Closed-form sum and its largest |term| (the cancellation gauge)."""
    es = s.energies
    total = 0.0
    tmax = 0.0
    for k in range(es.size):
        term = math.exp(-beta * es[k])
        for l in range(es.size):
            if l != k:
                term *= math.pi / (beta * (es[l] - es[k]))
        total += term
        tmax = max(tmax, abs(term))
    return total, tmax


def _partition_eq9_literal(s: Spectrum, beta: float) -> float:
    """The closed-form sum exactly as written; no stability rescue."""
    return _literal_terms(s, beta)[0]


def _closed_or_stable(s: Spectrum, beta: float, d: PiecewiseDos | None = None):
    """(Z, method): the literal sum when well conditioned, else stable.

    Two rejections feed the fallback: the fixed small-beta threshold
    (below beta*width = 1 the terms are guaranteed to cancel ~n digits)
    and a runtime gauge — the literal value is kept only when
    max|term| * n_levels * ulp stays below 1e-11 of the sum, i.e. when
    rounding noise provably sits under the agreement tolerance.
    """
    if s.nondegenerate and beta * s.width >= _SMALL_BETA_WIDTH:
        total, tmax = _literal_terms(s, beta)
        if tmax * s.dim * _EPS <= 1e-11 * total:
            return total, "closed-form"
    dd = build_dos(s) if d is None else d
    return dd.poly.laplace(beta), "quadrature"


def partition_closed(s: Spectrum, beta: float) -> float:
    """Closed-form Z(beta) for a nondegenerate spectrum.

    Where the literal sum cancels catastrophically (small beta*width,
    or near-threshold conditioning at larger dimension) the stable
    transform is substituted automatically (same mathematical value).
    """
    if beta <= 0.0:
        raise InvalidInputError("beta must be positive")
    if not s.nondegenerate:
        raise InvalidInputError(
            "closed form requires a nondegenerate spectrum; use partition_stable"
        )
    return _closed_or_stable(s, beta)[0]


def partition_stable(d: PiecewiseDos, beta: float) -> float:
    """Z(beta) by exact piecewise integration; any beta > 0, any spectrum."""
    if beta <= 0.0:
        raise InvalidInputError("beta must be positive")
    return d.poly.laplace(beta)


def thermal_energy(d: PiecewiseDos, beta: float) -> float:
    """Canonical mean energy U(beta) = -d ln Z/d beta, piecewise-exact."""
    if beta <= 0.0:
        raise InvalidInputError("beta must be positive")
    return d.poly.laplace(beta, 1) / d.poly.laplace(beta, 0)


def canonical_eval(source, beta: float) -> CanonicalEval:
    """One (beta, Z, U) row from a Spectrum or a prebuilt PiecewiseDos."""
    if beta <= 0.0:
        raise InvalidInputError("beta must be positive")
    if isinstance(source, Spectrum):
        s: Spectrum | None = source
        d = build_dos(source)
    else:
        s, d = None, source
    if s is not None:
        z, method = _closed_or_stable(s, beta, d)
    else:
        z, method = d.poly.laplace(beta), "quadrature"
    u = d.poly.laplace(beta, 1) / d.poly.laplace(beta, 0)
    return CanonicalEval(beta=float(beta), Z=float(z), U=float(u), method=method)


def nfold_dos(d: PiecewiseDos, n: int) -> PiecewisePolynomial:
    """Density of states of n independent copies: the n-fold convolution.

    Returns the piecewise polynomial in the total energy (binary
    doubling keeps it at O(log n) convolutions).  Its integral is
    normalization**n, not a single-system volume, so the result is a
    plain PiecewisePolynomial rather than a PiecewiseDos.
    """
    if int(n) != n or n < 1:
        raise InvalidInputError("fold count must be a positive integer")
    n = int(n)
    result: PiecewisePolynomial | None = None
    base = d.poly
    while n:
        if n & 1:
            result = base if result is None else result.convolve(base)
        n >>= 1
        if n:
            base = base.convolve(base)
    return result


def _mean_energy(poly: PiecewisePolynomial, beta: float, lo: float) -> float:
    # solve on the support shifted to start at 0 so exp(-beta*E) cannot
    # overflow for moderate beta of either sign
    shifted = PiecewisePolynomial(poly.breakpoints - lo, poly.coefficients)
    return shifted.laplace(beta, 1) / shifted.laplace(beta, 0) + lo


def solve_thermal_energy(poly_or_dos, target: float) -> float:
    """The beta at which the canonical mean energy equals target.

    U(beta) is strictly decreasing with range (support minimum,
    support maximum), so the solution is unique; bracket expansion
    followed by bisection.  Accepts a PiecewiseDos or a composite
    PiecewisePolynomial (n-fold systems).
    """
    poly = poly_or_dos.poly if isinstance(poly_or_dos, PiecewiseDos) else poly_or_dos
    lo, hi = poly.support
    if not lo < target < hi:
        raise InvalidInputError(
            f"target energy {target:g} must lie strictly inside ({lo:g}, {hi:g})"
        )
    width = hi - lo
    step = 1.0 / width
    beta_cap = _MAX_BETA_WIDTH / width
    u0 = _mean_energy(poly, 0.0, lo)
    if target == u0:
        return 0.0
    if target < u0:
        a, b = 0.0, step
        while _mean_energy(poly, b, lo) > target:
            a, b = b, 2.0 * b
            if b > beta_cap:
                raise ConvergenceError(
                    "target too close to the spectral minimum for the canonical solver"
                )
    else:
        a, b = -step, 0.0
        while _mean_energy(poly, a, lo) < target:
            b, a = a, 2.0 * a
            if a < -beta_cap:
                raise ConvergenceError(
                    "target too close to the spectral maximum for the canonical solver"
                )
    for _ in range(200):
        mid = 0.5 * (a + b)
        if not a < mid < b:
            break
        if _mean_energy(poly, mid, lo) > target:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def beta_temperature_consistency(poly_or_dos, e: float) -> tuple[float, float, float]:
    """Compare the canonical and microcanonical inverse temperatures at e.

    Returns (beta_canonical, beta_micro, gap): beta_micro = Omega'/Omega,
    beta_canonical solves U(beta) = e, gap is their relative difference
    |bc - bm|/|bc|.  For one small system the gap is genuinely nonzero;
    it shrinks as the system is composed with copies of itself (pass the
    n-fold polynomial and the total energy).
    """
    poly = poly_or_dos.poly if isinstance(poly_or_dos, PiecewiseDos) else poly_or_dos
    lo, hi = poly.support
    e = float(e)
    if not lo < e < hi:
        raise InvalidInputError(
            f"energy {e:g} must lie strictly inside ({lo:g}, {hi:g})"
        )
    w = poly.value(e)
    w1 = poly.derivative_value(e, 1)
    if w1 == 0.0:
        raise NoSolutionError("beta_micro undefined where Omega' = 0")
    if w <= 0.0:
        raise InvalidInputError("Omega underflows at this energy")
    beta_micro = w1 / w
    beta_canonical = solve_thermal_energy(poly, e)
    if beta_canonical == 0.0:
        gap = 0.0 if beta_micro == 0.0 else math.inf
    else:
        gap = abs(beta_canonical - beta_micro) / abs(beta_canonical)
    return beta_canonical, beta_micro, gap
