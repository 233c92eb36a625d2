"""Microcanonical thermodynamics derived from the density of states.

Natural units throughout: temperatures are k_B*T in energy units,
entropy and specific heat in units of k_B.  A single recorded scale
(ThermoCurve.kB) converts for display; the stored arrays always use
k_B = 1.

Log-concavity of Omega (a spline density with nonnegative weights)
underpins the numerics: beta = Omega'/Omega is nonincreasing in E, so
T(E) is monotone on each side of the mode and root finding is
bisection-safe, C >= 0, and the two-system entropy objective of
``equilibrate`` is concave in the exchanged energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dos import PiecewiseDos
from .errors import InvalidInputError, NoSolutionError
from .piecewise import PiecewisePolynomial, _deriv_coeffs

_JUMP_RTOL = 1e-8
_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class ThermoCurve:
    """Tabulated S, T, C on an energy grid strictly inside the support."""

    grid: np.ndarray
    S: np.ndarray
    T: np.ndarray
    C: np.ndarray
    kB: float


@dataclass(frozen=True)
class CriticalPoint:
    """Knot where some one-sided derivative of Omega jumps.

    temperature is k_B*T at the knot; when the very first derivative
    jumps (discontinuity_order 1) the temperature itself is two-valued
    and the right limit is stored.  jump holds the (left, right) values
    of the first discontinuous order.
    """

    energy: float
    temperature: float
    discontinuity_order: int
    jump: tuple[float, float]


@dataclass(frozen=True)
class EquilibrationResult:
    """Entropy-maximizing exchange between two composite systems.

    epsilon is the total energy moved into system 1 (each of its N1
    constituents gains epsilon/N1); t1, t2 are the post-exchange k_B*T
    values and total_entropy is N1 ln Omega1 + N2 ln Omega2 at the
    optimum.  boundary marks a maximum pinned at the feasibility edge,
    where the temperatures need not match.
    """

    epsilon: float
    t1: float
    t2: float
    total_entropy: float
    boundary: bool


def _piece_deriv_scale(poly: PiecewisePolynomial, j: int, order: int) -> float:
    """Sup estimate of the order-th derivative magnitude on piece j."""
    c = _deriv_coeffs(poly.coefficients[j], order)
    h = poly.breakpoints[j + 1] - poly.breakpoints[j]
    return float(np.sum(np.abs(c) * h ** np.arange(c.size)))


def _noise_floor(poly: PiecewisePolynomial, x: float) -> float:
    """Rounding-noise bound for evaluating the piece containing x."""
    bp = poly.breakpoints
    j = min(max(int(np.searchsorted(bp, x, side="right")) - 1, 0), poly.npieces - 1)
    xi = x - bp[j]
    c = np.abs(poly.coefficients[j])
    return 16.0 * math.ulp(1.0) * float(np.sum(c * xi ** np.arange(c.size)))


def _jump_is_significant(poly: PiecewisePolynomial, e: float, order: int, left: float, right: float) -> bool:
    if left == right:
        return False
    bp = poly.breakpoints
    jl = int(np.searchsorted(bp, e, side="left")) - 1
    jr = int(np.searchsorted(bp, e, side="right")) - 1
    if jl == jr:
        return False  # interior of a piece: both sides are the same value
    ref = max(
        _piece_deriv_scale(poly, max(jl, 0), order),
        _piece_deriv_scale(poly, min(jr, poly.npieces - 1), order),
    )
    return abs(right - left) > _JUMP_RTOL * ref


def _sided(poly: PiecewisePolynomial, e: float, order: int, side: str | None) -> float:
    left, right = poly.one_sided(e, order)
    if side == "left":
        return left
    if side == "right":
        return right
    if _jump_is_significant(poly, e, order, left, right):
        raise InvalidInputError(
            f"derivative of order {order} jumps at E = {e:g}; "
            "request side='left' or side='right'"
        )
    return 0.5 * (left + right)


def _check_side(side) -> None:
    if side not in (None, "left", "right"):
        raise InvalidInputError(f"side must be 'left', 'right' or None, not {side!r}")


def _check_interior(d: PiecewiseDos, e: float) -> None:
    if not d.e_min < e < d.e_max:
        raise InvalidInputError(
            f"energy {e:g} must lie strictly inside ({d.e_min:g}, {d.e_max:g})"
        )


def temperature(d: PiecewiseDos, e, side: str | None = None) -> float:
    """k_B*T = Omega/Omega' at an energy strictly inside the spectrum.

    Returns +inf where Omega' = 0 (the infinite-temperature signal);
    negative values beyond the mode are genuine.  At a knot where
    Omega' jumps, a side ('left' or 'right') must be requested.
    """
    e = float(e)
    _check_side(side)
    _check_interior(d, e)
    w = _sided(d.poly, e, 0, side)
    w1 = _sided(d.poly, e, 1, side)
    if w1 == 0.0:
        return math.inf
    return w / w1


def specific_heat_at_E(d: PiecewiseDos, e, side: str | None = None) -> float:
    """C = (Omega')^2 / ((Omega')^2 - Omega*Omega'') in units of k_B.

    The two-level 0/0 case is defined as 0 (constant Omega: the energy
    cannot respond to temperature); a vanishing denominator alone is
    the divergent-specific-heat signal +inf.
    """
    e = float(e)
    _check_side(side)
    _check_interior(d, e)
    w = _sided(d.poly, e, 0, side)
    w1 = _sided(d.poly, e, 1, side)
    w2 = _sided(d.poly, e, 2, side)
    num = w1 * w1
    den = num - w * w2
    if num == 0.0 and den == 0.0:
        return 0.0
    if den == 0.0:
        return math.inf
    return num / den


def energy_of_temperature(d: PiecewiseDos, t, branch: str = "first-monotone") -> float:
    """Invert T(E) = Omega/Omega' on a monotone branch.

    'first-monotone' is the positive-temperature interval (E_min,
    E_mode) with E_mode the smallest maximizer of Omega; 'negative'
    is (E_mode', E_max) beyond the largest maximizer.  Bisection on the
    monotone branch brackets the root of Omega - t*Omega', a Newton
    polish with exact derivatives finishes it, and the residual is
    required to meet 1e-12 relative — a temperature that falls inside
    a jump of T(E) at a knot is reported as unattainable.
    """
    t = float(t)
    if branch not in ("first-monotone", "negative"):
        raise InvalidInputError(f"unknown branch {branch!r}")
    if not math.isfinite(t):
        raise InvalidInputError("temperature must be finite")
    x_lo, peak = d.poly.argmax(smallest=True)
    x_hi = d.poly.argmax(smallest=False)[0]
    width = d.e_max - d.e_min
    if branch == "first-monotone":
        if not x_lo > d.e_min:
            raise NoSolutionError(
                "Omega never increases; the positive-temperature branch is empty"
            )
        l1 = d.poly.one_sided(x_lo, 1)[0]
        sup = peak / l1 if l1 > 0.0 else math.inf
        if not 0.0 < t <= sup * (1.0 + 1e-12):
            raise NoSolutionError(
                f"kB*T = {t:g} not attainable; the increasing branch covers "
                f"(0, {sup:g}]"
            )
        a, b, lsign = d.e_min, x_lo, -1.0
    else:
        if not x_hi < d.e_max:
            raise NoSolutionError(
                "Omega never decreases; the negative-temperature branch is empty"
            )
        r1 = d.poly.one_sided(x_hi, 1)[1]
        low = peak / r1 if r1 < 0.0 else -math.inf
        if not low * (1.0 + 1e-12) <= t < 0.0:
            raise NoSolutionError(
                f"kB*T = {t:g} not attainable; the negative branch covers "
                f"[{low:g}, 0)"
            )
        a, b, lsign = x_hi, d.e_max, 1.0

    def g(x: float) -> float:
        return d.poly.value(x) - t * d.poly.derivative_value(x, 1)

    for _ in range(90):
        mid = 0.5 * (a + b)
        if not a < mid < b:
            break
        if g(mid) * lsign > 0.0:
            a = mid
        else:
            b = mid
    x = 0.5 * (a + b)
    for _ in range(8):
        gp = d.poly.derivative_value(x, 1) - t * d.poly.derivative_value(x, 2)
        if gp == 0.0:
            break
        step = g(x) / gp
        nxt = x - step
        if not a <= nxt <= b:
            break
        x = nxt
        if abs(step) <= 1e-16 * width:
            break
    l0, r0 = d.poly.one_sided(x, 0)
    l1v, r1v = d.poly.one_sided(x, 1)
    res = min(abs(l0 - t * l1v), abs(r0 - t * r1v))
    scale = max(abs(l0), abs(r0), abs(t * l1v), abs(t * r1v), 1e-300)
    if res > 1e-12 * scale:
        raise NoSolutionError(
            f"kB*T = {t:g} falls inside a temperature jump at E = {x:.17g}"
        )
    return float(x)


def thermo_curve(d: PiecewiseDos, n: int = 1000, e_range=None, kb: float = 1.0) -> ThermoCurve:
    """Tabulate S = ln Omega, k_B*T and C on a uniform midpoint grid.

    The grid consists of the n cell midpoints of [lo, hi] (strictly
    inside the support by construction); a point that collides with a
    knot is perturbed by half a grid step so all values are two-sided.
    """
    if n < 2:
        raise InvalidInputError("need at least two grid points")
    if kb <= 0.0:
        raise InvalidInputError("kb must be positive")
    lo, hi = e_range if e_range is not None else (d.e_min, d.e_max)
    if not d.e_min <= lo < hi <= d.e_max:
        raise InvalidInputError("energy range must be ordered and inside the support")
    step = (hi - lo) / n
    grid = lo + (np.arange(n) + 0.5) * step
    span = d.e_max - d.e_min
    for k in d.poly.breakpoints[1:-1]:
        hit = np.abs(grid - k) <= 1e-12 * span
        if np.any(hit):
            shifted = k + 0.5 * step
            grid[hit] = shifted if shifted < hi else k - 0.5 * step
    w = d.poly.value(grid)
    w1 = np.array([d.poly.derivative_value(x, 1) for x in grid])
    w2 = np.array([d.poly.derivative_value(x, 2) for x in grid])
    with np.errstate(divide="ignore", invalid="ignore"):
        entropy = np.log(w)
        temp = np.where(w1 != 0.0, w / np.where(w1 != 0.0, w1, 1.0), math.inf)
        num = w1 * w1
        den = num - w * w2
        heat = np.where(den != 0.0, num / np.where(den != 0.0, den, 1.0), math.inf)
        heat = np.where((num == 0.0) & (den == 0.0), 0.0, heat)
    return ThermoCurve(grid=grid, S=entropy, T=temp, C=heat, kB=float(kb))


def critical_points(d: PiecewiseDos) -> list[CriticalPoint]:
    """One CriticalPoint per interior knot with a derivative jump.

    One-sided derivatives are compared order by order (1..degree); the
    first order whose jump exceeds 1e-8 of the local derivative scale
    is reported.  Knots smooth through order degree are omitted.
    """
    out = []
    for e in d.poly.breakpoints[1:-1]:
        e = float(e)
        for order in range(1, d.degree + 1):
            lv, rv = d.poly.one_sided(e, order)
            if _jump_is_significant(d.poly, e, order, lv, rv):
                w = d.poly.value(e)
                l1, r1 = d.poly.one_sided(e, 1)
                w1 = r1 if order == 1 else 0.5 * (l1 + r1)
                t = math.inf if w1 == 0.0 else w / w1
                out.append(CriticalPoint(e, t, order, (float(lv), float(rv))))
                break
    return out


def _ratio_right(d: PiecewiseDos, x: float) -> float:
    w = d.poly.value(x)
    w1 = d.poly.derivative_value(x, 1)
    if w1 == 0.0:
        return math.inf
    return w / w1


def equilibrate(
    d1: PiecewiseDos, e1: float, n1: int, d2: PiecewiseDos, e2: float, n2: int
) -> EquilibrationResult:
    """Maximize N1 ln Omega1(E1 + eps/N1) + N2 ln Omega2(E2 - eps/N2).

    Golden-section search on the concave entropy localizes the optimum,
    then a safeguarded Newton iteration on the stationarity condition
    beta1 = beta2 (monotone in eps) polishes it.  At an interior smooth
    optimum the returned temperatures agree; an optimum pinned at a
    knot where beta jumps is returned as-is with one-sided (right)
    temperatures, and a maximum at the feasibility edge sets the
    boundary flag.
    """
    if int(n1) != n1 or int(n2) != n2 or n1 < 1 or n2 < 1:
        raise InvalidInputError("constituent counts must be positive integers")
    n1, n2 = int(n1), int(n2)
    e1, e2 = float(e1), float(e2)
    _check_interior(d1, e1)
    _check_interior(d2, e2)
    lo = max(n1 * (d1.e_min - e1), n2 * (e2 - d2.e_max))
    hi = min(n1 * (d1.e_max - e1), n2 * (e2 - d2.e_min))
    span = hi - lo
    inset = 1e-13 * span

    def xs(eps: float) -> tuple[float, float]:
        return e1 + eps / n1, e2 - eps / n2

    def entropy(eps: float) -> float:
        x1, x2 = xs(eps)
        w1v, w2v = d1.poly.value(x1), d2.poly.value(x2)
        if w1v <= 0.0 or w2v <= 0.0:
            return -math.inf
        return n1 * math.log(w1v) + n2 * math.log(w2v)

    def beta(d: PiecewiseDos, x: float) -> float:
        w = d.poly.value(x)
        if w <= 0.0:
            return math.inf if x - d.e_min < d.e_max - x else -math.inf
        return d.poly.derivative_value(x, 1) / w

    def beta_prime(d: PiecewiseDos, x: float) -> float:
        w = d.poly.value(x)
        if w <= 0.0:
            return 0.0
        w1 = d.poly.derivative_value(x, 1)
        w2 = d.poly.derivative_value(x, 2)
        return (w2 * w - w1 * w1) / (w * w)

    def gap(eps: float) -> float:
        x1, x2 = xs(eps)
        return beta(d1, x1) - beta(d2, x2)

    def trusted(eps: float) -> bool:
        x1, x2 = xs(eps)
        return (
            d1.poly.value(x1) > _noise_floor(d1.poly, x1)
            and d2.poly.value(x2) > _noise_floor(d2.poly, x2)
        )

    # near the outer end of a piece the polynomial evaluates by
    # cancellation and Omega drowns in rounding noise, making beta
    # garbage there; push each probe inward until both values clear
    # their noise floors so the bracketing signs are real
    inset_a = inset
    while not trusted(lo + inset_a) and inset_a < 0.015625 * span:
        inset_a *= 8.0
    inset_b = inset
    while not trusted(hi - inset_b) and inset_b < 0.015625 * span:
        inset_b *= 8.0
    a, b = lo + inset_a, hi - inset_b
    ga, gb = gap(a), gap(b)
    if not ga > 0.0 > gb:
        # entropy is monotone across the whole feasible interval
        eps = a if ga <= 0.0 else b
        boundary = True
    else:
        boundary = False
        tol = max(1e-10 * n1 * (d1.e_max - d1.e_min), 4e-16 * span)
        ga_, gb_ = a, b
        c = gb_ - _GOLD * (gb_ - ga_)
        dd = ga_ + _GOLD * (gb_ - ga_)
        fc, fd = entropy(c), entropy(dd)
        while gb_ - ga_ > tol:
            if fc >= fd:
                gb_, dd, fd = dd, c, fc
                c = gb_ - _GOLD * (gb_ - ga_)
                fc = entropy(c)
            else:
                ga_, c, fc = c, dd, fd
                dd = ga_ + _GOLD * (gb_ - ga_)
                fd = entropy(dd)
        # Newton polish on the stationarity condition, safeguarded by
        # the full feasible bracket (gap(a) > 0 > gap(b) holds there);
        # at a knot where beta jumps the fallback bisection takes over
        eps = 0.5 * (ga_ + gb_)
        for _ in range(80):
            gm = gap(eps)
            if gm > 0.0:
                a = eps
            elif gm < 0.0:
                b = eps
            else:
                break
            x1, x2 = xs(eps)
            gp = beta_prime(d1, x1) / n1 + beta_prime(d2, x2) / n2
            nxt = eps - gm / gp if gp != 0.0 else 0.5 * (a + b)
            if not a < nxt < b:
                nxt = 0.5 * (a + b)
            if abs(nxt - eps) <= 4e-16 * max(abs(eps), span):
                eps = nxt
                break
            eps = nxt
    x1, x2 = xs(eps)
    return EquilibrationResult(
        epsilon=float(eps),
        t1=_ratio_right(d1, x1),
        t2=_ratio_right(d2, x2),
        total_entropy=entropy(eps),
        boundary=boundary,
    )
