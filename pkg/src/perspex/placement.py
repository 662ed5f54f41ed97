"""Optimal placement of linearization points.

For quadratics the volume-minimizing breakpoints are equally spaced in
closed form.  For every other exponent the unique minimizer is the zero of
a tridiagonal stationarity system, found by a Newton iteration that is
provably monotone from the equally-spaced start: coordinates only move
down for ``1 < p < 2`` and only up for ``p > 2``.  This module also provides
the analytic bracket for a single interior point, the normalized bracket
width as a function of the exponent, and exponent sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    MaxIterExceeded,
    MonotonicityViolated,
    SingularJacobian,
)
from .power import (
    GradientSystem,
    PowerFn,
    _pow,
    gradient_system,
    volume_power_closed_form,
)
from .underestimator import Breakpoints, Interval

_QUADRATIC_EPS = 1e-12

# Slack for the per-coordinate direction guard on canonical-start runs.
_MONOTONE_SLACK = 1e-12


def optimize_quadratic(iv: Interval, n: int) -> tuple[Breakpoints, float]:
    """Unique volume-minimizing breakpoints for ``x**2``: equal spacing.

    Returns the breakpoints and the minimum volume
    ``width**3/18 + width**3/(36 n**2)``.  ``n = 1`` is allowed and has no
    interior point.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    bp = Breakpoints.equally_spaced(iv, n)
    w = iv.width
    return bp, w**3 / 18.0 + w**3 / (36.0 * n * n)


def solve_tridiagonal(sub, diag, sup, rhs) -> np.ndarray:
    """Thomas elimination for a tridiagonal system, no pivoting.

    ``sub`` and ``sup`` have one entry less than ``diag``.  Pivoting is not
    needed for the Newton Jacobians solved here (M-matrices at every
    iterate), but each pivot is still guarded: a magnitude below
    ``1e-14`` times its row scale raises :class:`SingularJacobian`.
    """
    d = np.asarray(diag, dtype=float)
    a = np.asarray(sub, dtype=float)
    c = np.asarray(sup, dtype=float)
    r = np.asarray(rhs, dtype=float)
    m = d.size
    if a.size != m - 1 or c.size != m - 1 or r.size != m:
        raise DomainError("tridiagonal bands have inconsistent lengths")

    cp = np.empty(max(m - 1, 0))
    dp = np.empty(m)
    scale = max(abs(d[0]), abs(c[0]) if m > 1 else 0.0, 1e-300)
    if abs(d[0]) <= 1e-14 * scale:
        raise SingularJacobian("zero pivot in row 0")
    if m > 1:
        cp[0] = c[0] / d[0]
    dp[0] = r[0] / d[0]
    for i in range(1, m):
        den = d[i] - a[i - 1] * cp[i - 1]
        scale = max(abs(d[i]), abs(a[i - 1]), abs(c[i]) if i < m - 1 else 0.0, 1e-300)
        if abs(den) <= 1e-14 * scale:
            raise SingularJacobian(f"zero pivot in row {i}")
        if i < m - 1:
            cp[i] = c[i] / den
        dp[i] = (r[i] - a[i - 1] * dp[i - 1]) / den
    x = np.empty(m)
    x[m - 1] = dp[m - 1]
    for i in range(m - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def solve_newton_system(sys: GradientSystem, rhs) -> np.ndarray:
    """Solve the stationarity Jacobian against ``rhs`` in O(n)."""
    return solve_tridiagonal(sys.jac_sub, sys.jac_diag, sys.jac_sup, rhs)


@dataclass(eq=False)
class NewtonTrace:
    """Record of one Newton run.

    ``direction`` is the guaranteed movement of every coordinate from the
    equally-spaced start: ``"decreasing"`` for ``1 < p < 2``,
    ``"increasing"`` for ``p > 2``, or ``"stationary-at-start"`` when the
    start already satisfies the tolerance (always the case at ``p = 2``).
    ``condition_numbers`` holds the infinity-norm condition of the Jacobian
    at each iterate; since those Jacobians have nonnegative inverses the
    number is exact, at the cost of one extra tridiagonal solve.
    """

    iterates: list[Breakpoints] = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)
    condition_numbers: list[float] = field(default_factory=list)
    direction: str = "stationary-at-start"
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1


def _jacobian_condition(sys: GradientSystem) -> float:
    """Infinity-norm condition number of the stationarity Jacobian.

    Uses the row sums of the inverse, obtained from one solve against the
    all-ones vector; exact whenever the inverse is nonnegative, which holds
    at every iterate reached from the equally-spaced start.
    """
    m = sys.jac_diag.size
    row = np.abs(sys.jac_diag).copy()
    if m > 1:
        row[:-1] += np.abs(sys.jac_sup)
        row[1:] += np.abs(sys.jac_sub)
    try:
        inv_rows = solve_tridiagonal(sys.jac_sub, sys.jac_diag, sys.jac_sup, np.ones(m))
    except SingularJacobian:
        return math.inf
    return float(row.max() * np.abs(inv_rows).max())


def _direction_for(p: float) -> str:
    if p < 2.0 - _QUADRATIC_EPS:
        return "decreasing"
    if p > 2.0 + _QUADRATIC_EPS:
        return "increasing"
    return "stationary-at-start"


def _interior_feasible(interior: np.ndarray, lo: float, up: float) -> bool:
    if interior[0] <= lo or interior[-1] >= up:
        return False
    return bool((np.diff(interior) > 0.0).all())


def newton_optimize(
    pf: PowerFn,
    n: int,
    tol: float | None = None,
    max_iter: int = 200,
    start=None,
) -> tuple[Breakpoints, NewtonTrace]:
    """Minimize the PL perspective volume over the interior breakpoints.

    Runs the undamped Newton iteration on the stationarity system from the
    equally-spaced start, which converges monotonically for every ``p > 1``
    with all iterates strictly interior; a canonical-start iterate moving
    against the guaranteed direction by more than ``1e-12`` raises
    :class:`MonotonicityViolated` since the theory forbids it.  The default
    tolerance scales with the residual, ``1e-12 * upper**(p-1)``.

    Runs started from ``start`` (a vector of ``n - 1`` interior points)
    carry no direction guarantee; their steps are halved as needed to stay
    strictly interior and ordered.
    """
    if n < 2:
        raise DomainError("optimization needs at least one interior point (n >= 2)")
    if max_iter < 1:
        raise DomainError("max_iter must be positive")
    iv = pf.interval
    lo, up = iv.lower, iv.upper
    if tol is None:
        tol = 1e-12 * _pow(up, pf.p - 1.0)
    if not tol > 0.0:
        raise DomainError("tolerance must be positive")

    canonical = start is None
    if canonical:
        xi = np.linspace(lo, up, n + 1)
    else:
        interior = np.asarray(start, dtype=float).ravel()
        if interior.size != n - 1:
            raise DomainError(f"start must supply {n - 1} interior points")
        if not _interior_feasible(interior, lo, up):
            raise DomainError("start must be strictly increasing inside the interval")
        xi = np.concatenate(([lo], interior, [up]))

    trace = NewtonTrace()
    for _ in range(max_iter + 1):
        bp = Breakpoints(iv, xi)
        sys = gradient_system(pf, bp)
        res = float(np.abs(sys.residual).max())
        trace.iterates.append(bp)
        trace.residual_norms.append(res)
        trace.condition_numbers.append(_jacobian_condition(sys))
        if res <= tol:
            if trace.iterations > 0:
                trace.direction = _direction_for(pf.p)
            trace.converged = True
            return bp, trace
        if trace.iterations >= max_iter:
            break

        step = solve_newton_system(sys, sys.residual)
        interior = xi[1:-1] - step
        if canonical:
            if pf.p < 2.0 and (interior > xi[1:-1] + _MONOTONE_SLACK).any():
                raise MonotonicityViolated(
                    f"a coordinate increased at p={pf.p}; decreasing run expected"
                )
            if pf.p > 2.0 and (interior < xi[1:-1] - _MONOTONE_SLACK).any():
                raise MonotonicityViolated(
                    f"a coordinate decreased at p={pf.p}; increasing run expected"
                )
            if not _interior_feasible(interior, lo, up):
                raise MonotonicityViolated("an iterate left the open ordered interior")
        else:
            shrink = 0
            while not _interior_feasible(interior, lo, up):
                step *= 0.5
                interior = xi[1:-1] - step
                shrink += 1
                if shrink > 80:
                    raise MaxIterExceeded("damping failed to keep the iterate interior", trace)
        xi = np.concatenate(([lo], interior, [up]))

    trace.direction = _direction_for(pf.p)
    raise MaxIterExceeded(
        f"no convergence to {tol:g} within {max_iter} iterations "
        f"(last residual {trace.residual_norms[-1]:g})",
        trace,
    )


@dataclass(frozen=True)
class SinglePointBounds:
    """Analytic bracket for the optimal single interior breakpoint.

    ``lower < xi_1 < upper`` always holds for the minimizer; at ``p = 2``
    the bracket collapses onto the midpoint.  ``half`` is the midpoint and
    ``power_mean`` the (p-1)-power mean of the endpoints; together with the
    bracket they order one way for ``1 < p < 2`` and the opposite way for
    ``p > 2``.
    """

    lower: float
    upper: float
    half: float
    power_mean: float


def single_point_bounds(pf: PowerFn) -> SinglePointBounds:
    lo, up = pf.interval.lower, pf.interval.upper
    p = pf.p
    half = 0.5 * (lo + up)
    if abs(p - 2.0) < _QUADRATIC_EPS:
        return SinglePointBounds(lower=half, upper=half, half=half, power_mean=half)
    ratio_bound = (p - 1.0) * (_pow(up, p) - _pow(lo, p)) / (
        p * (_pow(up, p - 1.0) - _pow(lo, p - 1.0))
    )
    mean_bound = ((_pow(up, p) - _pow(lo, p)) / (p * (up - lo))) ** (1.0 / (p - 1.0))
    power_mean = (0.5 * (_pow(up, p - 1.0) + _pow(lo, p - 1.0))) ** (1.0 / (p - 1.0))
    return SinglePointBounds(
        lower=min(ratio_bound, mean_bound),
        upper=max(ratio_bound, mean_bound),
        half=half,
        power_mean=power_mean,
    )


@dataclass(frozen=True)
class BracketGap:
    """Normalized single-point bracket width at endpoint ratio ``t = lower/upper``.

    Positive for ``1 < p < 2``, exactly zero at ``p = 2``, negative for
    ``p > 2`` (the bracket formulas swap sides there).
    """

    p: float
    endpoint_ratio: float
    value: float


def bracket_gap(p: float, t: float) -> BracketGap:
    if not p > 1.0:
        raise DomainError("need p > 1")
    if not 0.0 <= t < 1.0:
        raise DomainError("endpoint ratio must lie in [0, 1)")
    if abs(p - 2.0) < _QUADRATIC_EPS:
        return BracketGap(p=p, endpoint_ratio=t, value=0.0)
    tp = _pow(t, p)
    tp1 = _pow(t, p - 1.0)
    value = (
        ((1.0 - tp) / (p * (1.0 - t))) ** (1.0 / (p - 1.0))
        - (p - 1.0) * (1.0 - tp) / (p * (1.0 - tp1))
    ) / (1.0 - t)
    return BracketGap(p=p, endpoint_ratio=t, value=value)


def min_bracket_gap() -> tuple[float, float]:
    """Exponent with the most negative bracket gap at ratio zero.

    The rescaled derivative of the gap is increasing in ``p``, so its sign
    change on ``[2, 50]`` is unique and plain bisection to ``1e-10``
    suffices.  Returns the exponent and the gap value there, roughly
    ``(6.3212, -0.1347)``.
    """

    def slope_sign(p: float) -> float:
        return -p / (p - 1.0) + p * p * math.log(p) / (p - 1.0) ** 2 - p ** (1.0 / (p - 1.0))

    a, b = 2.0, 50.0
    while b - a > 1e-10:
        c = 0.5 * (a + b)
        if slope_sign(c) < 0.0:
            a = c
        else:
            b = c
    p0 = 0.5 * (a + b)
    return p0, bracket_gap(p0, 0.0).value


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Optimal interior breakpoints per exponent, one row per grid entry."""

    interval: Interval
    n: int
    p: np.ndarray
    interior: np.ndarray  # shape (len(p), n - 1)


def sweep_optimal_points(iv: Interval, n: int, p_grid) -> SweepResult:
    """Optimal placements across an increasing exponent grid.

    Every optimal coordinate is increasing in the exponent, so each column
    of the result is monotone down the rows.  Solver errors propagate from
    the offending row.
    """
    grid = np.asarray(p_grid, dtype=float).ravel()
    if grid.size == 0:
        raise DomainError("empty exponent grid")
    if not (grid > 1.0).all():
        raise DomainError("every exponent must exceed 1")
    if grid.size > 1 and not (np.diff(grid) > 0.0).all():
        raise DomainError("exponent grid must be strictly increasing")
    rows = np.empty((grid.size, n - 1))
    for i, p in enumerate(grid):
        bp, _ = newton_optimize(PowerFn(float(p), iv), n)
        rows[i] = bp.interior
    return SweepResult(interval=iv, n=n, p=grid, interior=rows)


def concave_surrogate(pf: PowerFn, xi1: float) -> tuple[float, float]:
    """Log-concave surrogate for single-point placement at ``p > 2``.

    Returns ``(value, offset)`` where ``value = offset - volume`` for the
    three-point breakpoints ``(lower, xi1, upper)``.  The offset makes the
    surrogate positive on the open interval and strictly log-concave, so
    maximizing it finds the unique volume minimizer even though the volume
    itself is only quasiconvex there.
    """
    p = pf.p
    if not p > 2.0:
        raise DomainError("the surrogate requires p > 2")
    lo, up = pf.interval.lower, pf.interval.upper
    if not lo < xi1 < up:
        raise DomainError("xi1 must lie strictly inside the interval")
    offset = (
        ((p - 1.0) * _pow(up, p) + _pow(lo, p) - p * _pow(up, p - 1.0) * lo)
        * (_pow(up, p) + (p - 1.0) * _pow(lo, p) - p * up * _pow(lo, p - 1.0))
        / (6.0 * p * (_pow(up, p - 1.0) - _pow(lo, p - 1.0)))
    )
    vol = volume_power_closed_form(pf, Breakpoints.from_interior(pf.interval, [xi1]))
    return offset - vol, offset
