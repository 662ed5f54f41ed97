"""Closed-form volume analytics for power functions ``x**p`` with ``p > 1``.

Everything here evaluates in O(n) for n linearization pieces: the exact
volume of the perspective relaxation of the tangent under-estimator, its
gradient and tridiagonal Hessian in the interior breakpoints, the
stationarity residual driving Newton's method, the quadratic special cases,
and the lighter naive-relaxation variants obtained by extending the
function linearly down to the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, HypothesisViolated
from .underestimator import (
    Breakpoints,
    ConvexFunction,
    Interval,
    build_underestimator,
)

# Exponents this close to 2 are routed through the exact quadratic formulas.
_QUADRATIC_EPS = 1e-12

_MIN_P = 1.0 + 1e-9


def _pow(x, q):
    """``x**q`` with ``0**q := 0`` for q > 0 and ``x**0 := 1``.

    The zero short-circuit is the continuous extension used by every
    formula in this module when the interval starts at zero.  Callers must
    not pass ``x == 0`` with ``q < 0``; those limits are handled explicitly
    where they occur.
    """
    if q == 0.0:
        return np.ones_like(x) if isinstance(x, np.ndarray) else 1.0
    if isinstance(x, np.ndarray):
        out = np.zeros_like(x)
        nz = x != 0.0
        out[nz] = x[nz] ** q
        return out
    return 0.0 if x == 0.0 else x**q


class RelaxationKind(Enum):
    """The five relaxations of the on/off disjunction compared here."""

    NR = "nr"  # naive relaxation of f
    PR = "pr"  # perspective relaxation of f
    PL_PR = "plpr"  # perspective relaxation of the PL under-estimator
    E_NR = "enr"  # extend f linearly to the origin, then naive
    PL_E_NR = "plenr"  # PL under-estimate, extend to the origin, then naive

    @classmethod
    def from_tag(cls, tag: str) -> "RelaxationKind":
        try:
            return cls(tag)
        except ValueError:
            raise DomainError(
                f"unknown relaxation {tag!r}, expected one of "
                f"{[k.value for k in cls]}"
            ) from None


@dataclass(frozen=True)
class PowerFn:
    """``f(x) = x**p`` on an interval, ``p > 1`` with a safety margin."""

    p: float
    interval: Interval

    def __post_init__(self) -> None:
        if not self.p >= _MIN_P:
            raise DomainError(f"exponent must be at least {_MIN_P}, got {self.p}")

    def __call__(self, x):
        return _pow(x, self.p)

    def deriv(self, x):
        return self.p * _pow(x, self.p - 1.0)

    def oracle(self) -> ConvexFunction:
        """Black-box view of this function for the under-estimator builder."""
        return ConvexFunction(
            fn=lambda t: _pow(t, self.p),
            deriv=lambda t: self.p * _pow(t, self.p - 1.0),
            interval=self.interval,
        )


def volume_quadratic(bp: Breakpoints) -> float:
    """Exact volume of the PL perspective relaxation for ``f(x) = x**2``."""
    xi = bp.xi
    lo, up = xi[0], xi[-1]
    s = float((xi[1:] * xi[:-1] * (xi[:-1] - xi[1:])).sum())
    return (s + up**3 - 2.0 * up * up * lo + 2.0 * up * lo * lo - lo**3) / 12.0


def volume_power_closed_form(pf: PowerFn, bp: Breakpoints) -> float:
    """Exact volume of the PL perspective relaxation for ``x**p``.

    Agrees with the fan-triangulation volume of the corresponding
    under-estimator; this form never constructs the tangent vertices.
    """
    if pf.interval != bp.interval:
        raise DomainError("breakpoints cover a different interval than the function")
    p = pf.p
    if abs(p - 2.0) < _QUADRATIC_EPS:
        return volume_quadratic(bp)
    xi = bp.xi
    lo, up = xi[0], xi[-1]
    a, b = xi[:-1], xi[1:]
    am, bm = _pow(a, p - 1.0), _pow(b, p - 1.0)
    s = float((am * bm * (b - a) ** 2 / (bm - am)).sum())
    return (
        -((p - 1.0) ** 2) / (6.0 * p) * s
        + (p - 1.0) / (6.0 * p) * (_pow(up, p + 1.0) - _pow(lo, p + 1.0))
        - (_pow(up, p) * lo - up * _pow(lo, p)) / 6.0
    )


def _slope_up(p: float, mid, hi):
    """Positive factor tied to the tangent pair at (mid, hi), hi > mid."""
    num = _pow(mid, p) + (p - 1.0) * _pow(hi, p) - p * mid * _pow(hi, p - 1.0)
    return num / (_pow(hi, p - 1.0) - _pow(mid, p - 1.0))


def _slope_dn(p: float, mid, lo):
    """Positive factor tied to the tangent pair at (lo, mid), lo < mid."""
    num = _pow(mid, p) + (p - 1.0) * _pow(lo, p) - p * mid * _pow(lo, p - 1.0)
    return num / (_pow(mid, p - 1.0) - _pow(lo, p - 1.0))


def _coupling(p: float, lo: float, hi: float) -> float:
    """Hessian coupling of the adjacent pair (lo, hi), positive for lo > 0.

    At ``lo == 0`` the expression has a one-sided limit only for ``p >= 2``
    (zero for p > 2, ``hi/6`` at p = 2) and diverges for ``p < 2``; the
    divergent case is returned as ``inf`` and only ever used through the
    finite scaled product ``(lo/hi) * coupling``.
    """
    if lo == 0.0:
        if p > 2.0 + _QUADRATIC_EPS:
            return 0.0
        if abs(p - 2.0) <= _QUADRATIC_EPS:
            return hi / 6.0
        return math.inf
    n1 = (p - 1.0) * hi**p + lo**p - p * hi ** (p - 1.0) * lo
    n2 = hi**p + (p - 1.0) * lo**p - p * hi * lo ** (p - 1.0)
    den = (hi ** (p - 1.0) - lo ** (p - 1.0)) ** 3
    return (p - 1.0) ** 2 / (3.0 * p) * lo ** (p - 2.0) * hi ** (p - 2.0) * n1 * n2 / den


def _coupling_scaled(p: float, lo: float, hi: float) -> float:
    """``(lo/hi) * _coupling(p, lo, hi)``, finite for every ``lo >= 0``."""
    if lo == 0.0:
        return 0.0
    return (lo / hi) * _coupling(p, lo, hi)


def _jac_offdiag(p: float, mid, nb):
    """Derivative of the stationarity residual at ``mid`` w.r.t. neighbor ``nb``."""
    num = (p - 1.0) * _pow(mid, p) + _pow(nb, p) - p * _pow(mid, p - 1.0) * nb
    return -(p - 1.0) * _pow(nb, p - 2.0) * num / (_pow(mid, p - 1.0) - _pow(nb, p - 1.0)) ** 2


def _jac_offdiag_scaled(p: float, mid, nb):
    """``nb`` times :func:`_jac_offdiag`, safe at ``nb == 0``."""
    num = (p - 1.0) * _pow(mid, p) + _pow(nb, p) - p * _pow(mid, p - 1.0) * nb
    return -(p - 1.0) * _pow(nb, p - 1.0) * num / (_pow(mid, p - 1.0) - _pow(nb, p - 1.0)) ** 2


@dataclass(frozen=True, eq=False)
class GradientSystem:
    """First- and second-order data of the volume at fixed breakpoints.

    ``residual`` is the rescaled stationarity system whose unique zero is
    the optimal placement; it vanishes exactly where ``grad`` does.  The
    Hessian of the volume in the interior breakpoints is the symmetric
    tridiagonal matrix with diagonal ``hess_diag`` and off-diagonal
    ``-hess_offdiag``; the Newton Jacobian of ``residual`` is the separate
    (non-symmetric) tridiagonal held in ``jac_sub/jac_diag/jac_sup``.
    """

    p: float
    xi: np.ndarray
    residual: np.ndarray  # stationarity system, one entry per interior point
    grad: np.ndarray  # partial volume derivatives, same layout
    hess_diag: np.ndarray
    hess_offdiag: np.ndarray  # positive couplings; Hessian entries are negated
    coupling: np.ndarray  # couplings of all n adjacent pairs, boundary included
    jac_sub: np.ndarray
    jac_diag: np.ndarray
    jac_sup: np.ndarray

    @property
    def b0(self) -> float:
        """Boundary coupling of the leftmost pair (may be ``inf`` at lower == 0)."""
        return float(self.coupling[0])

    def hessian(self) -> np.ndarray:
        m = self.hess_diag.size
        h = np.zeros((m, m))
        h[np.arange(m), np.arange(m)] = self.hess_diag
        if m > 1:
            k = np.arange(m - 1)
            h[k, k + 1] = h[k + 1, k] = -self.hess_offdiag
        return h

    def jacobian(self) -> np.ndarray:
        m = self.jac_diag.size
        j = np.zeros((m, m))
        j[np.arange(m), np.arange(m)] = self.jac_diag
        if m > 1:
            k = np.arange(m - 1)
            j[k, k + 1] = self.jac_sup
            j[k + 1, k] = self.jac_sub
        return j


def gradient_system(pf: PowerFn, bp: Breakpoints) -> GradientSystem:
    """Assemble residual, gradient, Hessian and Newton Jacobian at ``bp``.

    Needs at least one interior breakpoint.  All entries are evaluated with
    the ``0**q := 0`` convention so intervals starting at zero work for
    every ``p > 1``.
    """
    if pf.interval != bp.interval:
        raise DomainError("breakpoints cover a different interval than the function")
    if bp.n < 2:
        raise DomainError("need at least one interior breakpoint")
    p = float(pf.p)
    xi = bp.xi
    n = bp.n
    lo, mid, hi = xi[:-2], xi[1:-1], xi[2:]

    t_up = _slope_up(p, mid, hi)
    t_dn = _slope_dn(p, mid, lo)
    residual = t_dn - t_up
    grad = -(p - 1.0) * _pow(mid, p - 2.0) / (6.0 * p) * (t_up**2 - t_dn**2)

    coupling = np.array(
        [_coupling(p, float(a), float(b)) for a, b in zip(xi[:-1], xi[1:])]
    )
    prev_scaled = np.empty(n - 1)
    prev_scaled[0] = _coupling_scaled(p, float(xi[0]), float(xi[1]))
    prev_scaled[1:] = (mid[:-1] / mid[1:]) * coupling[1 : n - 1]
    hess_diag = (p / mid) * grad + prev_scaled + (hi / mid) * coupling[1:]
    hess_offdiag = coupling[1 : n - 1].copy()

    jac_sup = _jac_offdiag(p, mid[:-1], hi[:-1])
    jac_sub = _jac_offdiag(p, mid[1:], lo[1:])
    s_lo = _jac_offdiag_scaled(p, mid, lo)
    s_hi = hi * _jac_offdiag(p, mid, hi)
    jac_diag = (residual - s_lo - s_hi) / mid

    return GradientSystem(
        p=p,
        xi=xi,
        residual=residual,
        grad=grad,
        hess_diag=hess_diag,
        hess_offdiag=hess_offdiag,
        coupling=coupling,
        jac_sub=jac_sub,
        jac_diag=jac_diag,
        jac_sup=jac_sup,
    )


def bordered_hessian_eigs(pf: PowerFn, bp: Breakpoints) -> np.ndarray:
    """Ascending eigenvalues of the gradient-bordered Hessian.

    The quasiconvexity certificate asks this matrix to have exactly one
    negative eigenvalue wherever the gradient is nonzero.  Undefined at
    stationary points (zero border) and for fewer than two interior
    breakpoints; both raise :class:`DomainError`.
    """
    if bp.n < 3:
        raise DomainError("bordered test needs at least two interior breakpoints")
    sys = gradient_system(pf, bp)
    scale = max(1.0, bp.interval.upper) ** pf.p
    if np.abs(sys.grad).max() <= 1e-11 * scale:
        raise DomainError("gradient vanishes here; the bordered test does not apply")
    m = sys.grad.size
    b = np.zeros((m + 1, m + 1))
    b[:m, :m] = sys.hessian()
    b[:m, m] = b[m, :m] = sys.grad
    return np.linalg.eigvalsh(b)


def volume_naive_quadratic(iv: Interval) -> float:
    """Volume of the naive relaxation of ``x**2`` on the interval."""
    w = iv.width
    return w**3 / 18.0 + (iv.upper**3 - iv.lower**3) / 36.0


def volume_perspective_quadratic(iv: Interval) -> float:
    """Volume of the exact perspective relaxation of ``x**2``."""
    return iv.width**3 / 18.0


def volume_extended_naive_quadratic(iv: Interval) -> float:
    """Naive-relaxation volume of ``x**2`` linearly extended to the origin."""
    lo, up = iv.lower, iv.upper
    return (up - lo) ** 2 * (up * up + lo * lo) / (12.0 * up)


def volume_pl_extended_naive(f: ConvexFunction, bp: Breakpoints) -> float:
    """Naive-relaxation volume of the PL under-estimator extended to zero.

    Requires ``f`` increasing with its slope at the left endpoint at least
    the chord slope from the origin, so the extension stays convex;
    violations raise :class:`HypothesisViolated`.  At ``lower == 0`` no
    extension is needed and the formula applies as is.  O(n).
    """
    est = build_underestimator(f, bp)
    xi = bp.xi
    lo, up = float(xi[0]), float(xi[-1])
    f_lo, f_up = float(f.fn(lo)), float(f.fn(up))
    d = np.array([float(f.deriv(float(t))) for t in xi])
    if d[0] < -1e-12:
        raise HypothesisViolated("function must be increasing on the interval")
    if lo > 0.0 and d[0] < f_lo / lo - 1e-12:
        raise HypothesisViolated(
            "slope at the left endpoint must be at least the chord slope from the origin"
        )
    t = est.x
    s = float(
        (((t[1:] ** 2 - t[:-1] ** 2) / 2.0 - (t[1:] ** 3 - t[:-1] ** 3) / (6.0 * up)) * d).sum()
    )
    return (
        s
        - (up + 2.0 * lo) / 6.0 * (f_up - f_lo)
        - (up - lo) / (6.0 * up) * (up * f_up - lo * f_lo)
    )


def refinement_thresholds(iv: Interval, gap: float) -> tuple[int, int, float]:
    """Piece counts making the PL variants come within ``gap`` of their limits.

    Returns ``(n1, n2, ratio)``: the least piece counts for which the
    equally-spaced quadratic PL+E+NR (resp. PL+PR) volume exceeds its
    n-to-infinity limit by less than ``gap``, and the exact real ratio of
    the two bounds, ``sqrt(1.5 * (1 - lower/upper))``, which never exceeds
    ``sqrt(1.5)``.
    """
    if not gap > 0.0:
        raise DomainError("gap must be positive")
    w, up = iv.width, iv.upper
    bound_naive = w * w / math.sqrt(24.0 * up * gap)
    bound_persp = math.sqrt(w**3 / gap) / 6.0
    # least integers strictly above the bounds, exact-integer bounds bump up
    n1 = int(math.floor(bound_naive)) + 1
    n2 = int(math.floor(bound_persp)) + 1
    ratio = math.sqrt(1.5 * (1.0 - iv.lower / up))
    return n1, n2, ratio


@dataclass(frozen=True)
class PowerCurvatureTerms:
    """Auxiliary scalar terms whose signs certify the curvature analysis.

    Every term vanishes at ``x == 1``.  ``tangent_excess`` and
    ``envelope_excess`` are positive for ``x != 1``; ``curvature_gap`` and
    ``slope_mean_gap`` flip sign at ``p == 2``; ``log_weighted_gap`` stays
    positive.  Consumed by property tests only.
    """

    tangent_excess: float
    envelope_excess: float
    curvature_gap: float
    slope_mean_gap: float
    log_weighted_gap: float


def power_curvature_terms(p: float, x: float) -> PowerCurvatureTerms:
    if not p > 1.0:
        raise DomainError("need p > 1")
    if not x > 0.0:
        raise DomainError("need x > 0")
    xp = x**p
    xp1 = x ** (p - 1.0)
    return PowerCurvatureTerms(
        tangent_excess=xp + (p - 1.0) - p * x,
        envelope_excess=(p - 1.0) * xp + 1.0 - p * xp1,
        curvature_gap=(p - 2.0) * (xp - 1.0) - p * (xp1 - x),
        slope_mean_gap=(xp1 - 1.0) ** 2 - (p - 1.0) ** 2 * x ** (p - 2.0) * (x - 1.0) ** 2,
        log_weighted_gap=p * (p - 1.0) * (1.0 - x) * xp1 * math.log(x)
        + (xp1 - 1.0) * (xp - 1.0),
    )
