"""Scalar functions zeta, xi and rho, their monotone branch inverses, and the
threshold constants T and T(a).

    zeta_t(s) = s + (1 - t) ln(1 - s)
    xi_s(t)   = zeta_t(t) - zeta_t(s)
    rho(a, b, c) = xi_a(b) / xi_a(c)    for a < 1
                 = (1 - b) / (1 - c)    for a = 1

Infinite values are returned as ``math.inf``.
"""

from __future__ import annotations

import enum
import math

from .errors import DomainError

INV_E = math.exp(-1.0)
ROOT_TOL = 1e-12
MAX_BISECT = 200
RANGE_SLACK = 1e-12


class Branch(enum.Enum):
    XI_DOWN = "xi_down"
    XI_UP = "xi_up"
    RHO_UP1 = "rho_up1"
    RHO_DOWN = "rho_down"
    RHO_UP2 = "rho_up2"


def bisect(f, lo: float, hi: float, increasing: bool, tol: float = ROOT_TOL,
           max_iter: int = MAX_BISECT) -> float:
    """Root of a monotone ``f`` on ``[lo, hi]``.

    Only the sign of ``f`` is used, so infinite values at the ends are fine.
    Returns the bracket midpoint once it is narrower than ``tol``.
    """
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def zeta(t: float, s: float) -> float:
    if not (0.0 <= t <= 1.0 and 0.0 <= s <= 1.0):
        raise DomainError(f"zeta needs t and s in [0, 1], got t={t}, s={s}")
    if s == 1.0:
        if t == 1.0:
            return 1.0
        raise DomainError("zeta_t(1) is -inf for t < 1")
    if not s < 1.0:
        raise DomainError(f"zeta needs s < 1, got {s}")
    return s + (1.0 - t) * math.log1p(-s)


# Taylor coefficients of -d - ln(1 - d) = sum_{k>=2} d^k / k
_PHI_COEFFS = [1.0 / k for k in range(24, 1, -1)]


def _phi(d: float) -> float:
    acc = 0.0
    for coef in _PHI_COEFFS:
        acc = acc * d + coef
    return acc * d * d


def xi(s: float, t: float) -> float:
    """xi_s(t) = zeta_t(t) - zeta_t(s), evaluated without cancellation near t = s."""
    if not 0.0 <= s < 1.0:
        raise DomainError(f"xi needs 0 <= s < 1, got s={s}")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"xi needs 0 <= t <= 1, got t={t}")
    if t == 1.0:
        return 1.0 - s
    if t == s:
        return 0.0
    # xi_s(t) = (1 - t) * phi(d) with d = (s - t)/(1 - t)
    d = (s - t) / (1.0 - t)
    if abs(d) < 0.1:
        return (1.0 - t) * _phi(d)
    if t == 0.0:
        return -s - math.log1p(-s)
    return (t - s) + (1.0 - t) * (math.log1p(-t) - math.log1p(-s))


def _check_bc(b: float, c: float):
    if not 0.0 <= c < b <= 1.0:
        raise DomainError(f"rho needs 0 <= c < b <= 1, got b={b}, c={c}")


def rho(a: float, b: float, c: float) -> float:
    """Tight upper bound on D(v||u)/D(w||u) for collinear u=z(a), v=z(b), w=z(c)."""
    _check_bc(b, c)
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"rho needs 0 <= a <= 1, got a={a}")
    if a == 1.0:
        return (1.0 - b) / (1.0 - c)
    if a == c:
        return math.inf
    if a == b:
        return 0.0
    return xi(a, b) / xi(a, c)


def zeta_ratio(b: float, c: float) -> float:
    """zeta_b(b) / zeta_c(c), which is rho(0, b, c); ``inf`` when c = 0."""
    den = zeta(c, c)
    if den == 0.0:
        return math.inf
    return zeta(b, b) / den


def _in_range(y: float, lo: float, hi: float) -> bool:
    return lo - RANGE_SLACK <= y <= hi + RANGE_SLACK


def xi_inv(s: float, branch: Branch, y: float) -> float:
    """The t on one monotone branch of xi_s with xi_s(t) = y.

    XI_DOWN covers [0, s], XI_UP covers [s, 1].
    """
    if not 0.0 <= s < 1.0:
        raise DomainError(f"xi_inv needs 0 <= s < 1, got {s}")
    if branch is Branch.XI_DOWN:
        top = xi(s, 0.0)
        if not _in_range(y, 0.0, top):
            raise DomainError(f"y={y} out of branch range [0, {top}]")
        if y >= top:
            return 0.0
        if y <= 0.0:
            return s
        return bisect(lambda t: xi(s, t) - y, 0.0, s, increasing=False)
    if branch is Branch.XI_UP:
        top = 1.0 - s
        if not _in_range(y, 0.0, top):
            raise DomainError(f"y={y} out of branch range [0, {top}]")
        if y >= top:
            return 1.0
        if y <= 0.0:
            return s
        return bisect(lambda t: xi(s, t) - y, s, 1.0, increasing=True)
    raise DomainError(f"{branch} is not a xi branch")


def rho_inv(b: float, c: float, branch: Branch, r: float) -> float:
    """The a on one monotone branch of rho(., b, c) with rho(a, b, c) = r.

    RHO_UP1 covers [0, c), RHO_DOWN covers (c, b], RHO_UP2 covers [b, 1].
    Bisection runs to full double resolution, since rho is steep near
    a = 1 and next to the pole at c.
    """
    _check_bc(b, c)
    f = lambda a: rho(a, b, c) - r  # noqa: E731
    if branch is Branch.RHO_UP1:
        low = zeta_ratio(b, c)
        if c == 0.0 or math.isnan(r) or r < low - RANGE_SLACK:
            raise DomainError(f"r={r} out of branch range [{low}, inf)")
        if r <= low:
            return 0.0
        return bisect(f, 0.0, c, increasing=True, tol=0.0)
    if branch is Branch.RHO_DOWN:
        if not r >= -RANGE_SLACK:
            raise DomainError(f"r={r} out of branch range [0, inf)")
        if r <= 0.0:
            return b
        return bisect(f, c, b, increasing=False, tol=0.0)
    if branch is Branch.RHO_UP2:
        top = (1.0 - b) / (1.0 - c)
        if not (-RANGE_SLACK <= r < top):
            raise DomainError(f"r={r} out of branch range [0, {top})")
        if r <= 0.0:
            return b
        return bisect(f, b, 1.0, increasing=True, tol=0.0)
    raise DomainError(f"{branch} is not a rho branch")


def threshold_Ta(a: float) -> float:
    """T(a) = 1 - xi_{1-a,up}^{-1}(xi_{1-a}(0)) for e^-1 < a < 1."""
    if not INV_E < a < 1.0:
        raise DomainError(f"T(a) needs e^-1 < a < 1, got {a}")
    s = 1.0 - a
    return 1.0 - xi_inv(s, Branch.XI_UP, xi(s, 0.0))


def threshold_T() -> float:
    """The universal noise threshold, approximately 0.325176."""
    return 1.0 - xi_inv(INV_E, Branch.XI_UP, xi(INV_E, 0.0))
