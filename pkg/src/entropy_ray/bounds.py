"""Bounds on the ratio D(v||u) / D(w||u) for collinear u, v, w.

``ratio_bounds`` gives the strict sandwich, the ``feasible_*`` functions
solve it for one parameter at a time as unions of intervals, and
``F_g`` / ``q_of_g`` expose the integral functional whose root with a
constant weight is rho.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from . import scalarfn
from .errors import DomainError
from .scalarfn import Branch, rho_inv, xi, xi_inv, zeta
from .simplex import Dist, RayTriple, kl_ratio


class Interval(NamedTuple):
    lo: float
    lo_closed: bool
    hi: float
    hi_closed: bool

    def is_empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def contains(self, x: float) -> bool:
        above = x > self.lo or (self.lo_closed and x == self.lo)
        below = x < self.hi or (self.hi_closed and x == self.hi)
        return above and below


class IntervalSet:
    """A finite union of disjoint real intervals, sorted by left endpoint.

    Empty pieces are dropped on construction.
    """

    def __init__(self, intervals=()):
        pieces = [Interval(*iv) for iv in intervals]
        pieces = sorted((iv for iv in pieces if not iv.is_empty()), key=lambda iv: iv.lo)
        for left, right in zip(pieces, pieces[1:]):
            touching = left.hi == right.lo and left.hi_closed and right.lo_closed
            if left.hi > right.lo or touching:
                raise ValueError(f"overlapping intervals {left} and {right}")
        self.intervals = tuple(pieces)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __repr__(self):
        parts = []
        for iv in self.intervals:
            parts.append(
                f"{'[' if iv.lo_closed else '('}{iv.lo!r}, {iv.hi!r}{']' if iv.hi_closed else ')'}"
            )
        return "IntervalSet(" + " U ".join(parts) + ")" if parts else "IntervalSet(empty)"

    def is_empty(self) -> bool:
        return not self.intervals

    def __contains__(self, x) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    contains = __contains__

    def endpoints(self) -> list[float]:
        return [e for iv in self.intervals for e in (iv.lo, iv.hi)]

    def distance_to_boundary(self, x: float) -> float:
        return min((abs(x - e) for e in self.endpoints()), default=math.inf)

    def reflect(self) -> "IntervalSet":
        """The set 1 - A, with endpoint flags carried across."""
        return IntervalSet(
            Interval(1.0 - iv.hi, iv.hi_closed, 1.0 - iv.lo, iv.lo_closed)
            for iv in self.intervals
        )


def _open(lo, hi):
    return Interval(lo, False, hi, False)


def _up_to_one(lo):
    """The piece (lo, 1] where the true lo is known to be below 1.

    A root that rounds to 1.0 still leaves the double 1.0 in the set.
    """
    return Interval(min(lo, math.nextafter(1.0, 0.0)), False, 1.0, True)


def _check_complements(*xs):
    """The reflected problem works with 1 - x; distinct inputs must stay distinct."""
    comp = [1.0 - x for x in xs]
    if len(set(comp)) < len(set(xs)):
        raise DomainError(f"parameters {xs} coincide after complementing in double precision")


def ratio_bounds(a: float, b: float, c: float) -> tuple[float, float]:
    """``(lower, upper)`` with lower < D(v||u)/D(w||u) < upper for every
    collinear pair where the ratio is defined."""
    if not 0.0 <= a <= 1.0 or not 0.0 <= c < b <= 1.0:
        raise DomainError(f"need 0<=a<=1, 0<=c<b<=1; got a={a}, b={b}, c={c}")
    if a == b or a == c:
        raise DomainError("a must differ from b and c")
    _check_complements(a, b, c)
    upper = scalarfn.rho(a, b, c)
    lower = 1.0 / scalarfn.rho(1.0 - a, 1.0 - c, 1.0 - b)
    return lower, upper


def in_sandwich(r: float, a: float, b: float, c: float) -> bool:
    lower, upper = ratio_bounds(a, b, c)
    return lower < r < upper


def feasible_a(r: float, b: float, c: float) -> IntervalSet:
    """All ``a`` for which ``r`` lies strictly inside ``ratio_bounds(a, b, c)``."""
    if not r > 0 or not 0.0 <= c < b <= 1.0:
        raise DomainError(f"need r > 0 and 0<=c<b<=1; got r={r}, b={b}, c={c}")
    _check_complements(b, c)
    inv_r = 1.0 / r
    pieces = [
        _open(1.0 - rho_inv(1.0 - c, 1.0 - b, Branch.RHO_DOWN, inv_r),
              rho_inv(b, c, Branch.RHO_DOWN, r)),
    ]

    zr = scalarfn.zeta_ratio(b, c)
    b_over_c = b / c if c > 0 else math.inf
    if r >= zr:
        pieces.append(_open(rho_inv(b, c, Branch.RHO_UP1, r),
                            1.0 - rho_inv(1.0 - c, 1.0 - b, Branch.RHO_UP2, inv_r)))
    elif b_over_c < r < zr:
        pieces.append(Interval(0.0, True,
                               1.0 - rho_inv(1.0 - c, 1.0 - b, Branch.RHO_UP2, inv_r), False))

    zr_reflected = zeta(1.0 - b, 1.0 - b) / zeta(1.0 - c, 1.0 - c)
    top = (1.0 - b) / (1.0 - c)
    if 0.0 < r <= zr_reflected:
        pieces.append(_open(rho_inv(b, c, Branch.RHO_UP2, r),
                            1.0 - rho_inv(1.0 - c, 1.0 - b, Branch.RHO_UP1, inv_r)))
    elif zr_reflected < r < top:
        pieces.append(_up_to_one(rho_inv(b, c, Branch.RHO_UP2, r)))
    return IntervalSet(pieces)


def _level_root(s: float, ref: float, r: float, branch: Branch) -> float:
    """t on one branch of xi_s with xi_s(t) = r * xi_s(ref).

    At s = 1 the ratio xi_s(t)/xi_s(ref) tends to (1-t)/(1-ref), which is
    used directly.
    """
    if s == 1.0:
        if branch is Branch.XI_UP:
            return 1.0
        return min(max(1.0 - r * (1.0 - ref), 0.0), 1.0)
    return xi_inv(s, branch, r * xi(s, ref))


def feasible_b(r: float, a: float, c: float) -> IntervalSet:
    """All ``b`` for which ``r`` lies strictly inside ``ratio_bounds(a, b, c)``."""
    if not r > 0 or not 0.0 <= a <= 1.0 or not 0.0 <= c < 1.0 or a == c:
        raise DomainError(f"need r>0, 0<=a<=1, 0<=c<1, a!=c; got r={r}, a={a}, c={c}")
    _check_complements(a, c)
    pieces = []
    if c < a and r < 1.0:
        pieces.append(_open(1.0 - _level_root(1.0 - a, 1.0 - c, r, Branch.XI_UP),
                            _level_root(a, c, r, Branch.XI_DOWN)))
    if a < 1.0:
        cutoff = 1.0 / scalarfn.rho(1.0 - a, 1.0 - c, 0.0)
        if r < scalarfn.rho(a, 1.0, c):
            left = max(_level_root(a, c, r, Branch.XI_UP), c)
            if r <= cutoff:
                right = 1.0 - _level_root(1.0 - a, 1.0 - c, r, Branch.XI_DOWN)
                pieces.append(_open(left, right))
            else:
                pieces.append(_up_to_one(left))
    return IntervalSet(pieces)


def feasible_c(r: float, a: float, b: float) -> IntervalSet:
    """All ``c`` for which ``r`` lies strictly inside ``ratio_bounds(a, b, c)``."""
    if not r > 0 or not 0.0 <= a <= 1.0 or not 0.0 < b <= 1.0 or a == b:
        raise DomainError(f"need r>0, 0<=a<=1, 0<b<=1, a!=b; got r={r}, a={a}, b={b}")
    _check_complements(a, b)
    return feasible_b(1.0 / r, 1.0 - a, 1.0 - b).reflect()


def extremal_pair(delta: float, f_of_delta: float, n: int = 2) -> tuple[Dist, Dist]:
    if not 0.0 < delta < 1.0 or not 0.0 <= f_of_delta < 1.0:
        raise DomainError("need 0 < delta < 1 and 0 <= f(delta) < 1")
    if n < 2:
        raise DomainError("n must be at least 2")
    tail = [0.0] * (n - 2)
    alpha = Dist([1.0 - delta * f_of_delta, delta * f_of_delta] + tail)
    beta = Dist([1.0 - delta, delta] + tail)
    return alpha, beta


def extremal_ratio(a: float, b: float, c: float, delta: float, f_of_delta: float,
                   n: int = 2) -> float:
    """The divergence ratio on the pair whose ratio tends to rho as delta -> 0."""
    alpha, beta = extremal_pair(delta, f_of_delta, n)
    return kl_ratio(RayTriple(alpha, beta, a, b, c))


EXTREMAL_DELTAS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def sup_ratio_search(a: float, b: float, c: float, samples: int, seed: int = 0) -> float:
    """Largest ratio over ``samples`` candidate pairs.

    The first candidates are the extremal family at ``EXTREMAL_DELTAS``;
    the rest are Dirichlet pairs in dimension 2..5. Sample k does not
    depend on ``samples``, so larger budgets search a superset.
    """
    if samples < 1:
        raise DomainError("samples must be at least 1")
    best = -math.inf
    rng = np.random.Generator(np.random.Philox(seed))
    for k in range(samples):
        if k < len(EXTREMAL_DELTAS):
            d = EXTREMAL_DELTAS[k]
            alpha, beta = extremal_pair(d, d)
        else:
            n = int(rng.integers(2, 6))
            alpha, beta = Dist(rng.dirichlet(np.ones(n))), Dist(rng.dirichlet(np.ones(n)))
        try:
            best = max(best, kl_ratio(RayTriple(alpha, beta, a, b, c)))
        except DomainError:
            continue
    return best


@dataclass(frozen=True)
class TestWeight:
    """A positive, bounded, continuous, nonincreasing weight on (0, 1)."""

    __test__ = False  # keep pytest from collecting this class

    eval: Callable[[float], float]
    descriptor: str = "g"

    def __call__(self, t):
        return self.eval(t)

    def check(self, points: int = 1000) -> None:
        grid = (np.arange(points) + 0.5) / points
        vals = np.array([float(self.eval(t)) for t in grid])
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise DomainError(f"weight {self.descriptor} is not finite and positive")
        if np.any(np.diff(vals) > 1e-12 * np.max(vals)):
            raise DomainError(f"weight {self.descriptor} is not nonincreasing")

    def scaled(self, lam: float) -> "TestWeight":
        g = self.eval
        return TestWeight(lambda t: lam * g(t), f"{lam}*{self.descriptor}")

    @classmethod
    def constant(cls, value: float = 1.0) -> "TestWeight":
        return cls(lambda t: value, f"const({value})")

    @classmethod
    def exponential(cls, k: float) -> "TestWeight":
        return cls(lambda t: math.exp(-k * t), f"exp(-{k}t)")

    @classmethod
    def hyperbolic(cls, k: float) -> "TestWeight":
        return cls(lambda t: 1.0 / (1.0 + k * t), f"1/(1+{k}t)")

    @classmethod
    def linear(cls, k: float) -> "TestWeight":
        return cls(lambda t: 1.0 + k * (1.0 - t), f"1+{k}(1-t)")


QUAD_EPS = 1e-13


def _signed_integral(h, lo, hi, kinks):
    """Integral of h from lo to hi (either order), split at interior kinks."""
    if lo == hi:
        return 0.0
    sign = 1.0
    if lo > hi:
        lo, hi, sign = hi, lo, -1.0
    cuts = [lo] + sorted(k for k in set(kinks) if lo < k < hi) + [hi]
    total = 0.0
    for x0, x1 in zip(cuts, cuts[1:]):
        val, _ = integrate.quad(h, x0, x1, epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=200)
        total += val
    return sign * total


def _kernel(p):
    # (p - t)/(1 - t) written so that p = 1 gives exactly 1
    if p == 1.0:
        return lambda t: 1.0
    return lambda t: 1.0 - (1.0 - p) / (1.0 - t)


def _check_functional_args(a, b, c):
    if a == 1.0:
        raise DomainError("functional undefined at a=1")
    if not 0.0 <= a < 1.0 or not 0.0 <= c < b <= 1.0 or a in (b, c):
        raise DomainError(f"need 0<=a<1, 0<=c<b<=1, a not in {{b,c}}; got {a}, {b}, {c}")


def _functional_parts(a, b, c, g):
    kinks = (a, b, c)
    kb, kc = _kernel(b), _kernel(c)
    first = _signed_integral(lambda t: kb(t) * g(t), b, a, kinks)
    second = _signed_integral(lambda t: kc(t) * g(t), c, a, kinks)
    return first, second


def F_g(r: float, a: float, b: float, c: float, g: TestWeight) -> float:
    """int_b^a (b-t)/(1-t) g dt - r int_c^a (c-t)/(1-t) g dt."""
    _check_functional_args(a, b, c)
    first, second = _functional_parts(a, b, c, g)
    return first - r * second


def q_of_g(g: TestWeight, a: float, b: float, c: float) -> float:
    """The unique r > 0 with F_g(r, a, b, c) = 0."""
    _check_functional_args(a, b, c)
    g.check()
    first, second = _functional_parts(a, b, c, g)
    F = lambda r: first - r * second  # noqa: E731
    hi = 1.0
    while F(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise DomainError("could not bracket the root of F_g below r = 1e6")
    return scalarfn.bisect(F, 0.0, hi, increasing=True, tol=1e-15 * hi, max_iter=400)
