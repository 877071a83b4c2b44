"""Probability vectors, relative entropy and collinear triples."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import kl_div

from .errors import DomainError

SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Dist:
    """A point of the probability simplex.

    Inputs whose sum is within ``SUM_TOL`` of one are renormalized;
    anything further off is rejected.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size < 2:
            raise DomainError("a distribution needs at least two entries")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise DomainError(f"entries must be finite and nonnegative: {p}")
        total = p.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise DomainError(f"entries sum to {total!r}, not 1")
        if total != 1.0:
            p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size

    def __iter__(self):
        return iter(self.probs.tolist())

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __repr__(self):
        return f"Dist({self.probs.tolist()})"


def as_dist(p) -> Dist:
    return p if isinstance(p, Dist) else Dist(p)


@dataclass(frozen=True, eq=False)
class RayTriple:
    """Three points ``u = z(a)``, ``v = z(b)``, ``w = z(c)`` on the segment
    ``z(t) = t*alpha + (1 - t)*beta``."""

    alpha: Dist
    beta: Dist
    a: float
    b: float
    c: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_dist(self.alpha))
        object.__setattr__(self, "beta", as_dist(self.beta))
        if len(self.alpha) != len(self.beta):
            raise DomainError("alpha and beta have different lengths")
        a, b, c = self.a, self.b, self.c
        if not (0.0 <= a <= 1.0 and 0.0 <= c < b <= 1.0):
            raise DomainError(f"need 0<=a<=1 and 0<=c<b<=1, got a={a}, b={b}, c={c}")
        if a == b or a == c:
            raise DomainError("a must differ from b and c")

    @property
    def u(self) -> Dist:
        return ray_point(self.alpha, self.beta, self.a)

    @property
    def v(self) -> Dist:
        return ray_point(self.alpha, self.beta, self.b)

    @property
    def w(self) -> Dist:
        return ray_point(self.alpha, self.beta, self.c)


def kl(p, q) -> float:
    """Relative entropy D(p||q) in nats; ``+inf`` when p is not dominated by q."""
    p = np.asarray(as_dist(p))
    q = np.asarray(as_dist(q))
    if p.shape != q.shape:
        raise DomainError(f"dimension mismatch: {p.size} vs {q.size}")
    if np.any((p > 0) & (q == 0)):
        return math.inf
    # x log(x/y) - x + y is termwise nonnegative, and sums to the divergence
    return float(max(kl_div(p, q).sum(), 0.0))


def ray_point(alpha, beta, t: float) -> Dist:
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    alpha = np.asarray(as_dist(alpha))
    beta = np.asarray(as_dist(beta))
    if alpha.shape != beta.shape:
        raise DomainError("alpha and beta have different lengths")
    if t == 1.0:
        return Dist(alpha)
    if t == 0.0:
        return Dist(beta)
    z = t * alpha + (1.0 - t) * beta
    return Dist(z / z.sum())


def kl_ratio(rt: RayTriple) -> float:
    """D(v||u) / D(w||u) for a collinear triple."""
    u, v, w = rt.u, rt.v, rt.w
    num = kl(v, u)
    den = kl(w, u)
    if not (math.isfinite(num) and math.isfinite(den)) or num <= 0 or den <= 0:
        raise DomainError(
            f"ratio undefined: D(v||u)={num!r}, D(w||u)={den!r}"
        )
    return num / den
