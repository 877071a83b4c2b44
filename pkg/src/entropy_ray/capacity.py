"""Capacities of a state-dependent channel with the state known at the decoder.

``capacity_no_side_info`` maximizes I(X; Y | S) over a single input law.
``capacity_causal`` maximizes I(U; Y | S) over Shannon strategies
U: S~ -> X, the encoder seeing S~ causally. Both run Blahut-Arimoto on
the equivalent channel into (Y, S) and stop on the capacity gap
max_x D(P_x || q) - I, which upper-bounds the distance to capacity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .channels import ShannonStrategy, StateChannelSystem, all_strategies
from .errors import ConvergenceError, DomainError

GAP_TOL = 1e-10
MAX_ITER = 10**6
SUPPORT_MASS = 1e-9
MAX_STRATEGIES = 2**20
INV_E = math.exp(-1.0)
MAX_STEP = 1e6


@dataclass(frozen=True, eq=False)
class CapacityResult:
    """Capacity in nats with its optimizing input law.

    ``upper`` is the Blahut-Arimoto upper bound at the last iterate, so
    the true capacity lies in ``[value, upper]``. For the causal solver
    ``strategies[i]`` is the letter carrying ``input_dist[i]``.
    """

    value: float
    input_dist: np.ndarray
    kkt_residual: float
    iterations: int
    upper: float = math.nan
    strategies: tuple = ()
    support_bound: int | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def support(self) -> list[int]:
        return [i for i, p in enumerate(self.input_dist) if p > SUPPORT_MASS]

    @property
    def support_ok(self) -> bool | None:
        if self.support_bound is None:
            return None
        return len(self.support) <= self.support_bound


def letter_divergences(P: np.ndarray, p: np.ndarray) -> np.ndarray:
    """D(P_x || pP) for every row x of the channel matrix P."""
    q = p @ P
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * (np.log(P) - np.log(q)), 0.0)
    return terms.sum(axis=1)


def kkt_residual(P: np.ndarray, p: np.ndarray, value: float) -> float:
    """max over letters of |D_x - C| (supported) or (D_x - C)_+ (unsupported)."""
    d = letter_divergences(P, p) - value
    supported = p > SUPPORT_MASS
    res = np.where(supported, np.abs(d), np.maximum(d, 0.0))
    return float(res.max())


def _mutual_information(P, logP, mask, p):
    q = p @ P
    with np.errstate(divide="ignore"):
        logq = np.log(q)
    d = np.where(mask, P * (logP - logq), 0.0).sum(axis=1)
    return float(p @ d), d


def _newton_polish(P, logP, mask, p0, tol, max_rounds=80):
    """Solve the optimality conditions on the support of ``p0`` by Newton's method.

    Letters whose mass reaches zero leave the active set; letters outside
    it with D_x above the current value are brought back in. Returns the
    polished law, or ``None`` if it does not reach ``tol``.
    """
    active = p0 > 1e-10 * p0.max()
    p = np.where(active, p0, 0.0)
    p /= p.sum()
    for _ in range(max_rounds):
        lower, d = _mutual_information(P, logP, mask, p)
        if not np.isfinite(d).all():
            return None
        if d.max() - lower <= tol:
            return p
        idx = np.flatnonzero(active)
        d_act = d[idx]
        if d_act.max() - d_act.min() <= 0.1 * tol:
            outside = np.flatnonzero(~active & (d > lower + 0.1 * tol))
            if outside.size == 0:
                return None
            active[outside[np.argmax(d[outside])]] = True
            idx = np.flatnonzero(active)
            d_act = d[idx]
        q = p @ P
        cols = q > 0
        PA = P[idx][:, cols]
        H = -(PA / q[cols]) @ PA.T
        k = idx.size
        K = np.zeros((k + 1, k + 1))
        K[:k, :k] = H
        K[:k, k] = 1.0
        K[k, :k] = 1.0
        rhs = np.concatenate([-d_act, [0.0]])
        step = np.linalg.lstsq(K, rhs, rcond=None)[0][:k]
        neg = step < 0
        t = 1.0
        if neg.any():
            t = min(1.0, float(np.min(-p[idx][neg] / step[neg])))
        for _ in range(40):
            cand = p.copy()
            cand[idx] = np.maximum(p[idx] + t * step, 0.0)
            cand /= cand.sum()
            cand_lower, _ = _mutual_information(P, logP, mask, cand)
            if cand_lower >= lower:
                break
            t *= 0.5
        else:
            return None
        p = cand
        active = p > 0
    return None


POLISH_EVERY = 100


def blahut_arimoto(P, tol: float = GAP_TOL, max_iter: int = MAX_ITER):
    """Capacity of the channel with row-stochastic matrix P.

    The update is p <- p exp(mu (D - max D)) renormalized. ``mu = 1`` is
    the classical iteration and never decreases I(p); larger steps are
    tried after each success and rolled back (halving ``mu``, never
    below 1) whenever I(p) would drop. Every ``POLISH_EVERY`` iterations
    a Newton solve on the current support is attempted and accepted only
    if it closes the gap. Nearly useless channels have a very flat
    objective, where the classical step alone needs millions of
    iterations.

    Returns ``(lower, upper, p, iterations)``. Raises ConvergenceError
    (carrying the same tuple) if the gap is still above ``tol``.
    """
    P = np.asarray(P, dtype=float)
    m = P.shape[0]
    mask = P > 0
    logP = np.log(np.where(mask, P, 1.0))
    p = np.full(m, 1.0 / m)
    lower, d = _mutual_information(P, logP, mask, p)
    upper = float(d.max())
    mu = 1.0
    for it in range(1, max_iter + 1):
        if upper - lower <= tol:
            return max(lower, 0.0), upper, p, it
        if it % POLISH_EVERY == 0:
            polished = _newton_polish(P, logP, mask, p, tol)
            if polished is not None:
                lo, dd = _mutual_information(P, logP, mask, polished)
                if dd.max() - lo <= tol:
                    return max(lo, 0.0), float(dd.max()), polished, it
        while True:
            cand = p * np.exp(mu * (d - upper))
            cand /= cand.sum()
            cand_lower, cand_d = _mutual_information(P, logP, mask, cand)
            if cand_lower >= lower or mu == 1.0:
                break
            mu = max(mu / 2.0, 1.0)
        p, lower, d = cand, cand_lower, cand_d
        upper = float(d.max())
        mu = min(mu * 1.5, MAX_STEP)
    raise ConvergenceError(
        f"capacity gap {upper - lower:.3e} still above {tol:g} after {max_iter} iterations",
        best=(max(lower, 0.0), upper, p, max_iter),
    )


def _solve(P, tol, max_iter, **extra):
    try:
        lower, upper, p, it = blahut_arimoto(P, tol, max_iter)
    except ConvergenceError as exc:
        lower, upper, p, it = exc.best
        exc.best = CapacityResult(lower, p, kkt_residual(P, p, lower), it, upper, **extra)
        raise
    return CapacityResult(lower, p, kkt_residual(P, p, lower), it, upper, **extra)


def capacity_no_side_info(sys: StateChannelSystem, tol: float = GAP_TOL,
                          max_iter: int = MAX_ITER) -> CapacityResult:
    """max over p_X of I(X; Y | S), one input law shared by all states."""
    return _solve(sys.joint_channel(), tol, max_iter)


def strategy_joint_channel(sys: StateChannelSystem, strategies) -> np.ndarray:
    """Rows p(y, s | u) = p(s) sum_x [sum_{s~} p(s~|s) 1{x = u(s~)}] p(y|x,s)."""
    side = np.asarray(sys.side)
    kappas = np.stack([side @ u.matrix() for u in strategies])  # (U, S, X)
    w = sys.tensor()
    rows = np.einsum("usx,sxy->usy", kappas, w) * np.asarray(sys.p_s)[None, :, None]
    return rows.reshape(len(strategies), -1)


def support_bound(sys: StateChannelSystem) -> int:
    n_side = sys.side.n_out
    return min((sys.n_inputs - 1) * n_side + 1, sys.n_states * sys.n_outputs)


def capacity_causal(sys: StateChannelSystem, tol: float = GAP_TOL,
                    max_iter: int = MAX_ITER) -> CapacityResult:
    """max over p_U of I(U; Y | S) with U ranging over all maps S~ -> X."""
    if sys.side is None:
        raise DomainError("the system has no side channel")
    n_side = sys.side.n_out
    if sys.n_inputs ** n_side > MAX_STRATEGIES:
        raise DomainError(
            f"{sys.n_inputs}^{n_side} strategies exceeds the limit of {MAX_STRATEGIES}"
        )
    strategies = tuple(all_strategies(sys.n_inputs, n_side))
    P = strategy_joint_channel(sys, strategies)
    return _solve(P, tol, max_iter, strategies=strategies, support_bound=support_bound(sys))


def kkt_certificate(sys: StateChannelSystem, result: CapacityResult, mode: str = "no_side") -> float:
    """Optimality residual of ``result``; zero exactly at capacity."""
    if mode == "no_side":
        P = sys.joint_channel()
    elif mode == "causal":
        strategies = result.strategies or tuple(all_strategies(sys.n_inputs, sys.side.n_out))
        P = strategy_joint_channel(sys, strategies)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    p = np.asarray(result.input_dist, dtype=float)
    if p.shape != (P.shape[0],):
        raise DomainError("input law does not match the channel")
    return kkt_residual(P, p, result.value)


def capacity_achieving_input_in_band(sys: StateChannelSystem) -> bool:
    """Whether the optimal binary input law has both masses in (e^-1, 1 - e^-1)."""
    if sys.n_inputs != 2:
        raise DomainError("the band check needs a binary input")
    res = capacity_no_side_info(sys)
    if res.value <= GAP_TOL:
        raise DomainError("band undefined: zero capacity")
    p0, p1 = res.input_dist
    return bool(INV_E < p0 < 1 - INV_E and INV_E < p1 < 1 - INV_E)


def best_nonconstant_strategy(result: CapacityResult) -> ShannonStrategy | None:
    """The non-constant strategy with the most mass in a causal optimum."""
    best, best_mass = None, SUPPORT_MASS
    for u, mass in zip(result.strategies, result.input_dist):
        if not u.is_constant() and mass > best_mass:
            best, best_mass = u, mass
    return best
