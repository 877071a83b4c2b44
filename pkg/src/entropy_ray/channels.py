"""Finite channels, the noise measure gamma, Shannon strategies and the
divergence functional D(kappa) used by the threshold argument."""

from __future__ import annotations

from dataclasses import dataclass
import itertools
import math

import numpy as np

from . import scalarfn
from .errors import DomainError
from .simplex import Dist, kl

ROW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix; rows are inputs, columns are outputs."""

    rows: np.ndarray

    def __post_init__(self):
        m = np.array(self.rows, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise DomainError(f"a channel must be a nonempty matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise DomainError("channel entries must be finite and nonnegative")
        sums = m.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > ROW_TOL):
            raise DomainError(f"channel rows must sum to 1, got {sums}")
        if np.any(sums != 1.0):
            m = m / sums[:, None]
        m.setflags(write=False)
        object.__setattr__(self, "rows", m)

    @property
    def n_in(self) -> int:
        return self.rows.shape[0]

    @property
    def n_out(self) -> int:
        return self.rows.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.rows if dtype is None else self.rows.astype(dtype)

    def __matmul__(self, other):
        return Channel(self.rows @ np.asarray(other))

    def __repr__(self):
        return f"Channel({self.rows.tolist()})"

    def is_deterministic(self) -> bool:
        return bool(np.all((self.rows == 0) | (self.rows == 1)) and np.all(self.rows.sum(axis=1) == 1))


def useless(x: int, n_in: int, n_out: int) -> Channel:
    """U_x: every input is sent to output ``x``."""
    m = np.zeros((n_in, n_out))
    m[:, x] = 1.0
    return Channel(m)


def identity(n: int) -> Channel:
    return Channel(np.eye(n))


def erasure_side_channel(eps: float) -> Channel:
    """Binary state observed through an erasure: outputs 0, 1 and 2 = erased."""
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"erasure probability must lie in [0, 1], got {eps}")
    return Channel([[1.0 - eps, 0.0, eps], [0.0, 1.0 - eps, eps]])


@dataclass(frozen=True, eq=False)
class StateChannelSystem:
    """Channel p(y|x,s) with state law p(s) and side channel p(s~|s).

    ``side`` may be ``None`` for systems used without encoder state
    information; solvers that need it check.
    """

    y_given_xs: tuple
    p_s: np.ndarray
    side: Channel | None = None

    def __post_init__(self):
        chans = tuple(c if isinstance(c, Channel) else Channel(c) for c in self.y_given_xs)
        if not chans:
            raise DomainError("need at least one state")
        if len({c.rows.shape for c in chans}) != 1:
            raise DomainError("per-state channels must share dimensions")
        object.__setattr__(self, "y_given_xs", chans)
        p_s = _law(self.p_s)
        object.__setattr__(self, "p_s", p_s)
        if len(p_s) != len(chans):
            raise DomainError("p_s length must equal the number of states")
        side = self.side
        if side is not None:
            side = side if isinstance(side, Channel) else Channel(side)
            if side.n_in != len(chans):
                raise DomainError("side channel needs one row per state")
            object.__setattr__(self, "side", side)

    @property
    def n_states(self) -> int:
        return len(self.y_given_xs)

    @property
    def n_inputs(self) -> int:
        return self.y_given_xs[0].n_in

    @property
    def n_outputs(self) -> int:
        return self.y_given_xs[0].n_out

    def with_side(self, side) -> "StateChannelSystem":
        return StateChannelSystem(self.y_given_xs, self.p_s, side)

    def tensor(self) -> np.ndarray:
        """W[s, x, y] = p(y | x, s)."""
        return np.stack([c.rows for c in self.y_given_xs])

    def joint_channel(self) -> np.ndarray:
        """The channel x -> (y, s) with entries p(s) p(y|x,s), columns ordered (s, y)."""
        w = self.tensor() * np.asarray(self.p_s)[:, None, None]
        return np.transpose(w, (1, 0, 2)).reshape(self.n_inputs, -1)

    def output_given_state(self, p_x) -> np.ndarray:
        """p(y | s) = sum_x p(x) p(y|x,s), one row per state."""
        return np.einsum("x,sxy->sy", np.asarray(p_x, dtype=float), self.tensor())


def _law(p) -> np.ndarray:
    """Validated read-only probability vector; length one is allowed."""
    p = np.array(p, dtype=float).ravel()
    if p.size == 1:
        if abs(p[0] - 1.0) > 1e-12:
            raise DomainError("a one-point law must be (1,)")
        p = np.ones(1)
    else:
        p = np.array(Dist(p), dtype=float)
    p.setflags(write=False)
    return p


@dataclass(frozen=True)
class ShannonStrategy:
    """Map from side-information symbols to channel inputs, as a table."""

    table: tuple
    n_inputs: int

    def __post_init__(self):
        table = tuple(int(x) for x in self.table)
        if any(not 0 <= x < self.n_inputs for x in table):
            raise DomainError(f"strategy {table} uses inputs outside 0..{self.n_inputs - 1}")
        object.__setattr__(self, "table", table)

    def __call__(self, s_tilde: int) -> int:
        return self.table[s_tilde]

    def matrix(self) -> np.ndarray:
        """Deterministic |S~| x |X| matrix of the map."""
        b = np.zeros((len(self.table), self.n_inputs))
        b[np.arange(len(self.table)), self.table] = 1.0
        return b

    def is_constant(self) -> bool:
        return len(set(self.table)) == 1


def all_strategies(n_inputs: int, n_side: int) -> list[ShannonStrategy]:
    """Every map S~ -> X, lexicographic in the table (s~ = 0 most significant)."""
    return [ShannonStrategy(t, n_inputs) for t in itertools.product(range(n_inputs), repeat=n_side)]


def strategy_index(u: ShannonStrategy) -> int:
    idx = 0
    for x in u.table:
        idx = idx * u.n_inputs + x
    return idx


def gamma(kappa) -> float:
    """Sum over outputs of the smallest transition probability into them."""
    m = np.asarray(kappa if isinstance(kappa, Channel) else Channel(kappa))
    return float(min(m.min(axis=0).sum(), 1.0))


@dataclass(frozen=True, eq=False)
class Decomposition:
    gamma: float
    lam: np.ndarray
    kappa_prime: Channel

    def reconstruct(self) -> np.ndarray:
        lam = np.asarray(self.lam)
        kp = np.asarray(self.kappa_prime)
        # sum_x lam_x U_x has every row equal to lam
        return self.gamma * np.broadcast_to(lam, kp.shape) + (1.0 - self.gamma) * kp


def decompose(kappa) -> Decomposition:
    """Split kappa into a useless part of weight gamma(kappa) and a remainder."""
    kappa = kappa if isinstance(kappa, Channel) else Channel(kappa)
    m = np.asarray(kappa)
    col_min = m.min(axis=0)
    g = gamma(kappa)
    n_out = kappa.n_out
    if g > 0:
        lam = col_min / col_min.sum()
    else:
        lam = np.full(n_out, 1.0 / n_out)
    rest = m - col_min
    if g < 1 and np.all(rest.sum(axis=1) > 0):
        kp = rest / rest.sum(axis=1, keepdims=True)
    else:
        # every row of rest sums to 1 - g, so all-zero rows mean g is 1 up to rounding
        g = 1.0
        kp = np.full(m.shape, 1.0 / n_out)
    return Decomposition(g, _law(lam), Channel(kp))


def min_gap(a: np.ndarray) -> float:
    """Smallest gap between least and second least entry over all columns."""
    if a.shape[0] < 2:
        return 0.0
    srt = np.sort(a, axis=0)
    return float((srt[1] - srt[0]).min())


def argmin_rows(a: np.ndarray) -> set[int]:
    """Rows that attain a column minimum, smallest index on ties."""
    return {int(i) for i in np.argmin(a, axis=0)}


def gamma_product_check(A, B) -> tuple[float, float]:
    """``(gamma(AB), gamma(A) + (|M| - n)_+ g)`` for deterministic B."""
    A = A if isinstance(A, Channel) else Channel(A)
    B = B if isinstance(B, Channel) else Channel(B)
    if not B.is_deterministic():
        raise DomainError("B must be deterministic (one 1 per row)")
    if A.n_out != B.n_in:
        raise DomainError(f"cannot multiply {A.rows.shape} by {B.rows.shape}")
    a = np.asarray(A)
    lhs = gamma(A @ B)
    excess = max(len(argmin_rows(a)) - B.n_out, 0)
    rhs = gamma(A) + excess * min_gap(a) if excess else gamma(A)
    return lhs, rhs


def strategy_channel(u: ShannonStrategy, side) -> Channel:
    """kappa(x|s) = sum_{s~} p(s~|s) 1{x = u(s~)}."""
    side = side if isinstance(side, Channel) else Channel(side)
    if len(u.table) != side.n_out:
        raise DomainError("strategy must be defined on every side-channel output")
    return Channel(np.asarray(side) @ u.matrix())


def d_functional(kappa, sys: StateChannelSystem, p_x) -> float:
    """D(kappa) = sum_s p(s) D(kappa(.|s) W_s || p_{Y|S=s})."""
    kappa = np.asarray(kappa if isinstance(kappa, Channel) else Channel(kappa))
    if kappa.shape != (sys.n_states, sys.n_inputs):
        raise DomainError(f"kappa must be {sys.n_states} x {sys.n_inputs}")
    w = sys.tensor()
    q = sys.output_given_state(p_x)
    mixed = np.einsum("sx,sxy->sy", kappa, w)
    total = 0.0
    for s, ps in enumerate(np.asarray(sys.p_s)):
        if ps == 0:
            continue
        total += ps * _kl_rows(mixed[s], q[s])
    return total


def _kl_rows(p, q) -> float:
    if np.any((p > 0) & (q == 0)):
        return math.inf
    return kl(p / p.sum(), q / q.sum())


EQUALIZE_TOL = 1e-8
DOMINANCE_TOL = 1e-9


def d_dominance_check(sys: StateChannelSystem, p_x, kappa) -> bool:
    """Whether D(kappa) <= C holds when gamma(kappa) clears T(p_x(0)) v T(p_x(1)).

    Returns ``True`` when gamma(kappa) is below the threshold, since
    nothing is claimed there.
    """
    if sys.n_inputs != 2:
        raise DomainError("the dominance check needs a binary input")
    p_x = np.asarray(p_x, dtype=float)
    n_s = sys.n_states
    d0 = d_functional(useless(0, n_s, 2), sys, p_x)
    d1 = d_functional(useless(1, n_s, 2), sys, p_x)
    if not abs(d0 - d1) <= EQUALIZE_TOL:
        raise DomainError(f"p_x not equalizing: D(U_0)={d0}, D(U_1)={d1}")
    cap = 0.5 * (d0 + d1)
    need = max(scalarfn.threshold_Ta(p_x[0]), scalarfn.threshold_Ta(p_x[1]))
    if gamma(kappa) < need:
        return True
    return d_functional(kappa, sys, p_x) <= cap + DOMINANCE_TOL
