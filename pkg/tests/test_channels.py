import itertools

import numpy as np
import pytest

from entropy_ray import DomainError, channels, scalarfn
from entropy_ray.capacity import capacity_no_side_info
from entropy_ray.channels import (
    Channel,
    ShannonStrategy,
    StateChannelSystem,
    all_strategies,
    d_dominance_check,
    d_functional,
    decompose,
    erasure_side_channel,
    gamma,
    gamma_product_check,
    identity,
    strategy_channel,
    strategy_index,
    useless,
)
from entropy_ray.experiments import build_example
from entropy_ray.simplex import kl


def test_channel_validation():
    with pytest.raises(DomainError):
        Channel([[0.5, 0.6]])
    with pytest.raises(DomainError):
        Channel([[1.5, -0.5]])
    ch = Channel([[0.5, 0.5 + 1e-13]])
    assert ch.rows.sum() == pytest.approx(1.0, abs=1e-15)


def test_gamma_examples():
    for eps in (0.0, 0.2, 0.5, 1.0):
        assert gamma(erasure_side_channel(eps)) == pytest.approx(eps, abs=1e-15)
    assert gamma(identity(3)) == 0.0
    assert gamma([[0.6, 0.4], [0.3, 0.7]]) == pytest.approx(0.7, abs=1e-15)


def test_decompose_examples():
    d = decompose(useless(1, 3, 2))
    assert d.gamma == 1.0
    assert np.allclose(np.asarray(d.kappa_prime), 0.5)
    d = decompose(identity(3))
    assert d.gamma == 0.0
    assert np.allclose(d.lam, 1 / 3)
    d = decompose([[0.6, 0.4], [0.3, 0.7]])
    assert d.gamma == pytest.approx(0.7, abs=1e-15)
    assert np.allclose(d.lam, [3 / 7, 4 / 7], atol=1e-15)
    assert np.allclose(np.asarray(d.kappa_prime), np.eye(2), atol=1e-12)
    assert np.max(np.abs(d.reconstruct() - [[0.6, 0.4], [0.3, 0.7]])) <= 1e-12


def test_decomposition_reconstruction_random():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        n_in, n_out = rng.integers(1, 7, 2)
        k = rng.dirichlet(np.full(n_out, rng.choice([0.2, 1.0, 4.0])), size=n_in)
        d = decompose(k)
        assert 0.0 <= d.gamma <= 1.0
        assert np.max(np.abs(d.reconstruct() - np.asarray(Channel(k)))) <= 1e-10


def _permutation_like(n_in, n_out, targets):
    B = np.zeros((n_in, n_out))
    B[np.arange(n_in), targets] = 1.0
    return B


def test_gamma_product_examples():
    A = np.array([[0.5, 0.3, 0.2], [0.1, 0.6, 0.3]])
    lhs, rhs = gamma_product_check(A, np.eye(3))
    assert lhs == pytest.approx(gamma(A)) and rhs == pytest.approx(gamma(A))
    lhs, _ = gamma_product_check(A, np.ones((3, 1)))
    assert lhs == 1.0
    with pytest.raises(DomainError):
        gamma_product_check(A, np.full((3, 2), 0.5))


def test_gamma_product_bound_random():
    rng = np.random.default_rng(6)
    for _ in range(3000):
        rows, cols = rng.integers(2, 6, 2)
        m = rng.integers(1, cols + 1)
        A = rng.dirichlet(np.full(cols, rng.choice([0.3, 1.0, 5.0])), size=rows)
        B = _permutation_like(cols, m, rng.integers(0, m, cols))
        lhs, rhs = gamma_product_check(A, B)
        assert lhs >= rhs - 1e-12


def test_strategy_channel_examples():
    side = erasure_side_channel(0.3)
    const = ShannonStrategy((1, 1, 1), 2)
    assert np.array_equal(np.asarray(strategy_channel(const, side)), np.asarray(useless(1, 2, 2)))
    sq = np.array([[0.7, 0.3], [0.2, 0.8]])
    assert np.allclose(np.asarray(strategy_channel(ShannonStrategy((0, 1), 2), sq)), sq)
    eps = 0.3
    u = ShannonStrategy((0, 1, 0), 2)
    assert np.allclose(np.asarray(strategy_channel(u, side)), [[1, 0], [eps, 1 - eps]])
    with pytest.raises(DomainError):
        strategy_channel(ShannonStrategy((0, 1), 2), side)


def test_strategy_enumeration_is_lexicographic():
    tables = [u.table for u in all_strategies(2, 3)]
    assert tables == list(itertools.product(range(2), repeat=3))
    assert [strategy_index(u) for u in all_strategies(3, 2)] == list(range(9))


def test_strategy_gamma_at_least_side_gamma():
    rng = np.random.default_rng(7)
    tested = 0
    for _ in range(500):
        side = rng.dirichlet(np.ones(3), size=2)
        if len(channels.argmin_rows(side)) > 2:
            continue
        tested += 1
        for u in all_strategies(2, 3):
            assert gamma(strategy_channel(u, side)) >= gamma(side) - 1e-12
    assert tested > 100


def _joint_divergence(sys, u, p_x):
    """kl(p_{Y,S|U=u} || p_{Y,S}) from the full joint over (s, s~, x, y)."""
    side, w, p_s = np.asarray(sys.side), sys.tensor(), np.asarray(sys.p_s)
    n_s, n_x, n_y = w.shape
    cond = np.zeros((n_s, n_y))
    marg = np.zeros((n_s, n_y))
    for s, st, x, y in itertools.product(range(n_s), range(side.shape[1]), range(n_x), range(n_y)):
        if x == u[st]:
            cond[s, y] += p_s[s] * side[s, st] * w[s, x, y]
    for s, x, y in itertools.product(range(n_s), range(n_x), range(n_y)):
        marg[s, y] += p_s[s] * p_x[x] * w[s, x, y]
    return kl(cond.ravel(), marg.ravel())


def _random_system(rng, n_states, n_out, n_side):
    w = tuple(rng.dirichlet(np.ones(n_out), size=2) for _ in range(n_states))
    p_s = rng.dirichlet(np.ones(n_states))
    return StateChannelSystem(w, p_s, rng.dirichlet(np.ones(n_side), size=n_states))


def test_d_functional_matches_joint():
    rng = np.random.default_rng(8)
    for _ in range(300):
        sys = _random_system(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(1, 4)))
        u = tuple(int(x) for x in rng.integers(0, 2, sys.side.n_out))
        p_x = rng.dirichlet(np.ones(2))
        kappa = strategy_channel(ShannonStrategy(u, 2), sys.side)
        assert d_functional(kappa, sys, p_x) == pytest.approx(_joint_divergence(sys, u, p_x), abs=1e-10)


def test_d_functional_zero_and_convex():
    rng = np.random.default_rng(9)
    sys = _random_system(rng, 3, 3, 2)
    p_x = np.array([0.3, 0.7])
    assert d_functional(np.tile(p_x, (3, 1)), sys, p_x) == pytest.approx(0.0, abs=1e-15)
    for _ in range(200):
        k1, k2 = rng.dirichlet(np.ones(2), size=3), rng.dirichlet(np.ones(2), size=3)
        mid = d_functional(0.5 * (k1 + k2), sys, p_x)
        assert mid <= 0.5 * (d_functional(k1, sys, p_x) + d_functional(k2, sys, p_x)) + 1e-12


def test_d_at_useless_channel_is_capacity():
    sys = build_example(0.01)
    res = capacity_no_side_info(sys)
    for x in (0, 1):
        assert d_functional(useless(x, 2, 2), sys, res.input_dist) == pytest.approx(res.value, abs=1e-9)


def test_dominance_check():
    sys = build_example(0.01)
    p_x = capacity_no_side_info(sys).input_dist
    assert d_dominance_check(sys, p_x, useless(0, 2, 2))
    need = max(scalarfn.threshold_Ta(p_x[0]), scalarfn.threshold_Ta(p_x[1]))
    rng = np.random.default_rng(10)
    for _ in range(500):
        g = rng.uniform(need, 1.0)
        k = g * rng.dirichlet(np.ones(2))[None, :] + (1 - g) * rng.dirichlet(np.ones(2), size=2)
        assert gamma(k) >= need
        assert d_dominance_check(sys, p_x, k)
    with pytest.raises(DomainError, match="p_x not equalizing"):
        d_dominance_check(sys, [0.5, 0.5], useless(0, 2, 2))


def test_system_validation():
    w = [[1.0, 0.0], [0.0, 1.0]]
    with pytest.raises(DomainError):
        StateChannelSystem((w, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), [0.5, 0.5])
    with pytest.raises(DomainError):
        StateChannelSystem((w, w), [0.2, 0.3, 0.5])
    with pytest.raises(DomainError):
        StateChannelSystem((w, w), [0.5, 0.5], erasure_side_channel(0.1).rows[:1])
    single = StateChannelSystem((w,), [1.0])
    assert single.n_states == 1
