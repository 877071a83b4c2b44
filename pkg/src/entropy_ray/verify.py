"""Randomized property suites.

Every check draws its cases from its own Philox stream keyed by
``(seed, check index)``, so a check's cases do not depend on which other
checks run or on how checks are spread over worker processes.

Sample counts scale with ``n``: the per-sample checks of ``theorem1``
use ``n`` cases, the heavier checks use ``n // 10`` or ``n // 100``
(at least one).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import json
import math
from typing import Any, Callable

import numpy as np

from . import bounds, channels, scalarfn
from .bounds import TestWeight
from .capacity import SUPPORT_MASS, capacity_causal, capacity_no_side_info, letter_divergences
from .channels import Channel, StateChannelSystem
from .simplex import Dist, RayTriple, kl, kl_ratio

SUITES = ("theorem1", "theorem2", "appendixA", "channels", "threshold")
SANDWICH_RTOL = 1e-9
BOUNDARY_GAP = 1e-9
T_REF = 0.325176


@dataclass
class Check:
    name: str
    sample: Callable[[np.random.Generator, int], dict]
    test: Callable[[dict], bool | None]  # None marks a skipped case
    count: Callable[[int], int] = lambda n: n


@dataclass
class CheckReport:
    suite: str
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    counterexample: dict | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        return (f"{tag} {self.suite}/{self.name}: passed={self.passed} "
                f"failed={self.failed} skipped={self.skipped}")


@dataclass
class SuiteReport:
    checks: list[CheckReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failed(self) -> int:
        return sum(c.failed for c in self.checks)

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.checks)


def _scaled(div):
    return lambda n: max(n // div, 1)


def _once(n):
    return 1


def rng_for(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for check ``index`` under ``seed``."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def _run_case(check: Check, case: dict):
    try:
        return check.test(case), None
    except Exception as exc:  # a crash inside a property is a failure
        return False, f"{type(exc).__name__}: {exc}"


def _failure_kind(check: Check, case: dict):
    """``None`` if the case does not fail, else the exception type name or ``""``."""
    ok, err = _run_case(check, case)
    if ok is not False:
        return None
    return err.split(":", 1)[0] if err else ""


def minimize(check: Check, case: dict) -> dict:
    """Round scalar parameters to as few digits as keeps the same failure."""
    case = dict(case)
    kind = _failure_kind(check, case)
    for key, val in list(case.items()):
        if not isinstance(val, float) or not math.isfinite(val):
            continue
        for digits in range(1, 16):
            trial = dict(case, **{key: round(val, digits)})
            if trial[key] != val and _failure_kind(check, trial) == kind:
                case = trial
                break
    return case


def run_check(suite: str, check: Check, seed: int, n: int, index: int) -> CheckReport:
    rng = rng_for(seed, index)
    rep = CheckReport(suite, check.name)
    for i in range(check.count(n)):
        case = check.sample(rng, i)
        ok, err = _run_case(check, case)
        if ok is None:
            rep.skipped += 1
        elif ok:
            rep.passed += 1
        else:
            rep.failed += 1
            if rep.counterexample is None:
                rep.counterexample = minimize(check, case)
                rep.error = err
    return rep


# ---------------------------------------------------------------- sampling

def _uniform_bc(rng):
    c, b = np.sort(rng.random(2))
    return float(b), float(c)


def _triple_params(rng, edges: float = 0.0):
    """(a, b, c) with 0 <= c < b <= 1 and a distinct from b and c.

    With probability ``edges`` some of a = 1, b = 1, c = 0 are forced.
    """
    while True:
        b, c = _uniform_bc(rng)
        a = float(rng.random())
        if rng.random() < edges:
            pick = rng.integers(0, 3)
            if pick == 0:
                a = 1.0
            elif pick == 1:
                b = 1.0
            else:
                c = 0.0
        if c < b and a != b and a != c:
            return a, b, c


def _positive_dist(rng, n, conc=1.0):
    while True:
        p = rng.dirichlet(np.full(n, conc))
        if p.min() > 1e-12:
            return p


def _random_channel(rng, n_in, n_out, conc=1.0):
    return np.array([rng.dirichlet(np.full(n_out, conc)) for _ in range(n_in)])


def _random_binary_system(rng, n_states=None, conc=0.7):
    n_states = n_states or int(rng.integers(1, 4))
    n_out = int(rng.integers(2, 4))
    w = [_random_channel(rng, 2, n_out, conc) for _ in range(n_states)]
    p_s = rng.dirichlet(np.ones(n_states)) if n_states > 1 else np.ones(1)
    return StateChannelSystem(tuple(w), p_s)


def _noisy_channel(rng, n_in, n_out, g):
    """A channel with gamma at least ``g``: a g-mix of a constant row and noise."""
    lam = rng.dirichlet(np.ones(n_out))
    rest = _random_channel(rng, n_in, n_out)
    return g * lam[None, :] + (1.0 - g) * rest


def _system_case(sys: StateChannelSystem) -> dict:
    return {
        "y_given_xs": [c.rows.tolist() for c in sys.y_given_xs],
        "p_s": np.asarray(sys.p_s).tolist(),
        "side": None if sys.side is None else sys.side.rows.tolist(),
    }


def _system_of(case: dict) -> StateChannelSystem:
    return StateChannelSystem(tuple(case["y_given_xs"]), case["p_s"], case["side"])


# ---------------------------------------------------------------- theorem1

def _sample_sandwich(rng, i):
    n = int(rng.integers(2, 6))
    a, b, c = _triple_params(rng)
    return {"alpha": _positive_dist(rng, n).tolist(), "beta": _positive_dist(rng, n).tolist(),
            "a": a, "b": b, "c": c}


def _prop_sandwich(case):
    r = kl_ratio(RayTriple(Dist(case["alpha"]), Dist(case["beta"]), case["a"], case["b"], case["c"]))
    lower, upper = bounds.ratio_bounds(case["a"], case["b"], case["c"])
    return lower * (1 - SANDWICH_RTOL) < r < upper * (1 + SANDWICH_RTOL)


def sample_membership(rng, i):
    a, b, c = _triple_params(rng, edges=0.15)
    lower, upper = bounds.ratio_bounds(a, b, c)
    if rng.random() < 0.5 and lower > 0 and math.isfinite(upper):
        lo, hi = math.log(lower) - 1.0, math.log(upper) + 1.0
    else:
        lo, hi = math.log(1e-2), math.log(1e2)
    return {"r": float(math.exp(rng.uniform(lo, hi))), "a": a, "b": b, "c": c}


def prop_membership(case):
    """Each feasible set agrees with the sandwich away from its endpoints."""
    r, a, b, c = case["r"], case["a"], case["b"], case["c"]
    truth = bounds.in_sandwich(r, a, b, c)
    checked = 0
    for x, make in ((a, lambda: bounds.feasible_a(r, b, c)),
                    (b, lambda: bounds.feasible_b(r, a, c)),
                    (c, lambda: bounds.feasible_c(r, a, b))):
        iset = make()
        if iset.distance_to_boundary(x) < BOUNDARY_GAP:
            continue
        checked += 1
        if (x in iset) != truth:
            return False
    return True if checked else None


def _prop_reflection(case):
    r, a, b, c = case["r"], case["a"], case["b"], case["c"]
    lower = bounds.ratio_bounds(a, b, c)[0]
    upper_reflected = bounds.ratio_bounds(1.0 - a, 1.0 - c, 1.0 - b)[1]
    if lower != 1.0 / upper_reflected:
        return False
    return bounds.feasible_c(r, a, b) == bounds.feasible_b(1.0 / r, 1.0 - a, 1.0 - b).reflect()


def _theorem1_checks(opts):
    return [
        Check("sandwich", _sample_sandwich, _prop_sandwich),
        Check("feasible-membership", sample_membership, prop_membership, _scaled(10)),
        Check("reflection-duality", sample_membership, _prop_reflection, _scaled(10)),
    ]


# ---------------------------------------------------------------- theorem2

PARAM_GRID = [(a, b, c) for a in (0.1, 0.5, 0.9) for b in (0.4, 0.7, 1.0) for c in (0.0, 0.2, 0.3)]
CONVERGENCE_DELTAS = (1e-2, 1e-3, 1e-4)


def extremal_errors(a, b, c, deltas=CONVERGENCE_DELTAS):
    target = scalarfn.rho(a, b, c)
    return [abs(bounds.extremal_ratio(a, b, c, d, d) - target) for d in deltas]


def _prop_convergence(case):
    a, b, c = case["a"], case["b"], case["c"]
    errs = extremal_errors(a, b, c)
    below = all(bounds.extremal_ratio(a, b, c, d, d) < scalarfn.rho(a, b, c) for d in CONVERGENCE_DELTAS)
    return below and all(e1 > e2 for e1, e2 in zip(errs, errs[1:]))


def _prop_extremal_limit(case):
    return extremal_errors(0.5, 1.0, 0.0, (1e-5,))[0] < 1e-2


def _sample_search(rng, i):
    a, b, c = _triple_params(rng)
    return {"a": a, "b": b, "c": c, "seed": int(rng.integers(0, 2**32))}


def _search_check(samples):
    def test(case):
        a, b, c = case["a"], case["b"], case["c"]
        small = bounds.sup_ratio_search(a, b, c, samples, case["seed"])
        big = bounds.sup_ratio_search(a, b, c, 2 * samples, case["seed"])
        return small <= big < scalarfn.rho(a, b, c)
    return test


def _theorem2_checks(opts):
    return [
        Check("extremal-convergence", lambda rng, i: dict(zip("abc", PARAM_GRID[i]))
              , _prop_convergence, lambda n: len(PARAM_GRID)),
        Check("extremal-limit", lambda rng, i: {}, _prop_extremal_limit, _once),
        Check("sup-search-below-rho", _sample_search, _search_check(200), _scaled(1000)),
        Check("sup-search-approaches-rho",
              lambda rng, i: {},
              lambda case: bounds.sup_ratio_search(0.5, 1.0, 0.0, 1000, 0)
              >= 0.9 * scalarfn.rho(0.5, 1.0, 0.0), _once),
    ]


# ---------------------------------------------------------------- appendixA

def _functional_triple(rng):
    while True:
        a, b, c = _triple_params(rng)
        if a < 1.0:
            return a, b, c


def random_weight(rng) -> TestWeight:
    family = int(rng.integers(0, 3))
    k = float(rng.uniform(0.1, 5.0))
    return (TestWeight.exponential, TestWeight.hyperbolic, TestWeight.linear)[family](k)


def _weight_from(case) -> TestWeight:
    ctor = {"exp": TestWeight.exponential, "hyp": TestWeight.hyperbolic,
            "lin": TestWeight.linear}[case["family"]]
    return ctor(case["k"])


def sample_weighted(rng, i):
    a, b, c = _functional_triple(rng)
    return {"a": a, "b": b, "c": c, "family": ["exp", "hyp", "lin"][int(rng.integers(0, 3))],
            "k": float(rng.uniform(0.1, 5.0)),
            "probes": np.sort(np.exp(rng.uniform(-3.0, 3.0, 10))).tolist()}


def _prop_q_root(case):
    a, b, c = case["a"], case["b"], case["c"]
    q = bounds.q_of_g(TestWeight.constant(), a, b, c)
    return abs(q - scalarfn.rho(a, b, c)) <= 1e-8 * max(1.0, scalarfn.rho(a, b, c))


def prop_q_below(case):
    a, b, c = case["a"], case["b"], case["c"]
    return bounds.q_of_g(_weight_from(case), a, b, c) < bounds.q_of_g(TestWeight.constant(), a, b, c)


def prop_F_increasing(case):
    a, b, c, g = case["a"], case["b"], case["c"], _weight_from(case)
    vals = [bounds.F_g(r, a, b, c, g) for r in case["probes"]]
    return all(v1 < v2 for v1, v2 in zip(vals, vals[1:]))


def _prop_scale(case):
    a, b, c, g = case["a"], case["b"], case["c"], _weight_from(case)
    q1 = bounds.q_of_g(g, a, b, c)
    q2 = bounds.q_of_g(g.scaled(7.0), a, b, c)
    return abs(q1 - q2) <= 1e-10 * max(1.0, q1)


def _prop_F_at_zero(case):
    a, b, c = case["a"], case["b"], case["c"]
    if not a < b:
        return None
    return bounds.F_g(0.0, a, b, c, TestWeight.constant()) < 0


def _appendixA_checks(opts):
    grid_sample = lambda rng, i: dict(zip("abc", PARAM_GRID[i]))  # noqa: E731
    return [
        Check("q1-equals-rho-grid", grid_sample, _prop_q_root, lambda n: len(PARAM_GRID)),
        Check("q1-equals-rho-random", sample_weighted, _prop_q_root, _scaled(10)),
        Check("q-below-q1", sample_weighted, prop_q_below, _scaled(10)),
        Check("F-increasing-in-r", sample_weighted, prop_F_increasing, _scaled(10)),
        Check("q-scale-invariant", sample_weighted, _prop_scale, _scaled(10)),
        Check("F-negative-at-zero", sample_weighted, _prop_F_at_zero, _scaled(10)),
    ]


# ---------------------------------------------------------------- channels

def sample_matrix(rng, i):
    n_in, n_out = (int(x) for x in rng.integers(1, 7, 2))
    m = _random_channel(rng, n_in, n_out, conc=float(rng.choice([0.3, 1.0, 5.0])))
    if rng.random() < 0.2:  # exact zeros exercise the gamma = 0 branch
        m[rng.random(m.shape) < 0.3] = 0.0
        m[m.sum(axis=1) == 0, 0] = 1.0
        m = m / m.sum(axis=1, keepdims=True)
    return {"kappa": m.tolist()}


def prop_decomposition(case):
    kappa = np.array(case["kappa"])
    dec = channels.decompose(kappa)
    return (0.0 <= dec.gamma <= 1.0
            and np.max(np.abs(dec.reconstruct() - np.asarray(Channel(kappa)))) <= 1e-10)


def sample_product(rng, i):
    rows, cols = int(rng.integers(2, 6)), int(rng.integers(2, 6))
    m = int(rng.integers(1, cols + 1))
    A = _random_channel(rng, rows, cols, conc=float(rng.choice([0.3, 1.0, 5.0])))
    targets = rng.integers(0, m, cols)
    B = np.zeros((cols, m))
    B[np.arange(cols), targets] = 1.0
    return {"A": A.tolist(), "B": B.tolist()}


def prop_product(case):
    lhs, rhs = channels.gamma_product_check(case["A"], case["B"])
    return lhs >= rhs - 1e-12


def _sample_side_2x3(rng, i):
    return {"side": _random_channel(rng, 2, 3, conc=float(rng.choice([0.3, 1.0]))).tolist()}


def _prop_strategy_gamma(case):
    side = np.array(case["side"])
    if len(channels.argmin_rows(side)) > 2:
        return None
    g = channels.gamma(side)
    for u in channels.all_strategies(2, 3):
        if channels.gamma(channels.strategy_channel(u, side)) < g - 1e-12:
            return False
    return True


def _sample_d_system(rng, i):
    sys = _random_binary_system(rng)
    n_side = int(rng.integers(1, 4))
    side = _random_channel(rng, sys.n_states, n_side)
    sys = sys.with_side(side)
    case = _system_case(sys)
    case["u"] = [int(x) for x in rng.integers(0, 2, n_side)]
    case["p_x"] = rng.dirichlet(np.ones(2)).tolist()
    return case


def _joint_given_u(sys: StateChannelSystem, u) -> np.ndarray:
    """p(s, y | U = u) summed out of the full joint over (s, s~, x, y)."""
    side = np.asarray(sys.side)
    w = sys.tensor()
    p_s = np.asarray(sys.p_s)
    n_s, n_x, n_y = w.shape
    cond = np.zeros((n_s, n_y))  # p(s, y | U = u)
    for s in range(n_s):
        for st in range(side.shape[1]):
            for x in range(n_x):
                if x == u[st]:
                    cond[s] += p_s[s] * side[s, st] * w[s, x]
    return cond


def _prop_d_matches_joint(case):
    sys = _system_of(case)
    u = channels.ShannonStrategy(case["u"], 2)
    p_x = np.array(case["p_x"])
    kappa = channels.strategy_channel(u, sys.side)
    d = channels.d_functional(kappa, sys, p_x)
    cond = _joint_given_u(sys, case["u"])
    # p_{Y,S} induced by p_x at every state: p(s) sum_x p_x(x) W_s(x, y)
    ref = np.asarray(sys.p_s)[:, None] * sys.output_given_state(p_x)
    direct = kl(cond.ravel(), ref.ravel()) if cond.sum() > 0 else 0.0
    if not math.isfinite(d):
        return not math.isfinite(direct)
    return abs(d - direct) <= 1e-10


def _sample_convex(rng, i):
    case = _sample_d_system(rng, i)
    n_s = len(case["p_s"])
    case["k1"] = _random_channel(rng, n_s, 2).tolist()
    case["k2"] = _random_channel(rng, n_s, 2).tolist()
    return case


def _prop_d_convex(case):
    sys = _system_of(case)
    k1, k2 = np.array(case["k1"]), np.array(case["k2"])
    p_x = np.array(case["p_x"])
    mid = channels.d_functional(0.5 * (k1 + k2), sys, p_x)
    ends = 0.5 * (channels.d_functional(k1, sys, p_x) + channels.d_functional(k2, sys, p_x))
    return mid <= ends + 1e-12


DOMINANCE_KAPPAS = 100


def sample_dominance(rng, i):
    """A random binary system with a positive capacity and both inputs in use."""
    while True:
        sys = _random_binary_system(rng)
        res = capacity_no_side_info(sys)
        if res.value > 1e-6 and min(res.input_dist) > SUPPORT_MASS:
            break
    p_x = np.asarray(res.input_dist)
    need = max(scalarfn.threshold_Ta(p_x[0]), scalarfn.threshold_Ta(p_x[1]))
    kappas = [_noisy_channel(rng, sys.n_states, 2, float(rng.uniform(need, 1.0))).tolist()
              for _ in range(DOMINANCE_KAPPAS)]
    case = _system_case(sys)
    case.update(p_x=p_x.tolist(), kappas=kappas)
    return case


def prop_dominance(case):
    sys = _system_of(case)
    return all(channels.d_dominance_check(sys, case["p_x"], k) for k in case["kappas"])


def _channels_checks(opts):
    return [
        Check("decomposition", sample_matrix, prop_decomposition, _scaled(10)),
        Check("gamma-product", sample_product, prop_product, _scaled(10)),
        Check("strategy-gamma", _sample_side_2x3, _prop_strategy_gamma, _scaled(10)),
        Check("D-matches-joint", _sample_d_system, _prop_d_matches_joint, _scaled(10)),
        Check("D-convex", _sample_convex, _prop_d_convex, _scaled(10)),
        Check("D-dominance", sample_dominance, prop_dominance, _scaled(100)),
    ]


# ---------------------------------------------------------------- threshold

def _prop_T(case):
    t = scalarfn.threshold_T()
    inv_e = math.exp(-1.0)
    round_trip = abs(scalarfn.xi(inv_e, 1.0 - t) - scalarfn.xi(inv_e, 0.0)) <= 1e-12
    return abs(t - T_REF) <= 5e-7 and round_trip and t < 1.0 - inv_e


def Ta_grid(points: int = 1000) -> np.ndarray:
    inv_e = math.exp(-1.0)
    return inv_e + (1.0 - inv_e) * (np.arange(1, points + 1) / (points + 1))


def prop_Ta(case=None):
    vals = [scalarfn.threshold_Ta(float(a)) for a in Ta_grid()]
    increasing = all(v1 < v2 for v1, v2 in zip(vals, vals[1:]))
    corner = abs(scalarfn.threshold_Ta(1.0 - math.exp(-1.0)) - scalarfn.threshold_T()) <= 1e-10
    return increasing and corner


def sample_kkt(rng, i):
    return _system_case(_random_binary_system(rng))


def prop_kkt_band(case):
    """Equalized divergences and a law inside (1/e, 1 - 1/e) at the optimum."""
    sys = _system_of(case)
    res = capacity_no_side_info(sys)
    p = np.asarray(res.input_dist)
    if res.value <= 1e-9 or p.min() <= SUPPORT_MASS:
        return None
    d = letter_divergences(sys.joint_channel(), p)
    inv_e = math.exp(-1.0)
    return bool(np.all(np.abs(d - res.value) <= 1e-8) and np.all((p > inv_e) & (p < 1 - inv_e)))


def _plateau_sampler(side):
    def sample(rng, i):
        if side is not None:
            s = np.asarray(side)
            sys = _random_binary_system(rng, n_states=s.shape[0]).with_side(s)
        else:
            sys = _random_binary_system(rng, n_states=int(rng.integers(2, 4)))
            g = float(rng.uniform(scalarfn.threshold_T(), 1.0))
            sys = sys.with_side(_noisy_channel(rng, sys.n_states, int(rng.integers(2, 4)), g))
        return _system_case(sys)
    return sample


def prop_plateau(case):
    """C >= C_no_side always, with equality once gamma(side) >= T."""
    sys = _system_of(case)
    c = capacity_causal(sys).value
    c_low = capacity_no_side_info(sys).value
    if c < c_low - 1e-9:
        return False
    if channels.gamma(sys.side) >= scalarfn.threshold_T():
        return abs(c - c_low) <= 1e-8
    return True


def _sample_lower(rng, i):
    sys = _random_binary_system(rng)
    side = _random_channel(rng, sys.n_states, int(rng.integers(1, 4)), conc=0.5)
    return _system_case(sys.with_side(side))


def _threshold_checks(opts):
    side = opts.get("side")
    return [
        Check("T-value", lambda rng, i: {}, _prop_T, _once),
        Check("Ta-increasing", lambda rng, i: {}, prop_Ta, _once),
        Check("kkt-band", sample_kkt, prop_kkt_band, _scaled(10)),
        Check("plateau", _plateau_sampler(side), prop_plateau, _scaled(10)),
        Check("causal-above-no-side", _sample_lower, prop_plateau, _scaled(10)),
    ]


_BUILDERS = {
    "theorem1": _theorem1_checks,
    "theorem2": _theorem2_checks,
    "appendixA": _appendixA_checks,
    "channels": _channels_checks,
    "threshold": _threshold_checks,
}


def checks_for(suite: str, opts: dict | None = None) -> list[Check]:
    if suite not in _BUILDERS:
        raise ValueError(f"unknown suite {suite!r}")
    return _BUILDERS[suite](opts or {})


def _job(args):
    suite, index, seed, n, opts = args
    check = checks_for(suite, opts)[index]
    return run_check(suite, check, seed, n, SUITES.index(suite) * 64 + index)


def run(suite: str, seed: int = 0, n: int = 1000, opts: dict | None = None,
        workers: int = 1) -> SuiteReport:
    """Run ``suite`` (or every suite for ``"all"``)."""
    names = SUITES if suite == "all" else (suite,)
    jobs = []
    for name in names:
        for index in range(len(checks_for(name, opts))):
            jobs.append((name, index, seed, n, opts or {}))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_job, jobs))
    else:
        reports = [_job(j) for j in jobs]
    return SuiteReport(reports)


def _jsonable(obj: Any):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def format_report(report: SuiteReport) -> list[str]:
    lines = [c.line() for c in report.checks]
    for c in report.checks:
        if c.counterexample is not None:
            lines.append(f"counterexample {c.suite}/{c.name}: "
                         + json.dumps(_jsonable(c.counterexample), sort_keys=True))
            if c.error:
                lines.append(f"  raised {c.error}")
    lines.append(f"total: passed={report.passed} failed={report.failed}")
    return lines
