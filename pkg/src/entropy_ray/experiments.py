"""The binary example system, the erasure sweep and the gap witness."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
import math
from typing import NamedTuple

from . import scalarfn
from .capacity import best_nonconstant_strategy, capacity_causal, capacity_no_side_info
from .channels import ShannonStrategy, StateChannelSystem, erasure_side_channel, gamma
from .errors import DomainError
from .systemfile import fmt

CSV_HEADER = "epsilon,capacity_causal,capacity_no_side,gap,gamma"
GRID_DIGITS = 12
FOUND_TOL = 1e-9


def build_example(delta: float) -> StateChannelSystem:
    """Two states; state 0 leaves input 0 clean, state 1 leaves input 1 clean.

    The cleaner state has probability ``1 - delta``.
    """
    if not 0.0 < delta < 0.5:
        raise DomainError(f"delta must lie in (0, 0.5), got {delta}")
    w0 = [[1.0, 0.0], [1.0 - delta, delta]]
    w1 = [[1.0 - delta, delta], [1.0, 0.0]]
    return StateChannelSystem((w0, w1), [1.0 - delta, delta])


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` to the list of points, stop included when on the lattice."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise DomainError(f"grid must look like start:stop:step, got {text!r}") from exc
    if not all(math.isfinite(v) for v in (start, stop, step)) or step <= 0 or stop < start:
        raise DomainError(f"need finite start <= stop and step > 0, got {text!r}")
    count = math.floor((stop - start) / step + 1e-9)
    if count > 10**7:
        raise DomainError("grid has too many points")
    return [round(start + k * step, GRID_DIGITS) for k in range(count + 1)]


class SweepRow(NamedTuple):
    epsilon: float
    capacity_causal: float
    capacity_no_side: float
    gap: float
    gamma: float

    def csv(self) -> str:
        return ",".join(fmt(v) for v in self)


def _check_sweep_system(system: StateChannelSystem):
    if system.n_inputs != 2 or system.n_states != 2:
        raise DomainError("the erasure sweep needs two states and a binary input")


def _causal_at(args):
    system, eps = args
    return capacity_causal(system.with_side(erasure_side_channel(eps))).value


def sweep(system: StateChannelSystem, grid, workers: int = 1) -> list[SweepRow]:
    """Both capacities with the erasure side channel at every ``epsilon`` of ``grid``.

    ``workers > 1`` spreads grid points over processes; each solve is
    deterministic, so the rows do not depend on the worker count.
    """
    _check_sweep_system(system)
    eps_list = parse_grid(grid) if isinstance(grid, str) else [float(e) for e in grid]
    for eps in eps_list:
        if not 0.0 <= eps <= 1.0:
            raise DomainError(f"erasure probability {eps} outside [0, 1]")
    base = capacity_no_side_info(system).value
    tasks = [(system, eps) for eps in eps_list]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            causal = list(pool.map(_causal_at, tasks))
    else:
        causal = [_causal_at(t) for t in tasks]
    return [
        SweepRow(eps, c, base, c - base, gamma(erasure_side_channel(eps)))
        for eps, c in zip(eps_list, causal)
    ]


def sweep_csv(rows) -> str:
    return "".join(line + "\n" for line in [CSV_HEADER, *(r.csv() for r in rows)])


def plateau_onset(rows, tol: float = 1e-8) -> float | None:
    """Smallest grid epsilon whose gap is at most ``tol``."""
    hits = [r.epsilon for r in rows if r.gap <= tol]
    return min(hits) if hits else None


class WitnessReport(NamedTuple):
    delta: float
    iota: float
    epsilon: float
    capacity_causal: float
    capacity_no_side: float
    gap: float
    strategy: ShannonStrategy | None

    @property
    def found(self) -> bool:
        return self.gap > FOUND_TOL

    def lines(self) -> list[str]:
        table = "none" if self.strategy is None else "".join(str(x) for x in self.strategy.table)
        return [
            f"delta={fmt(self.delta)} iota={fmt(self.iota)} epsilon={fmt(self.epsilon)}",
            f"C={fmt(self.capacity_causal)}",
            f"C_no_side={fmt(self.capacity_no_side)}",
            f"gap={fmt(self.gap)}",
            "FOUND" if self.found else "NOT-FOUND",
            f"best_strategy={table}",
        ]


def gap_witness(delta: float, iota: float) -> WitnessReport:
    """Capacities of the example system with erasure probability T - iota."""
    t = scalarfn.threshold_T()
    if not 0.0 < iota < t:
        raise DomainError(f"iota must lie in (0, T={t:.6f}), got {iota}")
    system = build_example(delta)
    eps = t - iota
    base = capacity_no_side_info(system)
    res = capacity_causal(system.with_side(erasure_side_channel(eps)))
    return WitnessReport(delta, iota, eps, res.value, base.value, res.value - base.value,
                         best_nonconstant_strategy(res))
