import math

import pytest

from entropy_ray import DomainError, scalarfn
from entropy_ray.channels import identity
from entropy_ray.experiments import (
    CSV_HEADER,
    build_example,
    gap_witness,
    parse_grid,
    plateau_onset,
    sweep,
    sweep_csv,
)


def test_build_example_matrices():
    sys = build_example(0.01)
    assert sys.y_given_xs[0].rows.tolist() == [[1.0, 0.0], [0.99, 0.01]]
    assert sys.y_given_xs[1].rows.tolist() == [[0.99, 0.01], [1.0, 0.0]]
    assert list(sys.p_s) == [0.99, 0.01]
    for bad in (0.0, 0.5, 0.6, -0.1):
        with pytest.raises(DomainError):
            build_example(bad)


def test_parse_grid():
    g = parse_grid("0:1:0.01")
    assert len(g) == 101 and g[0] == 0.0 and g[-1] == 1.0 and g[33] == 0.33
    assert parse_grid("0.1:0.35:0.1") == [0.1, 0.2, 0.3]
    assert parse_grid("0.5:0.5:0.1") == [0.5]
    for bad in ("0:1", "1:0:0.1", "0:1:0", "0:1:-1", "a:b:c", "0:inf:1"):
        with pytest.raises(DomainError):
            parse_grid(bad)


def test_sweep_rows_and_csv():
    rows = sweep(build_example(0.01), "0:1:0.25")
    assert [r.epsilon for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    for r in rows:
        assert r.gap == r.capacity_causal - r.capacity_no_side
        assert r.gap >= -1e-9
        assert r.gamma == r.epsilon
    assert abs(rows[-1].gap) <= 1e-9
    text = sweep_csv(rows)
    lines = text.split("\n")
    assert lines[0] == CSV_HEADER and lines[-1] == "" and len(lines) == 7
    assert "\r" not in text
    assert sweep_csv(sweep(build_example(0.01), "0:1:0.25")) == text


def test_sweep_parallel_matches_serial():
    sys = build_example(0.02)
    assert sweep_csv(sweep(sys, "0:0.4:0.05", workers=3)) == sweep_csv(sweep(sys, "0:0.4:0.05"))


def test_sweep_rejects_wrong_shapes():
    with pytest.raises(DomainError):
        sweep(build_example(0.01).with_side(identity(2)).__class__(
            (identity(2),), [1.0]), "0:1:0.5")
    with pytest.raises(DomainError):
        sweep(build_example(0.01), [1.5])


def test_plateau_onset():
    rows = sweep(build_example(0.01), [0.2, 0.3, 0.4, 0.5])
    assert plateau_onset(rows) == 0.4
    assert plateau_onset(rows[:1]) is None


def test_gap_witness_domain():
    t = scalarfn.threshold_T()
    for iota in (0.0, t, 0.5, -0.1):
        with pytest.raises(DomainError):
            gap_witness(0.01, iota)
    with pytest.raises(DomainError):
        gap_witness(0.7, 0.05)


def test_gap_witness_report():
    rep = gap_witness(0.01, 0.2)
    assert rep.epsilon == pytest.approx(scalarfn.threshold_T() - 0.2)
    assert rep.found and rep.gap > 1e-7
    assert rep.strategy.table == (0, 1, 0)
    lines = rep.lines()
    assert lines[4] == "FOUND" and lines[5] == "best_strategy=010"


def test_gap_shrinks_toward_threshold():
    gaps = [gap_witness(0.01, iota).gap for iota in (0.2, 0.15, 0.1, 0.05, 0.02)]
    assert all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
    assert gaps[-1] >= -1e-12 and math.isfinite(gaps[0])
