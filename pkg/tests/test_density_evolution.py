import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldpc_cran.density_evolution import (MAX_ITERS, STALLED, ComplexityTable, DeConfig, NonConvergence,
                                         complexity_per_bit, de_step, iteration_counts, iterations_required,
                                         run_de, threshold, threshold_bisection)
from ldpc_cran.ensemble import CodeSpec, DegreeDistribution, regular_distribution

from test_ensemble import distributions


def test_de_step_closed_form(reg36):
    assert de_step(reg36, 0.4, 0.4) == pytest.approx(0.4 * (1 - 0.6 ** 5) ** 2, abs=1e-12)


def test_de_step_zero_points(palette, reg36):
    for d in [reg36] + [c.distribution for c in palette]:
        assert de_step(d, 0.0, 0.7) == 0.0
        assert de_step(d, 0.6, 0.0) == 0.0


def test_run_de_converges_below_threshold(reg36):
    tr = run_de(reg36, 0.3)
    assert tr.converged and tr.status == "converged"
    assert tr.iterations == len(tr.eps_sequence) - 1
    assert tr.eps_sequence[-1] <= 1e-3
    assert all(b < a for a, b in zip(tr.eps_sequence, tr.eps_sequence[1:]))


def test_run_de_fig2_pair(reg36):
    # 0.43 sits just above the (3,6) threshold, 0.429 just below
    hi = run_de(reg36, 0.43)
    assert not hi.converged and hi.status == "stalled"
    assert hi.eps_sequence[-1] > 0.2
    lo = run_de(reg36, 0.429)
    assert lo.converged


def test_run_de_zero(reg36):
    tr = run_de(reg36, 0.0)
    assert tr.converged and tr.iterations == 0 and tr.eps_sequence == [0.0]


def test_run_de_cap_is_distinct_from_stall(reg36):
    tr = run_de(reg36, 0.4294, DeConfig(max_iters=20))
    assert tr.status == "max_iters" and tr.iterations == 20 and not tr.converged
    assert iterations_required(reg36, 0.4294, DeConfig(max_iters=20)) is MAX_ITERS
    assert iterations_required(reg36, 0.45) is STALLED
    assert not MAX_ITERS and isinstance(STALLED, NonConvergence)


def test_config_validation():
    with pytest.raises(ValueError):
        DeConfig(eps_thresh=0)
    with pytest.raises(ValueError):
        DeConfig(max_iters=0)


def test_threshold_36(reg36):
    assert threshold(reg36) == pytest.approx(0.4294, abs=5e-4)


def test_threshold_matches_bisection_oracle(reg36):
    for d in (reg36, regular_distribution(3, 4), regular_distribution(4, 8)):
        t = threshold(d)
        b = threshold_bisection(d, DeConfig(max_iters=20_000), tol=1e-5)
        assert abs(t - b) < 1e-4


def test_threshold_bracketing(reg36):
    t = threshold(reg36)
    cfg = DeConfig(max_iters=10_000)
    assert run_de(reg36, t - 1e-3, cfg).converged
    assert not run_de(reg36, t + 1e-3, cfg).converged


def test_threshold_two_seven_is_one_sixth():
    # eps(x) = x / (1 - (1-x)^6) is increasing, so the minimum sits at x = eps_thresh
    t = threshold(regular_distribution(2, 7))
    x = 1e-3
    assert t == pytest.approx(x / (1 - (1 - x) ** 6), abs=1e-9)
    assert t == pytest.approx(1 / 6, abs=1e-3)


def test_threshold_below_capacity(palette):
    for c in palette:
        assert threshold(c.distribution) <= 1 - c.rate


def test_iterations_monotone_36(reg36):
    a, b = iterations_required(reg36, 0.2), iterations_required(reg36, 0.4)
    assert 0 < a < b
    assert iterations_required(reg36, 0.0) == 0
    assert isinstance(iterations_required(reg36, 0.44), NonConvergence)


def test_iteration_counts_match_scalar(palette, reg36):
    rng = np.random.default_rng(3)
    for d in [reg36] + [c.distribution for c in palette]:
        eps = np.concatenate([rng.uniform(0, 1, 40), [0.0, 1e-3, 1.0]])
        it, st_ = iteration_counts(d, eps)
        for e, i, s in zip(eps, it, st_):
            tr = run_de(d, float(e))
            assert tr.iterations == i
            assert {"converged": 0, "stalled": 1, "max_iters": 2}[tr.status] == s


def test_complexity_arithmetic(reg36):
    code = CodeSpec(regular_distribution(3, 6), 0.5, threshold(reg36), "(3,6)")
    ell = iterations_required(reg36, 0.3)
    assert complexity_per_bit(code, 0.3) == pytest.approx(ell * 6 * 0.5 / 0.5)
    assert complexity_per_bit(code, 0.0) == 0
    assert isinstance(complexity_per_bit(code, 0.45), NonConvergence)
    # 10 iterations of a d_c=7, R=1/2 code is 70 units
    assert 10 * 7 * (1 - 0.5) / 0.5 == 70


def test_complexity_spike_36(reg36):
    code = CodeSpec(reg36, 0.5, threshold(reg36), "(3,6)")
    assert complexity_per_bit(code, 0.42) > 3 * complexity_per_bit(code, 0.20)


def test_complexity_rejects_mixed_rho():
    d = DegreeDistribution({3: 1.0}, {6: 0.5, 8: 0.5})
    from ldpc_cran.ensemble import design_rate
    code = CodeSpec(d, design_rate(d), 0.3, "mixed")
    with pytest.raises(ValueError, match="check-regular"):
        complexity_per_bit(code, 0.1)


def test_complexity_table(palette):
    code = palette[4]
    tab = ComplexityTable(code, step=1e-4)
    for e in (0.0, 0.1234, 0.3, 0.45, 0.49, 0.6):
        v = tab(e)
        ref = complexity_per_bit(code, round(e, 4))
        if isinstance(ref, NonConvergence):
            assert math.isnan(v)
        else:
            assert v == pytest.approx(ref, rel=1e-12)


def test_complexity_table_concurrent(palette):
    tab = ComplexityTable(palette[6])
    out = []
    ts = [threading.Thread(target=lambda: out.append(tab(0.2))) for _ in range(4)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert len(set(out)) == 1


@settings(max_examples=60, deadline=None)
@given(distributions(), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_de_step_monotone(dist, e0, a, b):
    lo, hi = min(a, b), max(a, b)
    assert de_step(dist, e0, lo) <= de_step(dist, e0, hi) + 1e-15
    assert 0 <= de_step(dist, e0, hi) <= e0 + 1e-15


@settings(max_examples=25, deadline=None)
@given(distributions(), st.floats(0.05, 0.95))
def test_converges_strictly_below_threshold(dist, frac):
    t = threshold(dist)
    tr = run_de(dist, frac * t, DeConfig(max_iters=100_000))
    assert tr.converged
    seq = tr.eps_sequence
    assert all(b < a for a, b in zip(seq, seq[1:]) if a > 1e-3)


def test_iterations_nondecreasing_in_eps0(palette):
    for c in palette:
        grid = np.linspace(0, c.threshold, 200, endpoint=False)
        it, st_ = iteration_counts(c.distribution, grid, DeConfig(max_iters=10_000))
        assert (st_ == 0).all()
        assert (np.diff(it) >= 0).all()
