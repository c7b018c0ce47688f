import math

import numpy as np
import pytest

from popgraph.attack import QueryChannel
from popgraph.bigraph import INFINITE_ALPHA, BigraphParams, generate
from popgraph.bounds import (BoundInputs, corollary1_bound, expected_group_counts, i_max, psi,
                             theorem2_bounds)
from popgraph.numerics import ChannelSpec, bernoulli_channel_mi

from oracles import brute_query_bound, bsc_imax_all_sizes, closed_form_bound

SMALL = BigraphParams(n=1000, m=100, mu=5, alpha=3)


def bsc_inputs(params, nq, epsilon, c_prime=1.0, **kw):
    ch = QueryChannel(ChannelSpec.bsc(nq))
    return BoundInputs(params=params, channels={"default": ch}, p_theta={"default": 1.0},
                       epsilon=epsilon, entropy=math.log(params.m), c_prime=c_prime, **kw)


# -- psi and i_max ---------------------------------------------------------------

def test_psi_examples():
    assert psi(math.log(100), 0.01, 2.0) == pytest.approx(2 * math.log(100) + 2, abs=1e-12)
    assert psi(math.log(100), 0.01, 2.0) == pytest.approx(11.2103, abs=1e-4)
    assert psi(0.0, 1.0, 0.0) == 0.0
    values = [psi(1.0, e, 0.5) for e in (0.5, 0.1, 0.01, 1e-6)]
    assert all(b > a for a, b in zip(values, values[1:]))
    with pytest.raises(ValueError):
        psi(1.0, 0.0, 0.0)


def test_i_max_examples():
    assert i_max([ChannelSpec.bsc(0.5)], params=SMALL) == 0.0
    one_group = generate(BigraphParams(n=1, m=4, mu=2, alpha=3))
    assert i_max([ChannelSpec.noiseless()], graph=one_group) == pytest.approx(math.log(2), abs=1e-12)
    ten = generate(BigraphParams(n=1, m=100, mu=10, alpha=3))
    expected = max(math.log(0.95 / 0.14), math.log(0.95 / 0.86),
                   math.log(0.05 / 0.14), math.log(0.05 / 0.86))
    assert i_max([ChannelSpec.bsc(0.05)], graph=ten) == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(1.91482, abs=1e-5)


def test_i_max_matches_enumeration_over_all_sizes():
    for m, nq in ((100, 0.05), (37, 0.2), (10, 0.0)):
        p = BigraphParams(n=10, m=m, mu=1, alpha=3)
        assert i_max({"a": QueryChannel(ChannelSpec.bsc(nq))}, params=p) == pytest.approx(
            bsc_imax_all_sizes(m, nq), abs=1e-12)


def test_i_max_needs_source():
    with pytest.raises(ValueError):
        i_max([ChannelSpec.bsc(0.1)])


# -- query bound -------------------------------------------------------------------

def test_expected_group_counts():
    c = expected_group_counts(SMALL)
    assert c[0] == 0
    assert c[1:].sum() == pytest.approx(SMALL.n, rel=1e-12)


def test_small_config_matches_exhaustive_scan():
    res = theorem2_bounds(bsc_inputs(SMALL, 0.05, 0.01))
    ref = brute_query_bound(1000, 100, 3, 0.05, 0.01, math.log(100))
    assert res.feasible
    assert res.d_star["default"] == ref["d_star"]
    assert res.i_star["default"] == ref["i_star"]
    assert res.psi == pytest.approx(ref["psi"], abs=1e-12)
    assert res.q_bar_bound == pytest.approx(ref["q_bar"], rel=1e-12)
    assert res.p_e_bound == 0.01


@pytest.mark.parametrize("n, m, alpha, nq, eps, c_prime", [
    (1000, 100, 3, 0.05, 0.01, 1.0),
    (5000, 200, 2.5, 0.1, 0.001, 1.0),
    (20000, 60, 4, 0.2, 0.05, 0.5),
    (300, 30, 3, 0.01, 0.1, 2.0),
    (10**5, 100, 3, 0.05, 0.01, 1.0),
])
def test_bound_against_brute_force(n, m, alpha, nq, eps, c_prime):
    p = BigraphParams(n=n, m=m, mu=5, alpha=alpha)
    res = theorem2_bounds(bsc_inputs(p, nq, eps, c_prime=c_prime))
    ref = brute_query_bound(n, m, alpha, nq, eps, math.log(m), c_prime=c_prime)
    if ref is None:
        assert not res.feasible
        return
    assert (res.d_star["default"], res.i_star["default"]) == (ref["d_star"], ref["i_star"])
    assert res.q_bar_bound == pytest.approx(ref["q_bar"], rel=1e-12)
    assert res.p_e_bound == eps / c_prime


def test_resubstitution_and_maximality():
    inputs = bsc_inputs(SMALL, 0.05, 0.01)
    res = theorem2_bounds(inputs)
    d, i = res.d_star["default"], res.i_star["default"]
    counts = expected_group_counts(SMALL)
    info = np.array([bernoulli_channel_mi(k, 100, ChannelSpec.bsc(0.05)) for k in range(101)])
    supply = lambda lo: float((counts * info)[max(lo, 1):].sum())
    assert res.psi <= supply(d - 1)
    assert all(res.psi > supply(k - 1) for k in range(d + 1, 101))
    assert res.psi <= supply(d) + i * info[d - 1]
    if i > 0:
        assert res.psi > supply(d) + (i - 1) * info[d - 1]


def test_fully_noisy_channel_is_infeasible():
    res = theorem2_bounds(bsc_inputs(SMALL, 0.5, 0.01))
    assert not res.feasible and res.q_bar_bound == math.inf
    assert res.p_e_bound == 0.01


def test_q_bar_nondecreasing_in_noise():
    p = BigraphParams(n=10**5, m=100, mu=5, alpha=3)
    values = [theorem2_bounds(bsc_inputs(p, nq, 0.01)).q_bar_bound
              for nq in (0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_two_noise_classes():
    chans = {"a": QueryChannel(ChannelSpec.bsc(0.01), "a"), "b": QueryChannel(ChannelSpec.bsc(0.2), "b")}
    inputs = BoundInputs(params=SMALL, channels=chans, p_theta={"a": 0.5, "b": 0.5},
                         epsilon=0.01, entropy=math.log(100))
    res = theorem2_bounds(inputs)
    assert res.feasible
    assert res.d_star["a"] == res.d_star["b"]
    lo = theorem2_bounds(bsc_inputs(SMALL, 0.01, 0.01)).q_bar_bound
    hi = theorem2_bounds(bsc_inputs(SMALL, 0.2, 0.01)).q_bar_bound
    assert lo <= res.q_bar_bound <= hi


def test_graph_mode_uses_realized_degrees():
    g = generate(BigraphParams(n=1000, m=100, mu=5, alpha=3, seed=1))
    counts = np.bincount(g.degrees, minlength=101)
    res = theorem2_bounds(bsc_inputs(SMALL, 0.05, 0.01, graph=g, group_counts=counts))
    assert res.i_max == pytest.approx(i_max([ChannelSpec.bsc(0.05)], graph=g))
    assert res.q_bar_bound <= g.n


def test_bound_input_validation():
    with pytest.raises(ValueError):
        bsc_inputs(SMALL, 0.05, 1.0)
    with pytest.raises(ValueError):
        bsc_inputs(SMALL, 0.05, 0.01, c_prime=0)
    with pytest.raises(ValueError):
        theorem2_bounds(bsc_inputs(BigraphParams(n=10, m=10, mu=1, alpha=INFINITE_ALPHA), 0.05, 0.01))


# -- closed form ----------------------------------------------------------------------

def test_closed_form_small_config():
    res = corollary1_bound(SMALL, 0.05, 0.01)
    assert closed_form_bound(1000, 100, 3, 0.05, 0.01, math.log(100)) is None
    assert not res.feasible and res.p_e_bound == 0.01


@pytest.mark.parametrize("n, m, alpha, nq, eps, c", [
    (10**5, 100, 3, 0.05, 0.01, 1.0),
    (10**6, 200, 2.5, 0.1, 0.001, 1.0),
    (10**5, 100, 3, 0.05, 0.01, 3.0),
    (2 * 10**5, 150, 4, 0.0, 0.05, 1.0),
])
def test_closed_form_matches_formula(n, m, alpha, nq, eps, c):
    p = BigraphParams(n=n, m=m, mu=5, alpha=alpha)
    res = corollary1_bound(p, nq, eps, c_thm1=c)
    ref = closed_form_bound(n, m, alpha, nq, eps, math.log(m), c=c)
    assert ref is not None and res.feasible
    assert res.d_star == ref["d_star"]
    assert res.q_bar_bound == pytest.approx(ref["q_bar"], rel=1e-12)


def test_closed_form_reference_value():
    res = corollary1_bound(BigraphParams(n=10**5, m=100, mu=5, alpha=3), 0.05, 0.01)
    assert res.d_star == 40
    assert res.q_bar_bound == pytest.approx(28.8068432541765, rel=1e-12)


def test_closed_form_fully_noisy():
    res = corollary1_bound(BigraphParams(n=10**6, m=100, mu=5, alpha=3), 0.5, 0.01)
    assert not res.feasible
    for c_prime in (0.5, 1.0, 4.0):
        assert corollary1_bound(SMALL, 0.05, 0.02, c_prime=c_prime).p_e_bound == 0.02 / c_prime
