"""Tests for relay partitioning and selection on asymmetric networks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diamondnet.asymmetric import (
    RATIO_CONSTANT,
    Partition,
    aggregate_upper_bound,
    certified_ratio,
    class_count,
    levels,
    parallel_upper_bound,
    partition,
    select_and_rate,
    single_relay_rates,
    star_gains,
)
from diamondnet.exceptions import InvalidNetworkError, PartitionError
from diamondnet.models import AsymmetricNetwork


def _network(g, h):
    return AsymmetricNetwork(gains_g=list(g), gains_h=list(h))


def test_levels_and_class_count():
    """Test quantization depth and class count."""
    assert levels(2) == 3
    assert class_count(2) == 26
    assert levels(8) == 9
    assert class_count(8) == 122
    assert levels(64) == 18


def test_star_gains_example():
    """Test dominance-adjusted maxima."""
    star = star_gains(_network([4.0, 100.0], [1.0, 1e-4]))

    assert star.g_star == 4.0
    assert star.h_star == 1.0
    assert star.g_witness == 1
    assert star.h_witness == 1


def test_partition_symmetric_gains():
    """Test that equal gains with h >= g land in the top source class."""
    parts = partition(_network([1.0, 1.0], [1.0, 1.0]))

    assert parts.t1_ell[0] == [1, 2]
    assert parts.t1 == [] and parts.t2 == []
    assert parts.L == 3
    assert parts.L_tilde == 26
    assert parts.sizes() == {"T1": 0, "T2": 0, "T1_0": 2}


def test_partition_weak_source_link_overloads():
    """Test that a relay with a negligible source gain goes to T1."""
    parts = partition(_network([1.0, 1e-9], [1.0, 1e-9]))

    assert parts.t1 == [2]
    assert parts.t1_ell[0] == [1]
    assert parts.label_of(2) == "T1"
    assert parts.label_of(1) == "T1_0"


def test_partition_weak_destination_link_overloads():
    """Test that a relay with a negligible destination gain goes to T2."""
    parts = partition(_network([4.0, 100.0], [1.0, 1e-4]))

    assert parts.t2 == [2]
    assert parts.t2_ell[0] == [1]


def test_partition_mac_limited_class():
    """Test symmetric gains with g >= N^2 h land in the top destination class."""
    parts = partition(_network([1.0] * 4, [0.01] * 4))

    assert parts.t2_ell[0] == [1, 2, 3, 4]


def test_partition_needs_two_relays():
    """Test that a single relay is rejected."""
    with pytest.raises(InvalidNetworkError):
        partition(_network([1.0], [1.0]))


def test_check_cover_detects_overlap():
    """Test cover validation on a hand-built partition."""
    parts = Partition(
        n_relays=2,
        t1=[1],
        t2=[],
        t1_ell=[[1, 2], [], [], []],
        t2_ell=[[], [], [], []],
        s_kl=[[[] for _ in range(4)] for _ in range(4)],
        L=3,
        L_tilde=26,
    )

    with pytest.raises(PartitionError):
        parts.check_cover()


def test_select_and_rate_symmetric_pair():
    """Test relay selection on N=2, g=h=1."""
    selection = select_and_rate(_network([1.0, 1.0], [1.0, 1.0]))

    assert selection.class_id == "T1_0"
    assert selection.members == [1, 2]
    assert selection.certified > 0.5 * math.log2(1.4)
    assert selection.certified == pytest.approx(0.25309, abs=1e-4)
    assert selection.empirical == pytest.approx(0.5, abs=1e-9)
    assert not selection.outside_guarantee


def test_select_and_rate_singleton_class_flagged():
    """Test that a single-relay winning class is flagged."""
    selection = select_and_rate(_network([1.0, 1e-9], [1.0, 1e-9]))

    assert selection.class_id == "T1_0"
    assert selection.members == [1]
    assert selection.outside_guarantee


def test_aggregate_upper_bound_symmetric_pair():
    """Test the aggregate bound on N=2, g=h=1."""
    upper = aggregate_upper_bound(_network([1.0, 1.0], [1.0, 1.0]))

    assert upper == pytest.approx(26 * 0.5 * math.log2(3.0))


def test_single_relay_rates():
    """Test the one-relay witness rates."""
    rates = single_relay_rates(_network([1.0, 1.0], [1.0, 1.0]))

    assert rates.source_side.rate == pytest.approx(0.5 * math.log2(1.25))
    assert rates.source_side.relay == 1
    assert rates.destination_side.rate == pytest.approx(0.5)
    assert rates.destination_side.class_id == "T1_0"


def test_certified_ratio_symmetric_pair():
    """Test the ratio certificate on N=2, g=h=1."""
    net = _network([1.0, 1.0], [1.0, 1.0])
    certificate = certified_ratio(net)

    assert certificate.bound == RATIO_CONSTANT * 26 * 26
    assert certificate.ratio <= certificate.bound
    assert certificate.k_estimate == pytest.approx(certificate.ratio)
    assert certified_ratio(net, selection=select_and_rate(net)).ratio == certificate.ratio


def test_random_instances_certify():
    """Test cover, rate ordering and the ratio bound on 500 random networks."""
    rng = np.random.default_rng(2023)
    for _ in range(500):
        n = int(rng.integers(2, 65))
        g = 10.0 ** rng.uniform(-6.0, 6.0, size=n)
        h = 10.0 ** rng.uniform(-6.0, 6.0, size=n)
        net = _network(g, h)

        parts = partition(net)
        covered = parts.t1 + parts.t2 + [i for _, members in parts.classes() for i in members]
        assert sorted(covered) == list(range(1, n + 1))

        star = star_gains(net)
        assert star.h_star <= star.g_star
        assert star.h_star >= star.g_star / (n * n) * (1.0 - 1e-12)

        selection = select_and_rate(net)
        for rate in selection.evaluated:
            assert rate.certified <= rate.empirical * (1.0 + 1e-9) + 1e-15

        certificate = certified_ratio(net, selection=selection)
        assert selection.empirical <= certificate.aggregate_upper
        assert certificate.ratio <= certificate.bound


def _in_cell(value, top, cell):
    return math.ldexp(top, -cell - 1) < value <= math.ldexp(top, -cell)


def _any_cell(value, top, last):
    return any(_in_cell(value, top, cell) for cell in range(last + 1))


def _assert_membership(net, parts):
    n = net.n_relays
    star = star_gains(net)
    g_star, h_star, last = star.g_star, star.h_star, parts.L
    gains = {i + 1: (g, h) for i, (g, h) in enumerate(zip(net.gains_g, net.gains_h))}

    for relay, (g, h) in gains.items():
        in_t1 = g <= g_star / n**3
        in_t2 = not in_t1 and h <= h_star / n**3
        assert (relay in parts.t1) == in_t1
        assert (relay in parts.t2) == in_t2

    for ell, members in enumerate(parts.t1_ell):
        for relay in members:
            g, h = gains[relay]
            assert _in_cell(g, g_star, ell) and h >= g
    for ell, members in enumerate(parts.t2_ell):
        for relay in members:
            g, h = gains[relay]
            assert _in_cell(h, h_star, ell) and g >= n * n * h
            assert not (_any_cell(g, g_star, last) and h >= g)
    for k, row in enumerate(parts.s_kl):
        for ell, members in enumerate(row):
            for relay in members:
                g, h = gains[relay]
                assert _in_cell(g, g_star, k) and _in_cell(h, h_star, ell)
                assert h < g < n * n * h


def test_partition_membership_conditions_random():
    """Test every class's thresholds on 500 random networks with gains in [1e-8, 1e8]."""
    rng = np.random.default_rng(808)
    for _ in range(500):
        n = int(rng.integers(2, 129))
        g = 10.0 ** rng.uniform(-8.0, 8.0, size=n)
        h = 10.0 ** rng.uniform(-8.0, 8.0, size=n)
        net = _network(g, h)
        parts = partition(net)

        parts.check_cover()
        _assert_membership(net, parts)


@st.composite
def gain_vectors(draw):
    n = draw(st.integers(min_value=2, max_value=24))
    exponents = st.floats(min_value=-8.0, max_value=8.0)
    g = [10.0 ** draw(exponents) for _ in range(n)]
    h = [10.0 ** draw(exponents) for _ in range(n)]
    return g, h


@settings(max_examples=200, deadline=None)
@given(gain_vectors(), st.integers(min_value=-30, max_value=30))
def test_partition_covariant_under_power_of_two_scaling(gains, k):
    """Test that scaling every gain by 2^k leaves all sets unchanged."""
    g, h = gains
    scale = math.ldexp(1.0, k)
    reference = partition(_network(g, h))
    scaled = partition(_network([x * scale for x in g], [x * scale for x in h]))

    assert scaled.classes() == reference.classes()
    assert scaled.t1 == reference.t1
    assert scaled.t2 == reference.t2


def test_parallel_bound_symmetric_pair():
    """Test the parallel bound on N=2, g=h=1 is a single class term."""
    bound = parallel_upper_bound(_network([1.0, 1.0], [1.0, 1.0]))

    assert bound.t1_term == 0.0 and bound.t2_term == 0.0
    assert bound.class_bounds == {"T1_0": pytest.approx(0.5 * math.log2(3.0))}
    assert bound.total == pytest.approx(0.5 * math.log2(3.0))
    assert bound.aggregate == pytest.approx(26 * 0.5 * math.log2(3.0))


def test_parallel_bound_source_overload():
    """Test the T1 term 1/2 log(1 + g*/N^2)."""
    bound = parallel_upper_bound(_network([1.0, 1e-9], [1.0, 1e-9]))

    assert bound.t1_term == pytest.approx(0.5 * math.log2(1.25))
    assert bound.class_bounds["T1_0"] == pytest.approx(0.5)
    assert bound.total == pytest.approx(0.5 + 0.5 * math.log2(1.25))


def test_parallel_bound_destination_overload():
    """Test the T2 term 1/2 log(1 + 2 h*/N) and the relaxed T2_0 class."""
    bound = parallel_upper_bound(_network([4.0, 100.0], [1.0, 1e-4]))

    assert bound.t2_term == pytest.approx(0.5)
    assert bound.class_bounds == {"T2_0": pytest.approx(0.5 * math.log2(53.0))}
    assert bound.total == pytest.approx(0.5 + 0.5 * math.log2(53.0))


def test_parallel_bound_dominated_random():
    """Test parallel <= aggregate and overload domination on 200 random networks."""
    rng = np.random.default_rng(99)
    for _ in range(200):
        n = int(rng.integers(2, 65))
        g = 10.0 ** rng.uniform(-6.0, 6.0, size=n)
        h = 10.0 ** rng.uniform(-6.0, 6.0, size=n)
        net = _network(g, h)

        bound = parallel_upper_bound(net)
        rates = single_relay_rates(net)

        assert bound.total <= aggregate_upper_bound(net) * (1.0 + 1e-9)
        assert bound.total >= bound.largest_class_bound
        assert rates.source_side.rate <= bound.largest_class_bound * (1.0 + 1e-9)
        assert rates.destination_side.rate <= bound.largest_class_bound * (1.0 + 1e-9)
        assert bound.t1_term <= rates.source_side.rate + 1e-12
        assert bound.t2_term <= rates.destination_side.rate + 1e-12
