import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from firesale import LinearDensity, LinearHaircut, TabulatedDensity, inverse_demand, lob_prices, price_jacobian, vwap_price
from firesale.pricing import (
    PricingError,
    haircut_value,
    lob_depth,
    lob_proceeds,
    lob_segmentation,
    own_proceeds,
    vwap_derivatives,
)

F01 = LinearDensity(0.1, 10.0)


def test_vwap_examples():
    assert vwap_price(0.0, F01) == 1.0
    assert vwap_price(2.0, F01) == pytest.approx(0.9, abs=1e-15)
    f = LinearDensity(0.25, 2.0)  # αM = 0.5
    assert vwap_price(2.0, f) == pytest.approx(0.75, abs=1e-15)
    assert vwap_price(1e-9, F01) < 1.0
    with pytest.raises(PricingError):
        vwap_price(11.0, F01)


def test_vwap_derivatives_match_differences():
    f = TabulatedDensity((0.0, 1.0, 3.0), (1.0, 0.7, 0.5))
    for S in (0.4, 2.0):
        v, d1, d2 = vwap_derivatives(S, f)
        e = 1e-6
        assert d1 == pytest.approx((vwap_price(S + e, f) - vwap_price(S - e, f)) / (2 * e), rel=1e-6)
        _, up, _ = vwap_derivatives(S + e, f)
        _, dn, _ = vwap_derivatives(S - e, f)
        assert d2 == pytest.approx((up - dn) / (2 * e), rel=1e-5, abs=1e-8)
    _, d1, d2 = vwap_derivatives(0.0, F01)
    assert d1 == pytest.approx(-0.05) and d2 == 0.0


def test_lob_examples():
    assert np.allclose(lob_prices([1.0, 2.0], F01), [0.9, 0.825], atol=1e-15)
    assert np.allclose(lob_prices([0.7, 0.7, 0.7], F01), vwap_price(2.1, F01), atol=1e-15)
    assert np.array_equal(lob_prices([0.0, 0.0], F01), [1.0, 1.0])
    assert lob_prices([0.0, 1.0], F01)[0] == 1.0


def test_lob_depth_examples():
    assert lob_depth(1, [1.0, 2.0]) == pytest.approx(3.0)
    assert lob_depth(0, [0.4] * 4) == pytest.approx(1.6)
    assert lob_depth(0, [0.0, 1.0, 2.0]) == 0.0


def test_segmentation_structure():
    s = np.array([2.0, 0.5, 2.0, 1.0])
    seg = lob_segmentation(s)
    assert list(s[seg.permutation]) == sorted(s)
    assert seg.boundaries[0] == 0.0
    assert seg.depth == pytest.approx(s.sum(), abs=1e-15)
    assert np.all(np.diff(seg.boundaries) >= 0)
    # tied order statistics share the minimal rank and get a zero-width segment
    assert seg.ranks[0] == seg.ranks[2]
    assert seg.boundaries[4] == seg.boundaries[3]


def test_haircut_examples():
    assert haircut_value(0.0, LinearHaircut(0.7, 0.05, 4.0)) == 0.7
    assert haircut_value(2.0, LinearHaircut(0.7, 0.25, 2.0)) == pytest.approx(0.2)
    M = 1234.0
    assert haircut_value(M, LinearHaircut(0.7, 1 / (300 * M), M)) == pytest.approx(0.7 - 1 / 300)
    with pytest.raises(PricingError):
        haircut_value(-0.1, LinearHaircut(0.7, 0.05, 4.0))


vectors = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8)


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_proceeds_conservation(s):
    s = np.array(s)
    f = LinearDensity(0.1, 10.0)
    total = float(s.sum())
    assert lob_proceeds(s, f).sum() == pytest.approx(float(f.integral(total)), rel=1e-12, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(vectors, st.randoms(use_true_random=False))
def test_tie_independence(s, rnd):
    s = np.array(s + s[:2])  # force ties
    perm = list(range(s.size))
    rnd.shuffle(perm)
    p = lob_prices(s, F01)
    assert np.allclose(lob_prices(s[perm], F01), p[perm], rtol=0, atol=1e-15)
    for v in np.unique(s):
        assert np.ptp(p[s == v]) == 0.0


def test_monotonicity_and_vwap_dominance():
    rng = np.random.default_rng(3)
    f = TabulatedDensity((0.0, 2.0, 6.0), (1.0, 0.8, 0.6))
    for _ in range(200):
        s = rng.uniform(0, 1, int(rng.integers(2, 6)))
        p = lob_prices(s, f)
        order = np.argsort(s)
        assert np.all(np.diff(p[order]) <= 1e-15)
        j = int(rng.integers(s.size))
        bumped = s.copy()
        bumped[j] += 0.1
        assert np.all(lob_prices(bumped, f) <= p + 1e-15)
        v = vwap_price(float(s.sum()), f)
        assert p[order[-1]] <= v + 1e-15
        assert p[order[0]] >= v - 1e-15
        x = np.linspace(0, 1, 50)
        assert np.all(np.diff(own_proceeds(x, j, s, f, "lob")) > 0)


@pytest.mark.parametrize("mech", ["vwap", "lob"])
def test_price_jacobian_matches_differences(mech):
    f = LinearDensity(0.1, 10.0)
    s = np.array([0.3, 1.1, 0.7, 2.0])
    J = price_jacobian(s, f, mech)
    e = 1e-7
    for j in range(s.size):
        up, dn = s.copy(), s.copy()
        up[j] += e
        dn[j] -= e
        fd = (inverse_demand(up, f, mech) - inverse_demand(dn, f, mech)) / (2 * e)
        assert np.allclose(J[:, j], fd, atol=1e-7)


def test_price_jacobian_tied_group_moves_together():
    f = LinearDensity(0.1, 10.0)
    s = np.array([0.5, 0.5, 1.0])
    J = price_jacobian(s, f, "lob")
    e = 1e-7
    d = np.array([1.0, 1.0, 0.0]) * e
    fd = (lob_prices(s + d, f) - lob_prices(s - d, f)) / (2 * e)
    assert np.allclose(J[:, 0] + J[:, 1], fd, atol=1e-7)


def test_batch_prices_match_single_vectors():
    from firesale.pricing import lob_prices_batch

    f = TabulatedDensity((0.0, 2.0, 6.0), (1.0, 0.8, 0.6))
    rng = np.random.default_rng(4)
    S = rng.uniform(0, 1, (300, 5))
    S[:, 1] = S[:, 3]
    S[::5, 2] = 0.0
    expect = np.array([lob_prices(s, f) for s in S])
    assert np.allclose(lob_prices_batch(S, f), expect, rtol=0, atol=1e-15)
