import numpy as np
import pytest

from firesale import (
    MarketScenario,
    Regime,
    RegimeTieError,
    SensitivityError,
    SymmetricScenario,
    finite_difference_sensitivity,
    picard_clearing,
    rate_sensitivity,
    sensitivity_lob,
    sensitivity_vwap,
)
from helpers import golden_scenario, relative_gap, stable_sensitivity_cases, symmetric_case


def _check_against_fd(sc, rep, tol=1e-4):
    an = rate_sensitivity(sc, rep)
    fd = finite_difference_sensitivity(sc, rep.mechanism)
    assert relative_gap(an.dq_dr, fd.dq_dr) < tol
    assert relative_gap(an.dqbar_dr, fd.dqbar_dr) < tol
    assert relative_gap(an.dtotal_dr, fd.dtotal_dr) < tol
    assert np.max(np.abs(an.ds_dr - fd.ds_dr)) < tol * np.max(np.abs(fd.ds_dr))
    return an


def test_golden_lob_matches_differences():
    sc = golden_scenario()
    rep = picard_clearing(sc, mechanism="lob")
    an = _check_against_fd(sc, rep)
    # the interior bank's depth moves with both banks: multiplicity 2, not 1
    assert an.constants["multiplicity"] == 2
    assert an.dtotal_dr > 0
    assert an.constants["W"].shape == (3, 3)


@pytest.mark.parametrize("mech", ["vwap", "lob"])
def test_symmetric_interior_matches_differences(mech):
    rng = np.random.default_rng(51)
    for _ in range(3):
        sym = symmetric_case(rng, "H2", mech)
        sc = sym.to_scenario()
        rep = picard_clearing(sc, mechanism=mech)
        assert set(rep.regime) == {Regime.INTERIOR}
        an = _check_against_fd(sc, rep)
        if mech == "vwap":
            c, d = an.constants["c"], an.constants["d"]
            assert 0 <= c < 1 and d > 0
            assert isinstance(an.dqbar_dr, float)


@pytest.mark.parametrize("mech", ["vwap", "lob"])
def test_random_stable_cases_match_differences(mech):
    rng = np.random.default_rng(52 if mech == "vwap" else 53)
    for sc, rep in stable_sensitivity_cases(rng, mech, 6):
        _check_against_fd(sc, rep)


def test_all_insolvent_gives_exact_zeros():
    sc = MarketScenario.linear([1.0, 1.0], [0.99, 0.95], 0.05, 0.1, 0.5)
    for mech, fn in (("vwap", sensitivity_vwap), ("lob", sensitivity_lob)):
        rep = picard_clearing(sc, mechanism=mech)
        assert set(rep.regime) == {Regime.INSOLVENT}
        an = fn(sc, rep)
        assert an.dq_dr == 0.0 and an.dtotal_dr == 0.0
        assert np.all(np.asarray(an.dqbar_dr) == 0.0) and np.all(an.ds_dr == 0.0)


def test_empty_interior_gives_exact_zeros():
    sc = golden_scenario()
    rep = picard_clearing(sc, mechanism="vwap")
    assert Regime.INTERIOR not in rep.regime
    an = sensitivity_vwap(sc, rep)
    assert an.constants["d_tilde"] == 0.0
    assert an.dq_dr == 0.0 and an.dqbar_dr == 0.0 and np.all(an.ds_dr == 0.0)
    fd = finite_difference_sensitivity(sc, "vwap")
    assert abs(fd.dq_dr) < 1e-6


def test_single_bank_lob_reduces_to_vwap():
    sc = MarketScenario.linear([1.0], [0.4], 0.1, 0.3, 0.5)
    lob = sensitivity_lob(sc, picard_clearing(sc, mechanism="lob"))
    vwap = sensitivity_vwap(sc, picard_clearing(sc, mechanism="vwap"))
    assert lob.regimes == (Regime.INTERIOR,)
    assert lob.dq_dr == pytest.approx(vwap.dq_dr, rel=1e-10)
    assert lob.dqbar_dr[0] == pytest.approx(vwap.dqbar_dr, rel=1e-10)
    assert lob.dtotal_dr == pytest.approx(vwap.dtotal_dr, rel=1e-10)


def test_regime_tie_is_refused_and_fallback_flags_report():
    # shortfall placed exactly where the interior level meets the upper bound
    sym = SymmetricScenario(2, 1.0, 0.3, 0.1, 0.1)
    from firesale.symmetric import region_bounds

    h2 = region_bounds(sym, "vwap")[0]
    sc = SymmetricScenario(2, 1.0, h2, 0.1, 0.1).to_scenario()
    rep = picard_clearing(sc, mechanism="vwap")
    with pytest.raises(RegimeTieError, match="one-sided"):
        sensitivity_vwap(sc, rep)
    fb = rate_sensitivity(sc, rep, fallback_fd=True)
    assert fb.fd_fallback


def test_wrong_mechanism_is_rejected():
    sc = golden_scenario()
    rep = picard_clearing(sc, mechanism="vwap")
    with pytest.raises(SensitivityError):
        sensitivity_lob(sc, rep)
