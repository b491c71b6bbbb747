import numpy as np
import pytest

from firesale import (
    BankAccount,
    LinearHaircut,
    MarketScenario,
    ScenarioError,
    TabulatedDensity,
    calibrate_eba,
    fundamental_solvency,
    uniqueness_condition,
    validate_scenario,
)
from firesale.validation import separation_margin
from helpers import eba_records, multiplicity_scenario


def test_eba_configuration_passes():
    sc = calibrate_eba(eba_records())
    rep = validate_scenario(sc)
    assert rep.passed, str(rep)
    u = uniqueness_condition(sc, "vwap")
    assert u.holds and u.lhs == pytest.approx(0.01, rel=1e-12) and u.rhs == pytest.approx(0.3, rel=1e-12)


def test_eba_lob_condition_fails_for_many_banks():
    sc = calibrate_eba(eba_records())
    u = uniqueness_condition(sc, "lob")
    # lhs = n M (n/2) α = n² / 600 with α = 1/(300 M)
    assert u.lhs == pytest.approx(sc.n**2 / 600, rel=1e-12)
    assert not u.holds


def test_gamma_one_fails_separation():
    sc = MarketScenario.linear([1.0, 2.0], [0.3, 0.5], 0.01, 0.01, 1.0)
    rep = validate_scenario(sc)
    assert not rep["separation[vwap]"].passed
    assert not rep["separation[lob]"].passed
    assert separation_margin(sc, "vwap") == 0.0


def test_nonmonotone_tabulated_density_is_reported():
    dens = TabulatedDensity((0.0, 1.0, 2.0), (1.0, 0.9, 0.95))
    banks = (BankAccount("A", 1.0, 0.2), BankAccount("B", 1.0, 0.2))
    sc = MarketScenario(banks, 0.0, dens, LinearHaircut(0.5, 0.05, 2.0), 2.0)
    rep = validate_scenario(sc)
    assert not rep["density.decreasing"].passed
    assert not rep.passed
    assert "density.decreasing" in [f.name for f in rep.failures()]


def test_grid_separation_agrees_with_analytic_for_linear_pair():
    sc = MarketScenario.linear([1.0, 2.0], [0.3, 0.5], 0.01, 0.05, 0.6)
    tab = MarketScenario(sc.banks, sc.repo_rate, TabulatedDensity((0.0, 3.0), (1.0, 0.85)), sc.haircut, 3.0)
    assert separation_margin(sc, "lob") == pytest.approx(0.4)
    assert separation_margin(tab, "lob") == pytest.approx(0.4, abs=1e-12)
    assert separation_margin(tab, "vwap") == pytest.approx(0.4, abs=1e-12)


def test_malformed_input_raises():
    with pytest.raises(ScenarioError):
        BankAccount("X", 0.0, 1.0)
    with pytest.raises(ScenarioError):
        BankAccount("X", 1.0, -1.0)
    with pytest.raises(ScenarioError):
        MarketScenario.linear([1.0], [0.5], 0.0, -0.1, 0.5)
    with pytest.raises(ScenarioError):
        MarketScenario.linear([1.0, 2.0], [0.5, 0.5], 0.0, 0.1, 0.5, market_cap=2.0)
    with pytest.raises(ScenarioError):
        MarketScenario.linear([1.0], [0.5], -0.01, 0.1, 0.5)


def test_market_cap_check_and_density_positivity():
    rep = validate_scenario(multiplicity_scenario())
    assert rep["market_cap"].passed
    # f(σ) = 1 - σ/2 reaches 0 at M = 2
    assert not rep["density.positive"].passed


def test_fundamental_solvency_examples():
    sc = MarketScenario.linear([1.0, 1.0], [0.5, 0.5], 0.1, 0.1, 0.5)
    assert fundamental_solvency(sc, "vwap").all()
    edge = MarketScenario.linear([1.0, 1.0], [0.9, 0.9], 0.1, 0.1, 0.5)
    assert fundamental_solvency(edge, "vwap").all()  # h = a f̂(2a) exactly
    assert not fundamental_solvency(multiplicity_scenario(), "vwap").any()


def test_fundamental_solvency_is_monotone_in_shortfall():
    base = [0.2, 0.5, 0.9]
    sc = MarketScenario.linear([1.0, 1.0, 1.0], base, 0.1, 0.1, 0.5)
    for mech in ("vwap", "lob"):
        flags = fundamental_solvency(sc, mech)
        for bump in (0.01, 0.1, 0.3):
            more = MarketScenario.linear([1.0] * 3, [h + bump for h in base], 0.1, 0.1, 0.5)
            assert np.all(fundamental_solvency(more, mech) <= flags)


def test_uniqueness_condition_examples():
    n, a = 3, 1.0
    for alpha, expect in ((0.5 / (3 * n * a) * 0.9, True), (0.5 / (3 * n * a) * 1.1, False)):
        sc = MarketScenario.linear([a] * n, [0.2] * n, 0.05, alpha, 0.5, market_cap=n * a)
        assert uniqueness_condition(sc, "vwap").holds is expect
    tiny = MarketScenario.linear([1.0, 1.0], [0.3, 0.3], 0.0, 1e-9, 0.6)
    u = uniqueness_condition(tiny, "vwap")
    assert u.holds and u.lhs < 1e-8
    caveat = uniqueness_condition(multiplicity_scenario(), "vwap")
    assert caveat.caveat
