"""Self-fulfilling fire sales: two clearing solutions for the same banks.

Two identical banks each hold one share and owe 0.6, borrowing is free and
the book is steep enough that f vanishes at the market cap.  If nobody sells,
prices stay at the top and borrowing covers everything.  If everybody sells,
prices and collateral values collapse and selling everything is the only
feasible response.  Iterating from the top and from the bottom finds both.
"""
from firesale import MarketScenario, nash_certificate, picard_clearing, validate_scenario
from firesale.io import atomic_write, solve_csv

from _common import out_path

sc = MarketScenario.linear([1.0, 1.0], [0.6, 0.6], 0.0, 0.5, 0.7, haircut_alpha=0.25, market_cap=2.0)

for direction in ("maximal", "minimal"):
    rep = picard_clearing(sc, mechanism="vwap", direction=direction)
    cert = nash_certificate(sc, rep)
    print(f"{direction:>8}: q = {rep.q:.4f}, qbar = {rep.qbar.round(4)}, s = {rep.s.round(4)}, "
          f"certificate {cert.max_improvement:.1e}")
    atomic_write(out_path(f"multiplicity_{direction}.csv"), solve_csv(sc, rep))

# The validator flags what makes this possible: the book is exhausted at M.
print()
print(validate_scenario(sc))
