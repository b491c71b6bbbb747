"""Helpers shared by the demo scripts."""
from pathlib import Path

import numpy as np

from firesale import BalanceSheetRecord

OUT = Path(__file__).resolve().parent / "output"


def out_path(name):
    OUT.mkdir(exist_ok=True)
    return OUT / name


def synthetic_eba(n=30, seed=7):
    # lognormal balance-sheet sizes, capital 3-8% of assets, tier 1 ratio 8-20%
    rng = np.random.default_rng(seed)
    T = np.exp(rng.normal(np.log(2e5), 1.0, n))
    C = T * rng.uniform(0.03, 0.08, n)
    R = rng.uniform(0.08, 0.2, n)
    return [BalanceSheetRecord(f"EB{i:02d}", float(T[i]), float(C[i]), float(R[i])) for i in range(n)]
