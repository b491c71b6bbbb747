"""Fire-sale clearing with collateralized repo borrowing.

Banks cover a cash shortfall by selling an illiquid asset into an order book
(VWAP or limit-order-book execution) and borrowing the rest against the
remaining shares at a volume-dependent haircut.
"""
from .analytics import SWEEP_COLUMNS, rate_sweep
from .clearing import (
    ClearingConfig,
    ClearingError,
    NashCertificate,
    nash_certificate,
    picard_clearing,
    price_map,
    total_outcomes,
)
from .curves import CurveError, LinearDensity, LinearHaircut, TabulatedDensity, TabulatedHaircut
from .equilibrium import (
    InnerSolverError,
    PriceDomainError,
    best_response,
    best_response_iteration,
    classify_regimes,
    inner_equilibrium,
    interior_target,
    objective,
    response_bounds,
)
from .io import (
    BalanceSheetRecord,
    CalibrationError,
    CalibrationPolicy,
    ScenarioParseError,
    calibrate_eba,
    emit_scenario,
    parse_scenario,
    read_eba_csv,
)
from .model import (
    BankAccount,
    Direction,
    EquilibriumReport,
    LiquidationVector,
    MarketScenario,
    Mechanism,
    PriceState,
    Regime,
    ScenarioError,
)
from .pricing import inverse_demand, lob_prices, lob_proceeds, price_jacobian, vwap_price
from .sensitivity import (
    RegimeTieError,
    SensitivityError,
    SensitivityReport,
    finite_difference_sensitivity,
    rate_sensitivity,
    sensitivity_lob,
    sensitivity_vwap,
)
from .symmetric import SymmetricDomainError, SymmetricScenario, SymmetricSolution, symmetric_solve
from .validation import (
    UniquenessCheck,
    ValidationReport,
    fundamental_solvency,
    separation_margin,
    uniqueness_condition,
    validate_scenario,
)

__all__ = [
    "BalanceSheetRecord",
    "BankAccount",
    "CalibrationError",
    "CalibrationPolicy",
    "ClearingConfig",
    "ClearingError",
    "CurveError",
    "Direction",
    "EquilibriumReport",
    "InnerSolverError",
    "LinearDensity",
    "LinearHaircut",
    "LiquidationVector",
    "MarketScenario",
    "Mechanism",
    "NashCertificate",
    "PriceDomainError",
    "PriceState",
    "Regime",
    "RegimeTieError",
    "SWEEP_COLUMNS",
    "ScenarioError",
    "ScenarioParseError",
    "SensitivityError",
    "SensitivityReport",
    "SymmetricDomainError",
    "SymmetricScenario",
    "SymmetricSolution",
    "TabulatedDensity",
    "TabulatedHaircut",
    "UniquenessCheck",
    "ValidationReport",
    "best_response",
    "best_response_iteration",
    "calibrate_eba",
    "classify_regimes",
    "emit_scenario",
    "finite_difference_sensitivity",
    "fundamental_solvency",
    "inner_equilibrium",
    "interior_target",
    "inverse_demand",
    "lob_prices",
    "lob_proceeds",
    "nash_certificate",
    "objective",
    "parse_scenario",
    "picard_clearing",
    "price_jacobian",
    "price_map",
    "rate_sensitivity",
    "rate_sweep",
    "read_eba_csv",
    "response_bounds",
    "sensitivity_lob",
    "sensitivity_vwap",
    "separation_margin",
    "symmetric_solve",
    "total_outcomes",
    "uniqueness_condition",
    "validate_scenario",
    "vwap_price",
]

__version__ = "0.1.0"
