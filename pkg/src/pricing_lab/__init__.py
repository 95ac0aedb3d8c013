"""Exact pricing solvers for storable goods sold to forward-looking buyers."""

from .consumer import (
    ConsumerPlan,
    MarketOutcome,
    audit_plan,
    best_response,
    best_response_concave,
    best_response_linear,
    effective_price,
)
from .contingent import (
    CertificationReport,
    GameState,
    PriceGrid,
    StrategyProfile,
    build_price_grid,
    builtin_profile,
    certify_spne,
    discrimination_upper_bound,
    simulate_profile,
    solve_spne_single_buyer,
)
from .errors import PricingError
from .model import (
    SKIP,
    ConcaveStorage,
    LinearStorage,
    MarketInstance,
    MultiBuyer,
    PriceSchedule,
    SingleBuyer,
    load_instance,
    save_instance,
    validate_instance,
)
from .preannounced import (
    best_fixed_price,
    enumerate_grid_schedules,
    solve_preannounced_bruteforce,
    solve_preannounced_dp,
)
from .sweep import SweepRow, ratio_sweep

__all__ = [name for name in dir() if not name.startswith("_")]
