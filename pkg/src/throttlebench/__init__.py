"""throttlebench: budget throttling and pacing in repeated second-price auctions.

Simulates a budget-constrained buyer who either enters auctions truthfully
(throttling) or shades her bid (pacing), learns the competing-bid
distribution on the fly, and is scored against exact fluid, price-conditional
and hindsight benchmarks.
"""

from .benchmarks import (
    DlpSolution,
    FluidSolution,
    HindsightResult,
    TwoPriceRegretFloor,
    dlp_opt,
    fluid_opt,
    hindsight_opt,
    regret,
    two_price_regret_floor,
    two_price_revenue_cap,
)
from .distributions import DiscreteDistribution, InterimCurves, interim_curves
from .estimation import ConfidenceRadius, SampleStore, dkw_epsilon, estimate_cost, estimate_reward
from .instances import (
    Instance,
    build_instance,
    instance_from_text,
    instance_to_text,
    pacing_gap_instance,
    prefix_trap_instance,
    random_instance,
    reactive_price_instance,
    singleton_price_instance,
    two_price_instance,
)
from .model import EpisodeConfig, InfoMode, RoundOutcome, Trajectory, run_episode, settle_round
from .strategies import (
    AdaptivePacing,
    OgdCb,
    StaticThrottle,
    Strategy,
    always_enter,
    always_skip,
    entering_rate_floor,
    make_strategy,
)

__version__ = "0.1.0"
