"""Collaborative-transport toolkit.

Strategy inference over winding numbers, an entropy-regularized sampling
MPC, quasistatic stick dynamics, simulated human partners, and a seeded
trial harness with JSON Lines logging. See the module docstrings for the
individual pieces; `cotransport.scenario.study_scenario()` is the quickest
way to get a runnable setup.
"""

from .controller import ControllerConfig, Plan, entropy_cost, obstacle_cost, plan, rollout_cost, terminal_cost
from .dynamics import HumanPrediction, StickModel, predict_human, step
from .errors import (
    CapacityError,
    CotransportError,
    DomainError,
    LogIntegrityError,
    ProtocolError,
    SamplingDensityError,
    ScenarioError,
)
from .harness import (
    MetricsReport,
    TickRecord,
    TrialConfig,
    TrialEngine,
    TrialLog,
    compute_metrics,
    derive_seed,
    dump_log,
    dumps_log,
    load_log,
    loads_log,
    run_trial,
    verify_log,
)
from .humansim import HumanPolicy, act
from .inference import (
    InferenceParams,
    StrategyDistribution,
    action_likelihood,
    entropy,
    likelihood_mode,
    posterior,
    prior,
)
from .scenario import (
    ALGORITHMS,
    STANDARD_STARTS,
    Scenario,
    controller_for,
    dumps_scenario,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    start_state,
    study_scenario,
)
from .topology import (
    LEFT,
    RIGHT,
    StrategyLabel,
    WindingAccumulator,
    enumerate_strategies,
    sign_with_tiebreak,
    strategy_index,
    strategy_label,
    winding_step,
    winding_update,
)
from .workspace import (
    Context,
    Obstacle,
    Pose2,
    Rect,
    TeamState,
    Vec2,
    normalize_angle,
    point_segment_distance,
    segment_square_distance,
    signed_angle,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
