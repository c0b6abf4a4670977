"""Repeated principal-agent bandit games with self-interested learning agents.

A principal steers an agent through per-round monetary incentives while both
sides learn their reward means from bandit feedback.  The library provides
the agent models, the incentive-search primitives, four phased-elimination
principals (i.i.d. online/offline, exploration-robust, oracle refinement),
the convex-geometry machinery and principal for linear rewards, and a seeded
experiment harness with three regret ledgers.
"""

from .channel import HorizonExhausted, InteractionChannel, ScriptedChannel
from .env import (AgentBehavior, AgentState, ArmSet, ConfigError, Distribution,
                  RewardModel, agent_select, agent_update, one_hot_incentive,
                  optimal_incentive, sample_rewards)
from .game import (GameChannel, PhaseRecord, Transcript, build_channel,
                   check_compatibility, compute_instant_regret)
from .geometry import (ConvexBody, DesignWeights, MSPTrace,
                       approx_g_optimal_design, msp_search,
                       steiner_halving_cut, volume_fraction_above, width)
from .harness import (ExperimentConfig, ScalingReport, build_behavior,
                      build_model, load_summaries, pick_gamma_for_phases,
                      run_experiment, run_single, run_sweep, scaling_report)
from .principal_explore import (explore_phase_length, incentive_test,
                                run_exploratory_principal,
                                run_oracle_explore_principal,
                                trustworthy_eliminate)
from .principal_iid import (bad_arm_budget, enlarge_incentive,
                            offline_eliminate, online_eliminate, phase_length,
                            run_iid_principal)
from .principal_linear import (bad_arm_schedule, linear_enlarged_incentive,
                               linear_offline_eliminate, linear_phase_params,
                               ols_principal_estimate, run_linear_principal)
from .rng import RngStreams, make_streams, stream_rng
from .search import noisy_binary_search

__version__ = "0.1.0"
