from .targets import (
    dql_target,
    double_dql_target,
    dueling_aggregate,
    ppo_clip_objective,
    ddpg_target,
    td3_target,
    critic_input,
)
from .base import (
    ALGORITHMS,
    BEST_HYPERPARAMETERS,
    ActionGrid,
    ReplayBuffer,
    AgentConfig,
    Policy,
    TrainingTrace,
    save_agent,
    load_agent,
)
from .mcpg import mcpg_update
from .train import train, validation_rsqp
