from .env import (
    EnvConfig,
    HedgeAccount,
    EpisodeRecord,
    make_state,
    step,
    payoff,
    terminal_loss,
    rsqp,
    reward,
    query_policy,
    run_episode,
    hedge_batch,
    run_episodes,
    episode_trace,
    write_episode_trace,
)
