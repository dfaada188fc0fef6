from ._core import (
    ClubLearner,
    ClubcascadeError,
    bounds,
    expected_reward,
    glm_mle,
    optimal_list,
    regret_decomposition_check,
    run_replay,
    run_synth,
    set_warnings_enabled,
)

__all__ = [
    "ClubLearner",
    "ClubcascadeError",
    "bounds",
    "expected_reward",
    "glm_mle",
    "optimal_list",
    "regret_decomposition_check",
    "run_replay",
    "run_synth",
    "set_warnings_enabled",
]
