from ._pcmdp import (
    Env,
    ExperimentConfig,
    ExperimentResult,
    LearnerConfig,
    RunRecord,
    make_env,
    make_env_from_config,
    optimal_value,
    read_csv,
    run_experiment,
    write_csv,
)

__all__ = [
    "Env",
    "ExperimentConfig",
    "ExperimentResult",
    "LearnerConfig",
    "RunRecord",
    "make_env",
    "make_env_from_config",
    "optimal_value",
    "read_csv",
    "run_experiment",
    "write_csv",
]
