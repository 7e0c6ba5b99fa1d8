import os
from typing import Any, Dict

from dotenv import load_dotenv

from utils.constants import EXPLORE_LEN_SWEEP, TABLE1_DELTAS, XI_GRID

load_dotenv()


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, default))


# Base utilities and discounting of the experiments
MODEL_CONFIG = {
    "v_pop": _env_float("MODEL_V_POP", 1.0),
    "delta": _env_float("MODEL_DELTA", 0.99),
    "p": _env_float("MODEL_P", 1e-3),
}

# Monte Carlo engine defaults
SIMULATION_CONFIG = {
    "episodes": _env_int("SIM_EPISODES", 100_000),
    "master_seed": _env_int("SIM_SEED", 20240601),
    "mode": os.getenv("SIM_MODE", "conditional"),
    "truncation_epsilon": _env_float("SIM_TRUNCATION_EPSILON", 1e-8),
    "horizon_cap": _env_int("SIM_HORIZON_CAP", 1_000_000),
    "n_jobs": _env_int("SIM_JOBS", 1),
    "chunk_size": _env_int("SIM_CHUNK_SIZE", 2_000),
}

# Experiment commands
EXPERIMENT_CONFIG = {
    "table1_deltas": TABLE1_DELTAS,
    "figure1_delta": 0.99,
    "figure34_deltas": (0.0, 0.999),
    "xis": XI_GRID,
    "explore_len_sweep": EXPLORE_LEN_SWEEP,
    "ci_threshold": _env_float("CI_THRESHOLD", 0.02),
    "format": os.getenv("OUTPUT_FORMAT", "csv"),
    "out_dir": os.getenv("OUTPUT_DIR", "results"),
}

# Exact first-passage computations
ANALYTICS_CONFIG = {
    "first_passage_step_cap": _env_int("FIRST_PASSAGE_STEP_CAP", 1_000_000),
}

LOGGING_CONFIG = {
    "log_dir": os.getenv("LOG_DIR"),
    "enable_json": os.getenv("LOG_JSON", "0") == "1",
    "console_level": os.getenv("LOG_LEVEL", "INFO"),
}


def get_config(config_type: str) -> Dict[str, Any]:
    """Retrieve the settings dict for one concern."""
    configs = {
        "model": MODEL_CONFIG,
        "simulation": SIMULATION_CONFIG,
        "experiment": EXPERIMENT_CONFIG,
        "analytics": ANALYTICS_CONFIG,
        "logging": LOGGING_CONFIG,
    }

    if config_type not in configs:
        raise ValueError(f"Unknown config type: {config_type}")
    return configs[config_type]
