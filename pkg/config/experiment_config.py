"""
Typed configuration of one experiment command.

Values are resolved as built-in defaults < --config file < command-line flags.
The config file is a flat key=value file whose keys mirror the flag names
("vp", "deltas", "explore-len", ...); list values are comma-separated.
"""

import os
from typing import Any, Dict, List, Literal, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import get_config
from simulation.types import SimulationMode
from utils.errors import InvalidParameterError

_model = get_config("model")
_simulation = get_config("simulation")
_experiment = get_config("experiment")
_logging = get_config("logging")

COMMANDS = ("table1", "figure1", "figure34", "simulate")
# Commands that run over a list of discount factors
MULTI_DELTA_COMMANDS = ("table1", "figure34")

# Flag spellings that differ from field names
KEY_ALIASES = {
    "vp": "v_pop",
    "seed": "master_seed",
    "out": "out_path",
    "svg": "emit_svg",
    "jobs": "n_jobs",
    "explore_len": "explore_lens",
    "xi": "xis",
}

# Defaults that depend on the command
COMMAND_DEFAULTS = {
    "table1": {"deltas": list(_experiment["table1_deltas"])},
    "figure1": {"delta": _experiment["figure1_delta"]},
    "figure34": {"deltas": list(_experiment["figure34_deltas"])},
    "simulate": {},
}


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, (int, float)):
        return [value]
    return value


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Literal["table1", "figure1", "figure34", "simulate"]
    v_pop: float = _model["v_pop"]
    delta: float = Field(default=_model["delta"], ge=0.0, lt=1.0)
    deltas: List[float] = Field(default_factory=lambda: list(_experiment["table1_deltas"]))
    xis: List[float] = Field(default_factory=lambda: list(_experiment["xis"]))
    explore_lens: Optional[List[int]] = None
    sweep: bool = False
    p: float = Field(default=_model["p"], gt=0.0, lt=1.0)
    policy: str = "pear"
    niche: Optional[str] = None
    episodes: int = Field(default=_simulation["episodes"], ge=1)
    master_seed: int = Field(default=_simulation["master_seed"], ge=0, lt=2**64)
    mode: SimulationMode = SimulationMode(_simulation["mode"])
    n_jobs: int = Field(default=_simulation["n_jobs"], ge=1)
    ci_threshold: float = Field(default=_experiment["ci_threshold"], gt=0.0)
    out_path: Optional[str] = None
    format: Literal["csv", "json"] = _experiment["format"]
    emit_svg: bool = False
    quiet: bool = False
    log_dir: Optional[str] = _logging["log_dir"]

    @field_validator("deltas", "xis", "explore_lens", mode="before")
    @classmethod
    def _parse_list(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("deltas")
    @classmethod
    def _check_deltas(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("deltas must not be empty")
        for delta in value:
            if not 0.0 <= delta < 1.0:
                raise ValueError(f"every delta must lie in [0, 1), got {delta}")
        return value

    @field_validator("xis")
    @classmethod
    def _check_xis(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("xis must not be empty")
        for xi in value:
            if not 0.0 <= xi < 1.0:
                raise ValueError(f"every xi must lie in [0, 1), got {xi}")
        return value

    @field_validator("explore_lens")
    @classmethod
    def _check_explore_lens(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is None:
            return value
        if not value:
            raise ValueError("explore lengths must not be empty")
        if any(length < 0 for length in value):
            raise ValueError(f"explore lengths must be non-negative, got {value}")
        return value

    @model_validator(mode="after")
    def _check_command_needs(self) -> "ExperimentConfig":
        if self.command == "figure34" and self.explore_lens is None and not self.sweep:
            raise ValueError("figure34 needs --explore-len or --sweep")
        return self

    @property
    def resolved_explore_lens(self) -> List[int]:
        if self.explore_lens is not None:
            return list(self.explore_lens)
        return list(_experiment["explore_len_sweep"])

    @property
    def resolved_out_path(self) -> str:
        if self.out_path:
            return self.out_path
        return os.path.join(_experiment["out_dir"], f"{self.command}.{self.format}")

    def echo(self) -> Dict[str, Any]:
        """JSON-safe copy of the settings for output files."""
        return self.model_dump(mode="json", exclude={"quiet", "log_dir"})


def normalize_key(key: str) -> str:
    name = key.strip().lstrip("-").lower().replace("-", "_")
    return KEY_ALIASES.get(name, name)


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read a flat key=value config file.

    Args:
        path: Path of the file

    Returns:
        Values keyed by ExperimentConfig field name
    """
    if not os.path.isfile(path):
        raise InvalidParameterError(f"Config file not found: {path}")
    values = {}
    for key, value in dotenv_values(path).items():
        name = normalize_key(key)
        if name not in ExperimentConfig.model_fields or name == "command":
            raise InvalidParameterError(f"Unknown config key {key!r} in {path}")
        # A bare key switches a flag on
        values[name] = "true" if value is None else value
    return values


def _fold_single_delta(source: Dict[str, Any]) -> Dict[str, Any]:
    """A lone delta in a source stands for deltas=[delta] unless deltas is also set there."""
    source = dict(source)
    delta = source.pop("delta", None)
    if delta is not None and source.get("deltas") is None:
        source["deltas"] = [delta]
    return source


def resolve_experiment_config(
    command: str,
    flags: Dict[str, Any],
    config_path: Optional[str] = None
) -> ExperimentConfig:
    """
    Merge defaults, config file values and command-line flags.

    Args:
        command: One of table1, figure1, figure34, simulate
        flags: Flag values keyed by flag or field name; None means unset
        config_path: Optional key=value config file

    Returns:
        Validated ExperimentConfig
    """
    if command not in COMMANDS:
        raise ValueError(f"Unknown command: {command}")

    sources = [load_config_file(config_path)] if config_path else []
    sources.append({normalize_key(key): value for key, value in flags.items() if value is not None})

    values: Dict[str, Any] = dict(COMMAND_DEFAULTS[command])
    for source in sources:
        if command in MULTI_DELTA_COMMANDS:
            source = _fold_single_delta(source)
        values.update(source)
    return ExperimentConfig(command=command, **values)
