"""Run configuration: defaults, TOML files and command-line overrides."""

import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import List, Optional

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .generators import DEFAULT_MAX_POINTS
from .observable import DEFAULT_BUDGET, DEFAULT_KAPPA
from .space import SpaceParams
from .spectral import parse_graph_rule
from .subsets import DEFAULT_EXACT_LIMIT, MAX_EXACT_LIMIT

FORMATS = ("json", "csv")


@dataclass
class RunConfig:
    """Parameters shared by the generate, report, check and sweep commands."""
    epsilon: float = 0.5
    kappa: float = DEFAULT_KAPPA
    rho_grid: Optional[List[float]] = None
    lambda_grid: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    seed: int = 0
    exact_limit: int = DEFAULT_EXACT_LIMIT
    oracle_step: float = 0.05
    ascent_budget: int = DEFAULT_BUDGET
    threads: Optional[int] = None
    format: str = "json"
    tau: float = 1.0 / 3.0
    graph_rule: Optional[str] = None
    max_points: int = DEFAULT_MAX_POINTS
    fault_injection: bool = False

    @property
    def workers(self) -> int:
        return self.threads or os.cpu_count() or 1

    def validate(self) -> None:
        if not self.lambda_grid:
            raise ConfigError("lambda_grid needs at least one value")
        try:
            for rho in self.rho_grid or [1.0]:
                for lam in self.lambda_grid:
                    SpaceParams(epsilon=self.epsilon, kappa=self.kappa, rho=rho, lam=lam).validate()
        except ValueError as e:
            raise ConfigError(str(e))
        if not 1 <= self.exact_limit <= MAX_EXACT_LIMIT:
            raise ConfigError(f"exact_limit must lie in [1, {MAX_EXACT_LIMIT}], got {self.exact_limit}")
        if self.oracle_step <= 0.0:
            raise ConfigError(f"oracle_step must be positive, got {self.oracle_step}")
        if self.ascent_budget < 0:
            raise ConfigError(f"ascent_budget must be nonnegative, got {self.ascent_budget}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got '{self.format}'")
        if not 0.0 < self.tau <= 1.0 / 3.0:
            raise ConfigError(f"tau must lie in (0, 1/3], got {self.tau}")
        if self.max_points < 1:
            raise ConfigError(f"max_points must be positive, got {self.max_points}")
        if self.graph_rule is not None:
            parse_graph_rule(self.graph_rule)

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with every non-None override applied; command-line flags win over the file."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        """Convert to dictionary for TOML serialization."""
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, data: dict) -> 'RunConfig':
        """Create from dictionary loaded from TOML."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}", {"keys": unknown})
        try:
            config = cls(**data)
            for name in ('epsilon', 'kappa', 'oracle_step', 'tau'):
                setattr(config, name, float(getattr(config, name)))
            config.lambda_grid = [float(x) for x in config.lambda_grid]
            if config.rho_grid is not None:
                config.rho_grid = [float(x) for x in config.rho_grid]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid config value: {e}")
        return config


def load_config(path: Path) -> RunConfig:
    """Load configuration from TOML file."""
    try:
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        raise FileNotFoundError(f"Failed to read config file '{path}': File not found")
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"Failed to parse TOML config '{path}': {e}")
    config = RunConfig.from_dict(data)
    config.validate()
    return config


def save_config(config: RunConfig, path: Path) -> None:
    """Save configuration to TOML file."""
    try:
        with open(path, 'wb') as f:
            tomli_w.dump(config.to_dict(), f)
    except OSError as e:
        raise ConfigError(f"Failed to write config file '{path}': {e}")
