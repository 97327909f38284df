"""Configuration models for experiment suites."""

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

from ..core.errors import ConfigError
from ..core.norm_lab import EstimatorSettings
from ..core.vector_valued import SolverSettings

# Suites that accept the endpoint exponents p = 1 and p = inf
ENDPOINT_SUITES = ("estimator",)

ENV_PREFIX = "SCHURLAB_"


def parse_exponent(value: Any) -> float:
    """Parse an exponent; accepts numbers, "inf" and fractions like "4/3"."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", ".inf"):
            return math.inf
        if "/" in text:
            num, den = text.split("/", 1)
            return float(num) / float(den)
        return float(text)
    return float(value)


def _exponent_out(p: float) -> float | str:
    return "inf" if math.isinf(p) else p


def _optional_int(value: Any) -> int | None:
    return None if value is None else int(value)


@dataclass
class Construction:
    """A symbol construction and its parameters."""

    construction: str
    params: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Construction":
        """Create from dictionary."""
        return cls(construction=data["construction"], params=dict(data.get("params") or {}))

    def to_dict(self) -> dict[str, Any]:
        return {"construction": self.construction, "params": dict(self.params)}


def estimator_from_dict(data: dict[str, Any]) -> EstimatorSettings:
    defaults = EstimatorSettings()
    return EstimatorSettings(
        starts=int(data.get("starts", defaults.starts)),
        max_iter=int(data.get("max_iter", defaults.max_iter)),
        stall_tol=float(data.get("stall_tol", defaults.stall_tol)),
        stall_window=int(data.get("stall_window", defaults.stall_window)),
    )


def solver_from_dict(data: dict[str, Any]) -> SolverSettings:
    defaults = SolverSettings()
    return SolverSettings(
        max_iter=int(data.get("max_iter", defaults.max_iter)),
        restarts=int(data.get("restarts", defaults.restarts)),
        gap_tol=float(data.get("gap_tol", defaults.gap_tol)),
    )


@dataclass
class SuiteConfig:
    """Everything a suite run depends on.

    Precedence when assembled by the CLI: defaults < config file < environment
    < command-line flags.
    """

    suite: str = "rs1"
    n: list[int] = field(default_factory=lambda: [4])
    d: list[int] = field(default_factory=lambda: [2])
    p: list[float] = field(default_factory=lambda: [1.5, 2.0, 3.0])
    trials: int = 10
    seed: int = 0
    k_global: float = 8.0
    samples: int | None = None  # Monte Carlo rows N; None lets the suite choose
    sign_samples: int = 2000  # rows that get a full SVD in sign checks
    output: str | None = None
    format: str = "csv"
    strict_real: bool = False
    workers: int = 1
    a_emp: float = 4.0
    b_emp: float = 4.0
    estimator: EstimatorSettings = field(default_factory=EstimatorSettings)
    solver: SolverSettings = field(default_factory=SolverSettings)
    constructions: list[Construction] = field(default_factory=list)
    amplify: list[int] = field(default_factory=lambda: [1, 2, 4])

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SuiteConfig":
        """Create from dictionary; missing keys keep their defaults."""
        defaults = cls()
        return cls(
            suite=str(data.get("suite", defaults.suite)),
            n=[int(v) for v in data.get("n", defaults.n)],
            d=[int(v) for v in data.get("d", defaults.d)],
            p=[parse_exponent(v) for v in data.get("p", defaults.p)],
            trials=int(data.get("trials", defaults.trials)),
            seed=int(data.get("seed", defaults.seed)),
            k_global=float(data.get("k_global", defaults.k_global)),
            samples=_optional_int(data.get("samples", defaults.samples)),
            sign_samples=int(data.get("sign_samples", defaults.sign_samples)),
            output=data.get("output", defaults.output),
            format=str(data.get("format", defaults.format)),
            strict_real=bool(data.get("strict_real", defaults.strict_real)),
            workers=int(data.get("workers", defaults.workers)),
            a_emp=float(data.get("a_emp", defaults.a_emp)),
            b_emp=float(data.get("b_emp", defaults.b_emp)),
            estimator=estimator_from_dict(data.get("estimator") or {}),
            solver=solver_from_dict(data.get("solver") or {}),
            constructions=[Construction.from_dict(c) for c in data.get("constructions") or []],
            amplify=[int(v) for v in data.get("amplify", defaults.amplify)],
        )

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary (the config echo written into reports)."""
        return {
            "suite": self.suite,
            "n": list(self.n),
            "d": list(self.d),
            "p": [_exponent_out(p) for p in self.p],
            "trials": self.trials,
            "seed": self.seed,
            "k_global": self.k_global,
            "samples": self.samples,
            "sign_samples": self.sign_samples,
            "output": self.output,
            "format": self.format,
            "strict_real": self.strict_real,
            "workers": self.workers,
            "a_emp": self.a_emp,
            "b_emp": self.b_emp,
            "estimator": {
                "starts": self.estimator.starts,
                "max_iter": self.estimator.max_iter,
                "stall_tol": self.estimator.stall_tol,
                "stall_window": self.estimator.stall_window,
            },
            "solver": {
                "max_iter": self.solver.max_iter,
                "restarts": self.solver.restarts,
                "gap_tol": self.solver.gap_tol,
            },
            "constructions": [c.to_dict() for c in self.constructions],
            "amplify": list(self.amplify),
        }

    @classmethod
    def load(cls, config_path: Path) -> "SuiteConfig":
        """Load configuration from a YAML or JSON file."""
        config_path = Path(config_path)
        try:
            with open(config_path) as f:
                if config_path.suffix == ".json":
                    data = json.load(f)
                else:
                    data = yaml.safe_load(f) or {}
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot parse {config_path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{config_path} must contain a mapping")
        try:
            return cls.from_dict(data)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid value in {config_path}: {e}") from e

    def save(self, config_path: Path) -> None:
        """Save configuration to YAML (or JSON by suffix)."""
        config_path = Path(config_path)
        with open(config_path, "w") as f:
            if config_path.suffix == ".json":
                json.dump(self.to_dict(), f, indent=2)
                f.write("\n")
            else:
                yaml.dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)

    def apply_environment(self) -> "SuiteConfig":
        """Override seed, k_global and samples from SCHURLAB_* variables (and .env)."""
        load_dotenv()
        try:
            if (seed := os.getenv(f"{ENV_PREFIX}SEED")) is not None:
                self.seed = int(seed)
            if (k := os.getenv(f"{ENV_PREFIX}K_GLOBAL")) is not None:
                self.k_global = float(k)
            if (samples := os.getenv(f"{ENV_PREFIX}SAMPLES")) is not None:
                self.samples = int(samples)
        except ValueError as e:
            raise ConfigError(f"invalid {ENV_PREFIX}* environment value: {e}") from e
        return self

    def validate(self) -> None:
        """Raise ConfigError when the configuration cannot be run."""
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.n or min(self.n) < 1:
            raise ConfigError(f"sizes n must be positive, got {self.n}")
        if not self.d or min(self.d) < 1:
            raise ConfigError(f"dimensions d must be positive, got {self.d}")
        if not self.p:
            raise ConfigError("p-list is empty")
        endpoints_ok = self.suite in ENDPOINT_SUITES
        for p in self.p:
            if math.isnan(p) or p < 1.0:
                raise ConfigError(f"exponent {p} below 1")
            if not endpoints_ok and (p == 1.0 or math.isinf(p)):
                raise ConfigError(f"suite {self.suite!r} needs 1 < p < inf, got {p}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if (self.samples is not None and self.samples < 1) or self.sign_samples < 1:
            raise ConfigError("sample counts must be positive")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.k_global <= 0.0 or self.a_emp <= 0.0 or self.b_emp <= 0.0:
            raise ConfigError("k_global, a_emp and b_emp must be positive")
        if not self.amplify or min(self.amplify) < 1:
            raise ConfigError(f"amplification sizes must be >= 1, got {self.amplify}")
        if self.solver.restarts < 0 or self.solver.max_iter < 1 or self.solver.gap_tol <= 0.0:
            raise ConfigError("invalid solver settings")
        if self.estimator.starts < 1 or self.estimator.max_iter < 1 or self.estimator.stall_window < 1:
            raise ConfigError("invalid estimator settings")

    def estimator_settings(self) -> EstimatorSettings:
        """Estimator settings carrying the run seed.

        Trials already run in parallel, so the multi-start pool stays serial.
        """
        est = self.estimator
        return EstimatorSettings(
            starts=est.starts,
            max_iter=est.max_iter,
            stall_tol=est.stall_tol,
            stall_window=est.stall_window,
            seed=self.seed,
        )

    def solver_settings(self) -> SolverSettings:
        """RC_p splitting-solver settings carrying the run seed."""
        return SolverSettings(
            max_iter=self.solver.max_iter,
            restarts=self.solver.restarts,
            gap_tol=self.solver.gap_tol,
            seed=self.seed,
        )
