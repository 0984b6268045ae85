"""Configuration management for ChabautyLab."""

import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from .chabauty_metric import MetricParams
from .errors import PreconditionError, SchemaError
from .exact_linalg import to_fraction

ENV_PREFIX = "CHABAUTY_"
SUITES = ("duality", "transference", "paths", "finite", "components")


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one CLI run."""

    seed: int = 42
    r_cut: str = "8"
    delta: str = "1/40"
    enumeration_cap: int = 10_000
    net_cap: int = 200_000
    cd: Optional[str] = None
    out: str = "report.json"
    format: str = "json"
    workers: int = 1
    debug_log: bool = False
    trials: Mapping[str, int] = field(default_factory=dict)

    def validate(self) -> tuple[bool, Optional[str]]:
        """
        Validate the resolved configuration.

        Returns:
            Tuple of (valid, error_message)
        """
        if self.enumeration_cap < 1 or self.net_cap < 1:
            return False, "caps must be positive"
        if self.workers < 1:
            return False, "workers must be at least 1"
        if self.format not in ("json", "csv"):
            return False, f"unknown output format: {self.format}"
        if not 0 <= self.seed < 2**64:
            return False, "seed must be an unsigned 64-bit integer"
        try:
            self.metric_params()
            if self.cd is not None and to_fraction(self.cd) <= 0:
                return False, "transference constant must be positive"
        except (PreconditionError, SchemaError) as e:
            return False, e.message
        if any(n < 1 for n in self.trials.values()):
            return False, "trial counts must be positive"
        return True, None

    def metric_params(self) -> MetricParams:
        return MetricParams(to_fraction(self.r_cut), to_fraction(self.delta), self.net_cap)

    def trial_count(self, suite: str) -> int:
        return int(self.trials.get(suite, ConfigManager.DEFAULT_CONFIG["suites"][suite]))

    def echo(self) -> dict:
        """Everything needed to reproduce a run."""
        return {
            "seed": self.seed,
            "metric": self.metric_params().to_dict(),
            "caps": {"enumeration": self.enumeration_cap, "net_size": self.net_cap},
            "cd": self.cd,
            "workers": self.workers,
            "trials": dict(self.trials),
        }


class ConfigManager:
    """Loads defaults, the config file and environment overrides."""

    DEFAULT_CONFIG = {
        "seed": 42,
        "metric": {
            "r_cut": "8",
            "delta": "1/40"
        },
        "caps": {
            "enumeration": 10000,
            "net_size": 200000
        },
        "cd": None,  # None means the dimension d
        "out": "report.json",
        "format": "json",
        "workers": 1,
        "debug_log": False,
        "suites": {
            "duality": 20,
            "transference": 200,
            "paths": 20,
            "finite": 64,
            "components": 30
        }
    }

    ENV_KEYS = {
        "SEED": ("seed", int),
        "R_CUT": ("metric.r_cut", str),
        "DELTA": ("metric.delta", str),
        "CAP": ("caps.enumeration", int),
        "NET_CAP": ("caps.net_size", int),
        "CD": ("cd", str),
        "OUT": ("out", str),
        "FORMAT": ("format", str),
        "WORKERS": ("workers", int),
    }

    def __init__(self, config_path: Optional[str] = None, environ: Optional[Mapping[str, str]] = None):
        """Initialize ConfigManager with optional config file path."""
        if config_path is None:
            if getattr(sys, 'frozen', False):
                base_dir = os.path.dirname(sys.executable)
            else:
                base_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
            config_path = os.path.join(base_dir, "chabauty.json")

        self.config_path = config_path
        self.environ = os.environ if environ is None else environ
        self.config = self._load_config()
        self._apply_environment()

    def _load_config(self) -> dict:
        """Load configuration from file or fall back to defaults."""
        if os.path.exists(self.config_path):
            try:
                with open(self.config_path, "r", encoding="utf-8") as f:
                    config = json.load(f)
                return self._validate_config(config)
            except (json.JSONDecodeError, OSError):
                return self._deep_copy(self.DEFAULT_CONFIG)
        return self._deep_copy(self.DEFAULT_CONFIG)

    def _deep_copy(self, d: dict) -> dict:
        return json.loads(json.dumps(d))

    def _validate_config(self, config: dict) -> dict:
        """Merge a loaded file over the defaults, nested sections included."""
        validated = self._deep_copy(self.DEFAULT_CONFIG)
        if not isinstance(config, dict):
            return validated
        for key in self.DEFAULT_CONFIG:
            if key in config:
                if isinstance(self.DEFAULT_CONFIG[key], dict):
                    if isinstance(config[key], dict):
                        validated[key].update(config[key])
                else:
                    validated[key] = config[key]
        return validated

    def _apply_environment(self) -> None:
        for suffix, (path, kind) in self.ENV_KEYS.items():
            raw = self.environ.get(ENV_PREFIX + suffix)
            if raw is None or raw == "":
                continue
            try:
                value = kind(raw)
            except ValueError:
                raise SchemaError(f"environment variable {ENV_PREFIX + suffix} must be {kind.__name__}")
            self._set_path(path, value)
        if self.environ.get(ENV_PREFIX + "DEBUG") == "1":
            self.config["debug_log"] = True

    def _set_path(self, path: str, value: Any) -> None:
        section, _, key = path.rpartition(".")
        target = self.config[section] if section else self.config
        target[key] = value

    def save(self) -> None:
        """Save current configuration to file."""
        with open(self.config_path, "w", encoding="utf-8") as f:
            json.dump(self.config, f, indent=2, ensure_ascii=False)

    def get_setting(self, key: str, default=None):
        return self.config.get(key, default)

    def set_setting(self, key: str, value) -> None:
        self.config[key] = value
        self.save()

    # Metric parameters
    def get_metric(self) -> dict:
        return dict(self.config["metric"])

    def set_metric(self, r_cut: str, delta: str) -> None:
        MetricParams(to_fraction(r_cut), to_fraction(delta))
        self.config["metric"] = {"r_cut": r_cut, "delta": delta}
        self.save()

    # Caps
    def get_caps(self) -> dict:
        return dict(self.config["caps"])

    def set_caps(self, enumeration: int, net_size: int) -> None:
        if enumeration < 1 or net_size < 1:
            raise PreconditionError("caps must be positive", {"enumeration": enumeration, "net_size": net_size})
        self.config["caps"] = {"enumeration": enumeration, "net_size": net_size}
        self.save()

    def get_trials(self, suite: str) -> int:
        return int(self.config["suites"].get(suite, self.DEFAULT_CONFIG["suites"][suite]))

    # Import/Export
    def export_config(self, filepath: str, overrides: Optional[Mapping[str, Any]] = None) -> bool:
        """Write the effective settings, flags included, to ``filepath``."""
        try:
            with open(filepath, "w", encoding="utf-8") as f:
                json.dump(self.merged(overrides), f, indent=2, ensure_ascii=False)
            return True
        except OSError:
            return False

    def import_config(self, filepath: str) -> bool:
        try:
            with open(filepath, "r", encoding="utf-8") as f:
                self.config = self._validate_config(json.load(f))
            self.save()
            return True
        except (json.JSONDecodeError, OSError):
            return False

    def persist(self, overrides: Mapping[str, Any]) -> None:
        """Save command-line flags into the config file."""
        flags = {k: v for k, v in overrides.items() if v is not None}
        for key in ("seed", "cd", "out", "format", "workers"):
            if key in flags:
                self.set_setting(key, flags[key])
        if "r_cut" in flags or "delta" in flags:
            metric = self.get_metric()
            self.set_metric(str(flags.get("r_cut", metric["r_cut"])), str(flags.get("delta", metric["delta"])))
        if "cap" in flags or "net_cap" in flags:
            caps = self.get_caps()
            self.set_caps(int(flags.get("cap", caps["enumeration"])), int(flags.get("net_cap", caps["net_size"])))

    def merged(self, overrides: Optional[Mapping[str, Any]] = None) -> dict:
        """Settings in config-file layout with ``overrides`` applied; None means unset."""
        cfg = {key: self.get_setting(key) for key in self.DEFAULT_CONFIG}
        cfg["metric"] = self.get_metric()
        cfg["caps"] = self.get_caps()
        cfg["suites"] = {suite: self.get_trials(suite) for suite in SUITES}
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key in ("r_cut", "delta"):
                cfg["metric"][key] = value
            elif key == "cap":
                cfg["caps"]["enumeration"] = value
            elif key == "net_cap":
                cfg["caps"]["net_size"] = value
            elif key == "trials":
                cfg["suites"].update(value)
            else:
                cfg[key] = value
        return cfg

    def resolve(self, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
        """Build a RunConfig; ``overrides`` are command-line flags, None meaning unset."""
        try:
            cfg = self.merged(overrides)
            return RunConfig(
                seed=int(cfg["seed"]),
                r_cut=str(cfg["metric"]["r_cut"]),
                delta=str(cfg["metric"]["delta"]),
                enumeration_cap=int(cfg["caps"]["enumeration"]),
                net_cap=int(cfg["caps"]["net_size"]),
                cd=None if cfg["cd"] is None else str(cfg["cd"]),
                out=str(cfg["out"]),
                format=str(cfg["format"]),
                workers=int(cfg["workers"]),
                debug_log=bool(cfg["debug_log"]),
                trials={k: int(v) for k, v in cfg["suites"].items()},
            )
        except (TypeError, ValueError) as e:
            raise SchemaError(f"invalid configuration value: {e}")
