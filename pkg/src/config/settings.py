"""
Configuration settings for fixcycle.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from core.errors import LabelingError

logger = logging.getLogger(__name__)

ALGORITHMS = ("auto", "brute", "perm", "cubic", "recursive")


def load_config(config_path: str) -> Dict[str, Any]:
    """
    Load configuration from a YAML file.

    Args:
        config_path: Path to the configuration file

    Returns:
        Configuration dictionary
    """
    try:
        logger.debug(f"Loading configuration from {config_path}")

        if not os.path.exists(config_path):
            logger.warning(f"Configuration file {config_path} not found, using default configuration")
            return validate_config({})

        with open(config_path, "r") as f:
            config = yaml.safe_load(f) or {}

        # Validate and merge with defaults
        validated_config = validate_config(config)

        logger.debug("Configuration loaded successfully")
        return validated_config

    except Exception as e:
        logger.error(f"Error loading configuration: {str(e)}")
        logger.warning("Falling back to default configuration")
        return validate_config({})


def get_default_config() -> Dict[str, Any]:
    """
    Get default configuration.

    Returns:
        Default configuration dictionary
    """
    return {
        "solver": {
            "algorithm": "auto",
            "oracle_max_n": 10,
        },
        "search": {
            "max_assignments": 1_000_000,
            "workers": 1,
            "prune": True,
        },
        "random": {
            "seed": None,
            "label_class": "general",
        },
        "logging": {
            "level": "INFO",
            "log_dir": None,
        },
        "environment": {
            "use_environment_variables": True,
        },
    }


def validate_config(config: Dict[str, Any]) -> Dict[str, Any]:
    """
    Validate and normalize configuration.

    Args:
        config: Configuration dictionary to validate

    Returns:
        Validated configuration dictionary, every section filled from the defaults
    """
    if not isinstance(config, dict):
        raise ValueError(f"configuration must be a mapping, got {type(config).__name__}")
    default_config = get_default_config()

    # Ensure sections exist and fill in missing keys
    for section, defaults in default_config.items():
        values = config.get(section) or {}
        if not isinstance(values, dict):
            raise ValueError(f"configuration section '{section}' must be a mapping")
        config[section] = {**defaults, **values}

    if config["solver"]["algorithm"] not in ALGORITHMS:
        logger.warning(f"Unknown solver algorithm {config['solver']['algorithm']!r}, using 'auto'")
        config["solver"]["algorithm"] = "auto"
    for section, key in (("solver", "oracle_max_n"), ("search", "max_assignments"), ("search", "workers")):
        if not isinstance(config[section][key], int) or config[section][key] < 1:
            logger.warning(f"Invalid {section}.{key} {config[section][key]!r}, using the default")
            config[section][key] = default_config[section][key]

    # Check for environment variables if configured
    if config["environment"].get("use_environment_variables", True):
        _load_from_environment(config)

    return config


def _load_from_environment(config: Dict[str, Any]) -> None:
    """
    Load overrides from environment variables.

    Args:
        config: Configuration dictionary to update
    """
    seed_val = os.environ.get("FIXCYCLE_SEED")
    if seed_val and config["random"].get("seed") is None:
        try:
            config["random"]["seed"] = int(seed_val)
            logger.debug("Loaded FIXCYCLE_SEED.")
        except ValueError:
            logger.warning(f"Ignoring FIXCYCLE_SEED={seed_val!r}: not an integer")

    log_dir_val = os.environ.get("FIXCYCLE_LOG_DIR")
    if log_dir_val and not config["logging"].get("log_dir"):
        config["logging"]["log_dir"] = log_dir_val
        logger.debug("Loaded FIXCYCLE_LOG_DIR.")


@dataclass
class RunConfig:
    """Everything one CLI run needs, after flags, file and environment are merged."""

    subcommand: str
    algorithm: str = "auto"
    seed: int = 0
    label_class: str = "general"
    oracle_max_n: int = 10
    max_assignments: int = 1_000_000
    override_frontier: bool = False
    workers: int = 1
    prune: bool = True
    verbosity: int = logging.INFO
    log_dir: Optional[str] = None
    paths: Dict[str, Path] = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise LabelingError(f"unknown algorithm {self.algorithm!r}; choose one of {', '.join(ALGORITHMS)}")

    def require_permutation_labels(self, labeling) -> None:
        """selector=perm needs every label to be a permutation."""
        if self.algorithm == "perm" and not labeling.is_permutation_labeling():
            u, v = labeling.non_permutation_edges()[0]
            raise LabelingError(f"--algorithm perm needs permutation labels; edge ({u + 1}, {v + 1}) is not one")


def build_run_config(args, config: Dict[str, Any]) -> RunConfig:
    """
    Merge parsed arguments over the loaded configuration.

    Args:
        args: argparse namespace; attributes that are missing or None fall back to the file
        config: Validated configuration dictionary

    Returns:
        The run configuration
    """

    def pick(name: str, fallback):
        value = getattr(args, name, None)
        return fallback if value is None else value

    level_name = "DEBUG" if getattr(args, "debug", False) else str(config["logging"]["level"]).upper()
    paths = {
        name: Path(value)
        for name in ("input", "output", "labeling", "certificate", "group_labeling", "group_output")
        if (value := getattr(args, name, None)) is not None
    }
    return RunConfig(
        subcommand=args.command,
        algorithm=pick("algorithm", config["solver"]["algorithm"]),
        seed=pick("seed", config["random"]["seed"]) or 0,
        label_class=pick("label_class", config["random"]["label_class"]),
        oracle_max_n=pick("oracle_max_n", config["solver"]["oracle_max_n"]),
        max_assignments=pick("max_assignments", config["search"]["max_assignments"]),
        override_frontier=bool(getattr(args, "override", False)),
        workers=pick("workers", config["search"]["workers"]),
        prune=not getattr(args, "no_prune", False) and bool(config["search"]["prune"]),
        verbosity=getattr(logging, level_name, logging.INFO),
        log_dir=config["logging"].get("log_dir"),
        paths=paths,
    )
