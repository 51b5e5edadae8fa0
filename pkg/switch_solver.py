#!/usr/bin/env python3
"""
Utility script to switch the default solver in the config.yaml file.
"""

import argparse
import logging
import os
import sys

import yaml

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))

from config.settings import ALGORITHMS  # noqa: E402

# Set up logging
logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)


def parse_args(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="Switch the default solver in config.yaml")
    parser.add_argument("algorithm", type=str, choices=ALGORITHMS, help="Solver that find uses without --algorithm")
    parser.add_argument(
        "--oracle-max-n",
        type=int,
        help="Also set the largest vertex count the brute-force oracle accepts",
    )
    parser.add_argument(
        "--config",
        type=str,
        default="config.yaml",
        help="Path to configuration file (default: config.yaml)",
    )
    return parser.parse_args(argv)


def switch_solver(config_path, algorithm, oracle_max_n=None):
    """
    Switch the solver in the config.yaml file.

    Args:
        config_path: Path to the configuration file
        algorithm: One of auto, perm, cubic, recursive, brute
        oracle_max_n: Optional new oracle limit

    Returns:
        True if successful, False otherwise
    """
    try:
        if not os.path.exists(config_path):
            logger.error(f"Configuration file {config_path} not found")
            return False

        with open(config_path, "r") as f:
            config = yaml.safe_load(f) or {}

        if not isinstance(config.get("solver"), dict):
            logger.error("Invalid config file: 'solver' section not found")
            return False

        current = config["solver"].get("algorithm", "auto")
        if current == algorithm and oracle_max_n is None:
            logger.info(f"Solver is already set to '{algorithm}'")
            return True

        config["solver"]["algorithm"] = algorithm
        if oracle_max_n is not None:
            if oracle_max_n < 1:
                logger.error(f"oracle_max_n must be positive, got {oracle_max_n}")
                return False
            config["solver"]["oracle_max_n"] = oracle_max_n

        with open(config_path, "w") as f:
            yaml.dump(config, f, default_flow_style=False, sort_keys=False)

        logger.info(f"Switched solver from '{current}' to '{algorithm}'")
        return True

    except Exception as e:
        logger.error(f"Error switching solver: {str(e)}")
        return False


def main(argv=None):
    """Main function."""
    args = parse_args(argv)

    if not switch_solver(args.config, args.algorithm, args.oracle_max_n):
        logger.error("Failed to switch solver")
        return 1

    if args.algorithm == "brute":
        logger.info("The oracle refuses instances above solver.oracle_max_n vertices")
    elif args.algorithm == "recursive":
        logger.info("Below its vertex threshold the recursive solver reports below_threshold")

    logger.info("Run the solver with: python src/main.py find <labeling.fpcl>")
    return 0


if __name__ == "__main__":
    sys.exit(main())
