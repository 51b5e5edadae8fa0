#!/usr/bin/env python3
"""
Tests for the switch_solver.py helper script.
"""

import os
import shutil
import sys

import yaml

# Add repository root and src directory to path
ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, os.path.join(ROOT, "src"))
sys.path.insert(0, ROOT)

from config.settings import load_config
from switch_solver import main, switch_solver


def test_switch_updates_config(tmp_path):
    path = tmp_path / "config.yaml"
    shutil.copy(os.path.join(ROOT, "config.yaml"), path)
    assert switch_solver(str(path), "cubic")
    config = load_config(str(path))
    assert config["solver"]["algorithm"] == "cubic"
    assert config["search"]["max_assignments"] == 1_000_000


def test_switch_sets_oracle_limit(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("solver:\n  algorithm: auto\n")
    assert main(["brute", "--oracle-max-n", "8", "--config", str(path)]) == 0
    assert yaml.safe_load(path.read_text())["solver"] == {"algorithm": "brute", "oracle_max_n": 8}


def test_switch_rejects_bad_input(tmp_path):
    assert not switch_solver(str(tmp_path / "missing.yaml"), "perm")
    path = tmp_path / "config.yaml"
    path.write_text("search:\n  workers: 2\n")
    assert main(["perm", "--config", str(path)]) == 1
    path.write_text("solver:\n  algorithm: auto\n")
    assert not switch_solver(str(path), "perm", oracle_max_n=0)
