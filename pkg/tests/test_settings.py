#!/usr/bin/env python3
"""
Tests for configuration loading and run configuration.
"""

import argparse
import logging
import os
import sys

import pytest

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src")))

from config.settings import RunConfig, build_run_config, get_default_config, load_config, validate_config
from core.errors import LabelingError
from core.labeling import Labeling
from services.constructions import random_labeling


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv("FIXCYCLE_SEED", raising=False)
    monkeypatch.delenv("FIXCYCLE_LOG_DIR", raising=False)


def test_missing_file_gives_defaults(tmp_path):
    config = load_config(str(tmp_path / "missing.yaml"))
    assert config == get_default_config()


def test_malformed_file_falls_back_to_defaults(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("solver: [unclosed\n")
    assert load_config(str(path)) == get_default_config()


def test_partial_file_is_merged(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("solver:\n  algorithm: cubic\nsearch:\n  workers: 4\n")
    config = load_config(str(path))
    assert config["solver"] == {"algorithm": "cubic", "oracle_max_n": 10}
    assert config["search"]["workers"] == 4
    assert config["search"]["prune"] is True
    assert config["random"]["seed"] is None


def test_invalid_values_are_replaced():
    config = validate_config({"solver": {"algorithm": "quantum", "oracle_max_n": 0}, "search": {"workers": "many"}})
    assert config["solver"]["algorithm"] == "auto"
    assert config["solver"]["oracle_max_n"] == 10
    assert config["search"]["workers"] == 1


def test_repository_config_matches_defaults():
    path = os.path.join(os.path.dirname(__file__), "..", "config.yaml")
    assert load_config(path) == get_default_config()


def test_seed_falls_back_to_environment(monkeypatch):
    monkeypatch.setenv("FIXCYCLE_SEED", "42")
    assert validate_config({})["random"]["seed"] == 42
    assert validate_config({"random": {"seed": 7}})["random"]["seed"] == 7
    config = validate_config({"environment": {"use_environment_variables": False}})
    assert config["random"]["seed"] is None


def test_bad_environment_seed_is_ignored(monkeypatch):
    monkeypatch.setenv("FIXCYCLE_SEED", "soon")
    assert validate_config({})["random"]["seed"] is None


def test_log_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("FIXCYCLE_LOG_DIR", str(tmp_path))
    assert validate_config({})["logging"]["log_dir"] == str(tmp_path)


def test_flags_override_file():
    config = validate_config({"random": {"seed": 7}, "solver": {"algorithm": "brute"}})
    args = argparse.Namespace(command="gen", seed=3, algorithm=None, output="out.fpcl", debug=False)
    run = build_run_config(args, config)
    assert run.seed == 3
    assert run.algorithm == "brute"
    assert str(run.paths["output"]) == "out.fpcl"
    assert run.verbosity == logging.INFO


def test_seed_defaults_to_zero():
    run = build_run_config(argparse.Namespace(command="gen"), validate_config({}))
    assert run.seed == 0
    assert run.label_class == "general"


def test_debug_flag_sets_verbosity():
    run = build_run_config(argparse.Namespace(command="find", debug=True, no_prune=True), validate_config({}))
    assert run.verbosity == logging.DEBUG
    assert run.prune is False


def test_run_config_validates_algorithm():
    with pytest.raises(LabelingError):
        RunConfig(subcommand="find", algorithm="quantum")


def test_perm_selector_needs_permutation_labels():
    collapsed = Labeling.identity(3, 3).with_labels({(0, 1): (0, 0, 0)})
    run = RunConfig(subcommand="find", algorithm="perm")
    run.require_permutation_labels(random_labeling(4, 3, seed=0, label_class="permutation"))
    with pytest.raises(LabelingError, match=r"edge \(1, 2\)"):
        run.require_permutation_labels(collapsed)
    RunConfig(subcommand="find", algorithm="auto").require_permutation_labels(collapsed)
