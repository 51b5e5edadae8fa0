#!/usr/bin/env python3
"""
End-to-end tests for the fixcycle command line.
"""

import os
import sys

import pytest

# Add src directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src")))

from core.formats import parse_certificate, read_certificate, read_labeling, write_labeling
from core.labeling import Labeling, compose_path, verify_certificate
from main import main, select_algorithm
from services.constructions import (
    group_from_spec,
    group_labels_to_labeling,
    random_group_labeling,
    random_labeling,
    recover_identity_product_cycle,
)
from services.perm_solver import find_cycle_permutation


@pytest.fixture
def run(tmp_path, monkeypatch):
    """Run the CLI with a config file that does not exist, so defaults apply."""
    monkeypatch.delenv("FIXCYCLE_SEED", raising=False)
    monkeypatch.delenv("FIXCYCLE_LOG_DIR", raising=False)
    config = str(tmp_path / "no-config.yaml")

    def invoke(*argv):
        return main(["--config", config, *[str(a) for a in argv]])

    return invoke


def test_gen_lower_bound(run, tmp_path):
    path = tmp_path / "lb.fpcl"
    assert run("gen", "lower-bound", "--d", 3, "-o", path) == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 8
    assert "1 2 : 1 2 3" in lines
    assert "3 1 : 2 3 1" in lines


def test_gen_lower_bound_to_stdout(run, capsys):
    assert run("gen", "lower-bound", "--d", 2) == 0
    assert capsys.readouterr().out.startswith("FPCL 1\nn 2 d 2\n")


def test_gen_random_is_reproducible(run, tmp_path):
    first, second = tmp_path / "a.fpcl", tmp_path / "b.fpcl"
    for path in (first, second):
        assert run("gen", "random", "--n", 5, "--d", 3, "--seed", 1, "--class", "permutation", "-o", path) == 0
    assert first.read_bytes() == second.read_bytes()
    assert read_labeling(first).is_permutation_labeling()


def test_gen_random_uses_environment_seed(run, tmp_path, monkeypatch):
    monkeypatch.setenv("FIXCYCLE_SEED", "5")
    path = tmp_path / "env.fpcl"
    assert run("gen", "random", "--n", 4, "--d", 3, "-o", path) == 0
    assert read_labeling(path) == random_labeling(4, 3, seed=5)


def test_gen_needs_parameters(run):
    assert run("gen", "random", "--d", 3) == 2


@pytest.mark.parametrize("d", range(2, 7))
def test_find_on_lower_bound_reports_not_found(run, tmp_path, capsys, d):
    path = tmp_path / "lb.fpcl"
    run("gen", "lower-bound", "--d", d, "-o", path)
    capsys.readouterr()
    assert run("find", path, "--algorithm", "brute") == 1
    assert capsys.readouterr().out.startswith("NOT FOUND not_found")


def test_find_identity_gives_two_cycle(run, tmp_path, capsys):
    path = tmp_path / "id.fpcl"
    write_labeling(path, Labeling.identity(4, 3))
    assert run("find", path) == 0
    certificate = parse_certificate(capsys.readouterr().out)
    assert certificate.length == 2


def test_find_permutation_instance(run, tmp_path):
    labeling_path, certificate_path = tmp_path / "p.fpcl", tmp_path / "p.fpcy"
    run("gen", "random", "--n", 9, "--d", 5, "--seed", 3, "--class", "permutation", "-o", labeling_path)
    assert run("find", labeling_path, "-o", certificate_path, "--stats") == 0
    assert verify_certificate(read_labeling(labeling_path), read_certificate(certificate_path))
    assert run("verify", labeling_path, certificate_path) == 0


def test_find_perm_rejects_general_labels(run, tmp_path):
    path = tmp_path / "g.fpcl"
    write_labeling(path, Labeling.identity(3, 3).with_labels({(0, 1): (0, 0, 0)}))
    assert run("find", path, "--algorithm", "perm") == 2


def test_find_rejects_malformed_input(run, tmp_path):
    path = tmp_path / "bad.fpcl"
    path.write_text("FPCL 1\nn 2 d 2\n1 2 : 1\n")
    assert run("find", path) == 2
    assert run("find", tmp_path / "missing.fpcl") == 2


def test_verify_detects_broken_trace(run, tmp_path, capsys):
    labeling_path, certificate_path = tmp_path / "id.fpcl", tmp_path / "c.fpcy"
    write_labeling(labeling_path, Labeling.identity(3, 2))
    certificate_path.write_text("FPCY 1\ncycle 1 2\ntrace 1 1 1\n")
    assert run("verify", labeling_path, certificate_path) == 0
    assert capsys.readouterr().out.strip() == "OK"

    certificate_path.write_text("FPCY 1\ncycle 1 2 3\ntrace 1 2 2 1\n")
    assert run("verify", labeling_path, certificate_path) == 1
    assert "step 0" in capsys.readouterr().out


def test_verify_against_wrong_labeling(run, tmp_path):
    good, other, certificate_path = tmp_path / "good.fpcl", tmp_path / "other.fpcl", tmp_path / "c.fpcy"
    write_labeling(good, Labeling.identity(3, 2))
    run("gen", "lower-bound", "--d", 3, "-o", other)
    certificate_path.write_text("FPCY 1\ncycle 1 2\ntrace 1 1 1\n")
    assert run("verify", good, certificate_path) == 0
    assert run("verify", other, certificate_path) == 1


def test_search_reports_none(run, capsys):
    assert run("search", "--n", 3, "--d", 2, "--class", "general") == 0
    assert "RESULT none" in capsys.readouterr().out


def test_search_writes_report(run, tmp_path, capsys):
    path = tmp_path / "report.txt"
    assert run("search", "--n", 2, "--d", 2, "-o", path) == 0
    assert capsys.readouterr().out.strip() == "RESULT exists"
    assert "FPCL 1" in path.read_text()


def test_search_frontier_refusal(run):
    assert run("search", "--n", 3, "--d", 2, "--max-assignments", 10) == 4


@pytest.mark.parametrize("group, n", [("cyclic:3", 5), ("cyclic:4", 7), ("symmetric:3", 11)])
def test_reduce_find_lift_round_trip(run, tmp_path, capsys, group, n):
    group_labeling, reduced, certificate = tmp_path / "g.glbl", tmp_path / "r.fpcl", tmp_path / "c.fpcy"
    assert run("gen", "random-group", "--n", n, "--group", group, "--seed", 2, "-o", group_labeling) == 0
    assert (tmp_path / "g.grpt").exists()
    assert run("reduce", group_labeling, "-o", reduced) == 0
    assert run("find", reduced, "-o", certificate) == 0
    capsys.readouterr()
    assert run("lift", group_labeling, certificate) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("cycle ")
    assert out[1] == "product 1"


def test_lift_rejects_foreign_certificate(run, tmp_path):
    group_labeling, certificate = tmp_path / "g.glbl", tmp_path / "c.fpcy"
    run("gen", "random-group", "--n", 3, "--group", "cyclic:3", "--seed", 0, "-o", group_labeling)
    certificate.write_text("FPCY 1\ncycle 1 2\ntrace 1 9 1\n")
    assert run("lift", group_labeling, certificate) == 1


def test_bad_group_table_is_input_error(run, tmp_path):
    (tmp_path / "bad.grpt").write_text("GRPT 1\nd 2 id 1\n1 2\n2 2\n")
    path = tmp_path / "g.glbl"
    path.write_text("GLBL 1\nn 2 d 2\ngroup bad.grpt\n1 2 : 1\n2 1 : 2\n")
    assert run("reduce", path) == 2


def test_bound(run, capsys):
    assert run("bound", "--d", 4) == 0
    assert capsys.readouterr().out.strip() == "52"
    assert run("bound", "--d", 5, "--class", "permutation") == 0
    assert capsys.readouterr().out.strip() == "8"


def test_select_algorithm():
    assert select_algorithm(random_labeling(9, 5, 0, "permutation"), 10) == "perm"
    assert select_algorithm(random_labeling(8, 2, 0), 10) == "cubic"
    assert select_algorithm(random_labeling(6, 4, 0), 10) == "brute"
    assert select_algorithm(random_labeling(12, 4, 0), 10) == "recursive"


@pytest.mark.slow
@pytest.mark.parametrize("group, d", [(f"cyclic:{d}", d) for d in range(2, 7)] + [("symmetric:3", 6)])
def test_group_corollary_sweep(group, d):
    table = group_from_spec(group)
    for seed in range(100):
        gl = random_group_labeling(2 * d - 1, table, seed)
        l = group_labels_to_labeling(gl)
        result = find_cycle_permutation(l)
        assert result.found, f"seed {seed}"
        cycle = recover_identity_product_cycle(gl, result.certificate)
        assert compose_path(l, cycle + (cycle[0],)).is_identity


def test_log_dir_receives_a_log_file(run, tmp_path, monkeypatch):
    log_dir = tmp_path / "logs"
    monkeypatch.setenv("FIXCYCLE_LOG_DIR", str(log_dir))
    assert main(["--config", str(tmp_path / "none.yaml"), "bound", "--d", "3"]) == 0
    logs = list(log_dir.glob("fixcycle_*.log"))
    assert len(logs) == 1
