#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for the command line: exit codes and overrides."""

import logging

import pytest

from abers import abe_runner, abe_splitting
from abers.abe_core import DomainError
from abers.__main__ import main, EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO, VERBOSE_PROGRESS_EVERY

SIMULATE = """
experiment = simulate
T = {T}
dt = {dt}
"""

CONVERGE = """
experiment = converge
T = {T}
[params]
gamma = {gamma}
[initial]
amplitude = {amplitude}
"""


@pytest.fixture
def config_file(tmp_path):
    def write(text, name="run.cfg"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write


def test_no_config_prints_usage(capsys):
    assert main([]) == EXIT_CONFIG
    assert "--config" in capsys.readouterr().out


def test_success_prints_the_written_files(config_file, tmp_path, capsys):
    path = config_file(SIMULATE.format(T=0.5, dt=0.05))
    assert main(["--config", path, "--out", str(tmp_path / "out")]) == EXIT_OK
    assert capsys.readouterr().out.strip() == str(tmp_path / "out" / "simulate.csv")


def test_positional_experiment_overrides_the_config(config_file, tmp_path):
    path = config_file(SIMULATE.format(T=1, dt=0.05))
    assert main(["verify", "--config", path, "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "verify.csv").is_file()
    assert not (tmp_path / "simulate.csv").exists()


def test_config_error(config_file, tmp_path):
    path = config_file(SIMULATE.format(T=1, dt=0.05) + "colour = blue\n")
    assert main(["--config", path, "--out", str(tmp_path)]) == EXIT_CONFIG


def test_thread_count_must_be_positive(config_file, tmp_path):
    path = config_file(SIMULATE.format(T=1, dt=0.05))
    assert main(["--config", path, "--threads", "0"]) == EXIT_CONFIG


def test_solver_error(config_file, tmp_path):
    # dt = 0.5 is far beyond the explicit stability bound (1/12 for unit data)
    path = config_file(SIMULATE.format(T=10, dt=0.5))
    assert main(["--config", path, "--out", str(tmp_path)]) == EXIT_SOLVER


def test_io_errors(config_file, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    path = config_file(SIMULATE.format(T=0, dt=0.05))
    assert main(["--config", path, "--out", str(blocker)]) == EXIT_IO
    assert main(["--config", str(tmp_path / "absent.cfg")]) == EXIT_IO


def test_failed_verify_check(config_file, tmp_path, monkeypatch):
    monkeypatch.setattr(abe_runner, "CN_SPECTRAL_MAX", 0.)
    path = config_file(SIMULATE.format(T=1, dt=0.05))
    assert main(["verify", "--config", path, "--out", str(tmp_path)]) == 1


def test_converge_without_horizon_is_a_config_error(config_file, tmp_path):
    path = config_file(CONVERGE.format(T=0, gamma=100, amplitude=1))
    assert main(["--config", path, "--out", str(tmp_path)]) == EXIT_CONFIG


def test_converge_caps_steps_from_a_large_stability_bound(config_file, tmp_path):
    # gamma = 1e6 and amplitude 0.01 put the stability bound near 833
    path = config_file(CONVERGE.format(T=1, gamma=1e6, amplitude=0.01))
    assert main(["--config", path, "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "converge.csv").is_file()


def test_invalid_run_is_a_config_error(config_file, tmp_path, monkeypatch):
    def reject(cfg, out_dir, threads):
        raise DomainError("dt must lie in (0, 1), got 10.0")
    monkeypatch.setattr(abe_runner, "run_experiment", reject)
    path = config_file(SIMULATE.format(T=1, dt=0.05))
    assert main(["--config", path, "--out", str(tmp_path)]) == EXIT_CONFIG


def test_verbose_logs_progress(config_file, tmp_path, monkeypatch, caplog):
    monkeypatch.setattr(abe_splitting, "LOG_PROGRESS_EVERY", 0)
    caplog.set_level(logging.INFO)
    path = config_file(SIMULATE.format(T=0.5, dt=0.05))
    assert main(["-v", "--config", path, "--out", str(tmp_path)]) == EXIT_OK
    assert abe_splitting.LOG_PROGRESS_EVERY == VERBOSE_PROGRESS_EVERY
    assert any("step 10 / 10" in record.getMessage() for record in caplog.records)
