# -*- coding: utf-8 -*-
from .abe_core import *
from .abe_substeps import eo_flux, burgers_substep, thomas_solve, solve_tridiagonal, cn_relaxation_substep, \
    spectral_relaxation_exact, TridiagonalSystem, RelaxationSymbol
from .abe_splitting import SchemeOptions, SplitSchedule, Trajectory, split_evolve, reference_abe_evolve, \
    self_convergence_study, log_spaced_steps
from .abe_asymptotics import ProfileSpec, self_similar_profile, decay_metric_series, rescale_field, \
    rescale_snapshot, decay_envelope_check
from .abe_report import StudyReport, emit_csv, read_csv
from .abe_config import RunConfig, ConfigError, parse_config, load_config
from .abe_runner import run_experiment

__author__ = """abers developers"""
__version__ = '0.1.0'

from .static_vars import *
