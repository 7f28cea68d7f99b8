"""
Desk-scale rerun of the reference experiments (Gamma = 100, c_nu = 0.02, dx = 0.1):
  1. self-convergence of the splitting for two initial data (a Gaussian bump, an asymmetric double box)
  2. large-time behavior: scaled L1 / L2 distances to the viscous Burgers profile, and the final profile

CSV files and PNG figures are written to ./abers_example (or `out_dir`).
"""
import logging
from pathlib import Path

import matplotlib
matplotlib.use('Agg')

from . import abe_fig
from .abe_config import parse_config
from .abe_runner import run_experiment

logger = logging.getLogger(__name__)

CONVERGE_GAUSSIAN = """
experiment = converge
T = 10
[initial]
kind = gaussian
width = 1
"""

CONVERGE_DOUBLE_BOX = """
experiment = converge
T = 10
[initial]
kind = double_box
center = -1
width = 2
"""

# mass 1, nu = 1/Gamma + c_nu = 0.03: the wave is a triangle of width sqrt(2 t) moving to the left
ASYMPTOTE = """
experiment = asymptote
T = {T}
dt = 0.08
t_first = 1
n_samples = {n_samples}
[grid]
x_min = {x_min}
x_max = {x_max}
[initial]
kind = box
width = 1
height = 1
"""


def example(out_dir="abers_example", quick: bool = False):
    out_dir = Path(out_dir)
    for name, text in (("gaussian", CONVERGE_GAUSSIAN), ("double_box", CONVERGE_DOUBLE_BOX)):
        outcome = run_experiment(parse_config(text), out_dir / name)
        report = outcome.reports["converge.csv"]
        abe_fig.save(abe_fig.convergence_figure(report, "Self-convergence, " + name), out_dir / name / "converge.png")
        print("{0}: observed order {1:.3f}".format(name, float(report.meta.slope)))

    if quick:
        text = ASYMPTOTE.format(T=400, n_samples=21, x_min=-80, x_max=40)
    else:
        text = ASYMPTOTE.format(T=10000, n_samples=41, x_min=-260, x_max=180)
    outcome = run_experiment(parse_config(text), out_dir / "asymptote")
    metrics = outcome.reports["asymptote.csv"]
    profile = outcome.reports["asymptote_profile.csv"]
    abe_fig.save(abe_fig.decay_figure(metrics), out_dir / "asymptote" / "asymptote.png")
    abe_fig.save(abe_fig.profile_figure(profile), out_dir / "asymptote" / "asymptote_profile.png")
    for name in metrics.columns:
        if name != "t":
            values = metrics.column(name)
            print("{0}: {1:.4e} at t={2:g} -> {3:.4e} at t={4:g}".format(
                name, values[0], metrics.column("t")[0], values[-1], metrics.column("t")[-1]))
    print("figures and CSV files written to {0}".format(out_dir))


if __name__ == "__main__":
    example()
