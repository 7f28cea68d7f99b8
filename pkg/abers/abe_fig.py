"""
matplotlib figures of StudyReports. The command line only writes CSV; these are used by the example.

Note: pick the backend *before* importing this module when running headless::

    import matplotlib
    matplotlib.use('Agg')
"""
from typing import *

import numpy
import matplotlib
import matplotlib.pyplot

from .abe_report import StudyReport


def convergence_figure(report: StudyReport, title: str = "Self-convergence") -> matplotlib.figure.Figure:
    """log-log error vs dt, with a slope-one reference line through the last point."""
    dt = report.column("dt")
    error = report.column("error")
    figure, axes = matplotlib.pyplot.subplots(figsize=(5, 4))
    axes.loglog(dt, error, "o-", label="||u_dt(T) - u_dt/2(T)||_2")
    positive = error > 0.
    if numpy.any(positive):
        anchor_dt, anchor_error = dt[positive][-1], error[positive][-1]
        axes.loglog(dt, anchor_error * dt / anchor_dt, "k--", label="slope 1")
    slope = report.meta.get("slope")
    if slope is not None and report.meta.get("slope_defined"):
        title = "{0} (slope {1:.3f})".format(title, float(slope))
    axes.set_xlabel("dt")
    axes.set_ylabel("error")
    axes.set_title(title)
    axes.legend()
    figure.tight_layout()
    return figure


def decay_figure(report: StudyReport, title: str = "Scaled distance to u_M") -> matplotlib.figure.Figure:
    """Every non-t column of an asymptote report against t, log-log."""
    t = report.column("t")
    figure, axes = matplotlib.pyplot.subplots(figsize=(5, 4))
    for name, values in report.columns.items():
        if name != "t":
            axes.loglog(t, values, label=name)
    axes.set_xlabel("t")
    axes.set_title(title)
    axes.legend()
    figure.tight_layout()
    return figure


def profile_figure(report: StudyReport, title: str = "Solution at the final time",
                   x_range: Optional[Tuple[float, float]] = None) -> matplotlib.figure.Figure:
    x = report.column("x")
    figure, axes = matplotlib.pyplot.subplots(figsize=(6, 3.5))
    for name, values in report.columns.items():
        if name != "x":
            axes.plot(x, values, label=name)
    if x_range is not None:
        axes.set_xlim(*x_range)
    axes.set_xlabel("x")
    axes.set_title(title)
    axes.legend()
    figure.tight_layout()
    return figure


def save(figure: matplotlib.figure.Figure, path) -> None:
    figure.savefig(str(path), dpi=100)
    matplotlib.pyplot.close(figure)
