"""
StudyReport: labeled numeric columns + metadata, and its CSV form.

CSV layout::

    # config_hash=5c1f0e2a9b7d3e41
    # scheme=lie-trotter eo+cn
    dt,error,observed_order
    0.033333333333333333,1.2345678901234567e-05,0.99812345678901234

Numbers use 17 significant digits ('%.17g'), which round-trips every float64.
Non-finite values are written as nan / inf and listed in the `undefined` metadata entry.
"""
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import *

import numpy as np

from .static_vars import Bunch

NUMBER_FORMAT = "%.17g"


class ReportIOError(OSError):
    def __init__(self, path, cause: OSError):
        super().__init__(cause.errno, "cannot access '{0}': {1}".format(path, cause.strerror or cause))
        self.path = str(path)
        self.cause = cause


@dataclass
class StudyReport:
    columns: "OrderedDict[str, np.ndarray]"
    meta: Bunch = field(default_factory=Bunch)
    labels: Optional[List[str]] = None
    wall_time: Optional[float] = None  # logged, never written (CSV bytes stay deterministic)

    def __post_init__(self):
        columns = OrderedDict()
        for name, values in self.columns.items():
            columns[name] = np.asarray(values, dtype=np.float64).reshape(-1)
        lengths = {values.size for values in columns.values()}
        if self.labels is not None:
            self.labels = [str(label) for label in self.labels]
            lengths.add(len(self.labels))
        if len(lengths) > 1:
            raise ValueError("report columns have different lengths: {0}".format(sorted(lengths)))
        self.columns = columns
        if not isinstance(self.meta, Bunch):
            self.meta = Bunch(**self.meta)

    @staticmethod
    def empty(names: Sequence[str], **meta) -> "StudyReport":
        return StudyReport(OrderedDict((name, np.zeros(0)) for name in names), Bunch(**meta))

    @property
    def n_rows(self) -> int:
        if self.labels is not None:
            return len(self.labels)
        for values in self.columns.values():
            return values.size
        return 0

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]

    def undefined(self) -> List[str]:
        """'column[row]' for every non-finite cell."""
        result = []
        for name, values in self.columns.items():
            for row in np.flatnonzero(~np.isfinite(values)):
                result.append("{0}[{1}]".format(name, row))
        return result


def _render_meta(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return NUMBER_FORMAT % value
    return str(value).replace("\n", " ")


def render_csv(report: StudyReport) -> str:
    lines = []
    meta = dict(report.meta)
    undefined = report.undefined()
    if undefined:
        meta["undefined"] = ";".join(undefined)
    for key in sorted(meta):
        lines.append("# {0}={1}".format(key, _render_meta(meta[key])))
    names = list(report.columns)
    header = (["name"] if report.labels is not None else []) + names
    lines.append(",".join(header))
    for row in range(report.n_rows):
        cells = [report.labels[row]] if report.labels is not None else []
        cells += [NUMBER_FORMAT % report.columns[name][row] for name in names]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit_csv(report: StudyReport, path) -> Path:
    path = Path(path)
    text = render_csv(report)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise ReportIOError(path, e)
    return path


def read_csv(path) -> StudyReport:
    """Inverse of emit_csv; metadata values come back as strings."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ReportIOError(path, e)
    meta = Bunch()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line:
            body.append(line)
    if not body:
        raise ValueError("{0}: missing header row".format(path))
    meta.pop("undefined", None)
    header = body[0].split(",")
    has_labels = header[0] == "name"
    names = header[1:] if has_labels else header
    rows = [line.split(",") for line in body[1:]]
    labels = [row[0] for row in rows] if has_labels else None
    offset = 1 if has_labels else 0
    columns = OrderedDict(
        (name, np.array([float(row[offset + i]) for row in rows], dtype=np.float64))
        for i, name in enumerate(names))
    return StudyReport(columns, meta, labels)


def finite_or_flag(value: Optional[float]) -> float:
    """None -> nan; the report lists nan cells under `undefined`."""
    if value is None or not math.isfinite(value):
        return float("nan")
    return float(value)
