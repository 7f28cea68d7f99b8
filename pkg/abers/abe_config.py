"""
RunConfig: one experiment, read from a flat key/value document.

    # comment
    experiment = converge
    T = 10
    [grid]              # following keys are read as grid.<key>
    dx = 0.1
    [initial]
    kind = gaussian
    width = 1

See docs/usage.rst for the list of keys and their defaults.
"""
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import *

import numpy as np
import xxhash

from .abe_core import Field, GridSpec, KernelSpec, PhysicalParams, Real, DomainError, KernelValidationError
from .abe_splitting import SchemeOptions

logger = logging.getLogger(__name__)

EXPERIMENTS = ("simulate", "converge", "asymptote", "verify")
INITIAL_KINDS = ("gaussian", "box", "double_box", "samples")
SUPPORT_MARGIN = 0.1  # initial data must vanish on the outer 10% at each end of the domain
SUPPORT_TOLERANCE = 1e-10


class ConfigError(ValueError):
    def __init__(self, key: Optional[str], line: Optional[int], message: str):
        where = "line {0}: ".format(line) if line is not None else ""
        what = "{0}: ".format(key) if key else ""
        super().__init__(where + what + message)
        self.key = key
        self.line = line


_REQUIRED = object()


def _number(text: str) -> Real:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("not a finite number")
    return value


def _integer(text: str) -> int:
    value = _number(text)
    if value != int(value):
        raise ValueError("not an integer")
    return int(value)


def _boolean(text: str) -> bool:
    lowered = text.lower()
    if lowered not in ("true", "false"):
        raise ValueError("expected true or false")
    return lowered == "true"


def _numbers(text: str) -> Tuple[Real, ...]:
    values = tuple(_number(item.strip()) for item in text.split(",") if item.strip())
    if not values:
        raise ValueError("empty list")
    return values


def _norms(text: str) -> Tuple[Real, ...]:
    values = []
    for item in text.split(","):
        item = item.strip().lower()
        if item:
            values.append(math.inf if item == "inf" else _number(item))
    if not values:
        raise ValueError("empty list")
    return tuple(values)


def _word(*choices):
    def parse(text: str) -> str:
        if text not in choices:
            raise ValueError("expected one of {0}".format(", ".join(choices)))
        return text
    return parse


def _text(text: str) -> str:
    return text


# key -> (parser, default)
KEYS = {
    "experiment": (_word(*EXPERIMENTS), _REQUIRED),
    "T": (_number, _REQUIRED),
    "dt": (_number, None),
    "dt_list": (_numbers, None),
    "cfl_fractions": (_numbers, (0.4, 0.2, 0.1, 0.05)),
    "p_list": (_norms, (1., 2.)),
    "output_dir": (_text, "out"),
    "record_every": (_integer, None),
    "n_samples": (_integer, 41),
    "t_first": (_number, 1.),
    "compare_reference": (_boolean, False),
    "solver": (_word("split", "reference"), "split"),
    "grid.x_min": (_number, -40.),
    "grid.x_max": (_number, 40.),
    "grid.dx": (_number, None),
    "grid.n_cells": (_integer, None),
    "params.preset": (_word("numerical_section", "normalized"), None),
    "params.gamma": (_number, None),
    "params.c_nu": (_number, None),
    "kernel.kind": (_word("exponential", "tabulated"), "exponential"),
    "kernel.file": (_text, None),
    "initial.kind": (_word(*INITIAL_KINDS), "gaussian"),
    "initial.center": (_number, 0.),
    "initial.width": (_number, 1.),
    "initial.amplitude": (_number, 1.),
    "initial.height": (_number, 1.),
    "initial.file": (_text, None),
    "scheme.literal_cn_denominator": (_boolean, False),
    "scheme.tridiagonal": (_word("banded", "thomas"), "banded"),
    "scheme.mass_consistent_reference": (_boolean, True),
}

DEFAULT_DX = 0.1


@dataclass(frozen=True)
class InitialData:
    """
    gaussian:   amplitude exp(-(x - center)^2 / (2 width^2))
    box:        height on [center - width/2, center + width/2]
    double_box: height on [center - width/2, center), height/2 on [center, center + width)
    samples:    one value per cell, read from a file
    """
    kind: str = "gaussian"
    center: Real = 0.
    width: Real = 1.
    amplitude: Real = 1.
    height: Real = 1.
    samples: Optional[Tuple[Real, ...]] = None

    def values(self, grid: GridSpec) -> np.ndarray:
        x = grid.nodes()
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-0.5 * ((x - self.center) / self.width) ** 2)
        if self.kind == "box":
            return np.where(np.abs(x - self.center) <= self.width / 2., self.height, 0.)
        if self.kind == "double_box":
            left = (x >= self.center - self.width / 2.) & (x < self.center)
            right = (x >= self.center) & (x < self.center + self.width)
            return np.where(left, self.height, np.where(right, self.height / 2., 0.))
        if self.kind == "samples":
            values = np.asarray(self.samples, dtype=np.float64)
            if values.size != grid.n_cells:
                raise DomainError("{0} samples for {1} cells".format(values.size, grid.n_cells))
            return values
        raise DomainError("unknown initial data kind: {0}".format(self.kind))

    def field(self, grid: GridSpec) -> Field:
        return Field(grid, self.values(grid))


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    T: Real
    grid: GridSpec
    params: PhysicalParams
    initial: InitialData
    dt: Optional[Real] = None
    dt_list: Optional[Tuple[Real, ...]] = None
    cfl_fractions: Tuple[Real, ...] = (0.4, 0.2, 0.1, 0.05)
    p_list: Tuple[Real, ...] = (1., 2.)
    output_dir: str = "out"
    record_every: Optional[int] = None
    n_samples: int = 41
    t_first: Real = 1.
    compare_reference: bool = False
    solver: str = "split"
    scheme: SchemeOptions = SchemeOptions()
    config_hash: str = ""
    entries: Dict[str, str] = field(default_factory=dict, compare=False)

    def initial_field(self) -> Field:
        return self.initial.field(self.grid)


def config_hash(entries: Dict[str, str], payloads: Iterable[bytes] = ()) -> str:
    """xxhash of the fully resolved key/value set (defaults included) and of the referenced file contents."""
    h = xxhash.xxh64()
    for key in sorted(entries):
        h.update("{0}={1}\n".format(key, entries[key]).encode())
    for payload in payloads:
        h.update(payload)
    return h.hexdigest()


_SECTION = re.compile(r"^\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*)\s*=\s*(.*)$")


def _tokenize(text: str) -> Dict[str, Tuple[str, int]]:
    """key -> (raw value, line number)"""
    raw = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1) + "."
            continue
        m = _ENTRY.match(line)
        if not m:
            raise ConfigError(None, number, "expected 'key = value' or '[section]', got '{0}'".format(line))
        key = section + m.group(1)
        value = m.group(2).strip()
        if key not in KEYS:
            raise ConfigError(key, number, "unknown key")
        if key in raw:
            raise ConfigError(key, number, "duplicate key (first set on line {0})".format(raw[key][1]))
        if not value:
            raise ConfigError(key, number, "missing value")
        raw[key] = (value, number)
    return raw


class _Resolver:
    """Parsed values with the line each one came from (None for defaults)."""

    def __init__(self, raw: Dict[str, Tuple[str, int]]):
        self.values = {}
        self.lines = {}
        for key, (parser, default) in KEYS.items():
            if key in raw:
                text, line = raw[key]
                try:
                    self.values[key] = parser(text)
                except ValueError as e:
                    raise ConfigError(key, line, "invalid value '{0}' ({1})".format(text, e))
                self.lines[key] = line
            elif default is _REQUIRED:
                raise ConfigError(key, None, "missing required key")
            else:
                self.values[key] = default
                self.lines[key] = None

    def __getitem__(self, key):
        return self.values[key]

    def given(self, key) -> bool:
        return self.lines.get(key) is not None

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(key, self.lines.get(key), message)

    def entries(self) -> Dict[str, str]:
        return {key: repr(value) for key, value in self.values.items()}


def _read_numbers(path: Path, key: str, r: _Resolver) -> np.ndarray:
    if not path.is_file():
        raise r.error(key, "file not found: {0}".format(path))
    try:
        return np.loadtxt(str(path), dtype=np.float64, delimiter=None, comments="#", ndmin=1)
    except ValueError as e:
        raise r.error(key, "cannot read numbers from {0} ({1})".format(path, e))


def _resolve_grid(r: _Resolver) -> GridSpec:
    x_min, x_max = r["grid.x_min"], r["grid.x_max"]
    if not x_min < x_max:
        raise r.error("grid.x_max", "must be > grid.x_min")
    if r.given("grid.dx") and r.given("grid.n_cells"):
        raise r.error("grid.n_cells", "give either grid.dx or grid.n_cells, not both")
    try:
        if r["grid.n_cells"] is not None:
            return GridSpec(x_min, x_max, r["grid.n_cells"])
        dx = r["grid.dx"] if r["grid.dx"] is not None else DEFAULT_DX
        if dx <= 0.:
            raise r.error("grid.dx", "must be > 0")
        return GridSpec.from_dx(x_min, x_max, dx)
    except DomainError as e:
        raise r.error("grid.n_cells" if r.given("grid.n_cells") else "grid.dx", str(e))


def _resolve_params(r: _Resolver, base_dir: Path) -> Tuple[PhysicalParams, List[bytes]]:
    preset = r["params.preset"]
    base = PhysicalParams.normalized() if preset == "normalized" else PhysicalParams.numerical_section()
    gamma = r["params.gamma"] if r["params.gamma"] is not None else base.gamma
    c_nu = r["params.c_nu"] if r["params.c_nu"] is not None else base.c_nu
    payloads = []
    kernel = KernelSpec.exponential()
    if r["kernel.kind"] == "tabulated":
        if r["kernel.file"] is None:
            raise r.error("kernel.file", "required when kernel.kind = tabulated")
        table = _read_numbers(base_dir / r["kernel.file"], "kernel.file", r)
        if table.ndim != 2 or table.shape[1] != 2:
            raise r.error("kernel.file", "expected two columns (z, K(z))")
        try:
            kernel = KernelSpec.tabulated(table[:, 0], table[:, 1])
        except (KernelValidationError, DomainError) as e:
            raise r.error("kernel.file", str(e))
        payloads.append(table.tobytes())
    elif r["kernel.file"] is not None:
        raise r.error("kernel.file", "only used with kernel.kind = tabulated")
    try:
        return PhysicalParams(gamma, c_nu, kernel), payloads
    except DomainError as e:
        raise r.error("params.gamma" if not gamma > 0. else "params.c_nu", str(e))


def _resolve_initial(r: _Resolver, grid: GridSpec, base_dir: Path) -> Tuple[InitialData, List[bytes]]:
    kind = r["initial.kind"]
    payloads = []
    samples = None
    if kind == "samples":
        if r["initial.file"] is None:
            raise r.error("initial.file", "required when initial.kind = samples")
        values = _read_numbers(base_dir / r["initial.file"], "initial.file", r).reshape(-1)
        if values.size != grid.n_cells:
            raise r.error("initial.file", "{0} samples for {1} cells".format(values.size, grid.n_cells))
        if not np.all(np.isfinite(values)):
            raise r.error("initial.file", "samples must be finite")
        samples = tuple(float(v) for v in values)
        payloads.append(values.tobytes())
    elif r["initial.width"] <= 0.:
        raise r.error("initial.width", "must be > 0 (degenerate initial data)")
    initial = InitialData(kind, r["initial.center"], r["initial.width"], r["initial.amplitude"],
                          r["initial.height"], samples)

    values = initial.values(grid)
    margin = SUPPORT_MARGIN * grid.length
    x = grid.nodes()
    outer = (x < grid.x_min + margin) | (x > grid.x_max - margin)
    scale = float(np.max(np.abs(values)))
    if scale > 0. and np.any(np.abs(values[outer]) > SUPPORT_TOLERANCE * scale):
        key = "initial.file" if kind == "samples" else "initial.center"
        raise r.error(key, "initial data must be supported within the inner 80% of the domain")
    return initial, payloads


def _check_dt(r: _Resolver, key: str, dt: Real, T: Real):
    if not 0. < dt < 1.:
        raise r.error(key, "time steps must lie in (0, 1), got {0}".format(dt))
    ratio = T / dt
    if abs(ratio - round(ratio)) > 1e-6:
        raise r.error(key, "T={0} is not an integer multiple of {1}".format(T, dt))


def parse_config(text: str, base_dir=".", experiment: str = None) -> RunConfig:
    """
    :param base_dir: directory against which kernel.file and initial.file are resolved
    :param experiment: overrides the document's experiment key
    """
    raw = _tokenize(text)
    if experiment is not None:
        if experiment not in EXPERIMENTS:
            raise ConfigError("experiment", None, "unknown experiment '{0}'".format(experiment))
        if "experiment" in raw and raw["experiment"][0] != experiment:
            logger.info("experiment '%s' from the command line overrides '%s' (line %d)",
                        experiment, raw["experiment"][0], raw["experiment"][1])
        raw["experiment"] = (experiment, raw["experiment"][1] if "experiment" in raw else None)
    r = _Resolver(raw)
    base_dir = Path(base_dir)

    T = r["T"]
    if T < 0.:
        raise r.error("T", "must be >= 0")
    grid = _resolve_grid(r)
    params, kernel_payloads = _resolve_params(r, base_dir)
    initial, initial_payloads = _resolve_initial(r, grid, base_dir)
    exp = r["experiment"]

    if exp == "converge" and not T > 0.:
        raise r.error("T", "must be > 0 for experiment 'converge'")
    if exp in ("simulate", "asymptote", "verify"):
        if r["dt"] is None:
            raise r.error("dt", "required for experiment '{0}'".format(exp))
        _check_dt(r, "dt", r["dt"], T)
    elif r["dt"] is not None:
        _check_dt(r, "dt", r["dt"], T)
    if r["dt_list"] is not None:
        dt_list = r["dt_list"]
        if any(b >= a for a, b in zip(dt_list, dt_list[1:])):
            raise r.error("dt_list", "must be strictly decreasing")
        for dt in dt_list:
            _check_dt(r, "dt_list", dt, T)
    fractions = r["cfl_fractions"]
    if any(not 0. < f <= 1. for f in fractions):
        raise r.error("cfl_fractions", "fractions must lie in (0, 1]")
    if any(b >= a for a, b in zip(fractions, fractions[1:])):
        raise r.error("cfl_fractions", "must be strictly decreasing")
    if any(p < 1. for p in r["p_list"]):
        raise r.error("p_list", "norm exponents must be >= 1")
    if r["record_every"] is not None and r["record_every"] < 1:
        raise r.error("record_every", "must be >= 1")
    if r["n_samples"] < 2:
        raise r.error("n_samples", "must be >= 2")
    if exp == "asymptote" and not 0. < r["t_first"] <= T:
        raise r.error("t_first", "must lie in (0, T]")
    uses_split = not (exp == "simulate" and r["solver"] == "reference")
    if uses_split and not params.kernel.is_exponential:
        raise r.error("kernel.kind", "the splitting solver needs the exponential kernel "
                                     "(use experiment = simulate with solver = reference)")
    if exp != "simulate" and r.given("solver"):
        raise r.error("solver", "only used by experiment = simulate")

    scheme = SchemeOptions(
        literal_cn_denominator=r["scheme.literal_cn_denominator"],
        tridiagonal=r["scheme.tridiagonal"],
        mass_consistent_reference=r["scheme.mass_consistent_reference"])
    entries = r.entries()
    return RunConfig(
        experiment=exp,
        T=T,
        grid=grid,
        params=params,
        initial=initial,
        dt=r["dt"],
        dt_list=r["dt_list"],
        cfl_fractions=fractions,
        p_list=r["p_list"],
        output_dir=r["output_dir"],
        record_every=r["record_every"],
        n_samples=r["n_samples"],
        t_first=r["t_first"],
        compare_reference=r["compare_reference"],
        solver=r["solver"],
        scheme=scheme,
        config_hash=config_hash(entries, kernel_payloads + initial_payloads),
        entries=entries)


def load_config(path, experiment: str = None) -> RunConfig:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse_config(text, path.parent, experiment)
