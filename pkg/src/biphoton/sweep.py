"""Entropy maps over 1-D/2-D parameter grids, extrema, and grid convergence.

Sweep axes address config parameters by path ("gamma3n", "tau", or
"ensembles[k].delta_p|delta_q|theta").  A link rule binds other parameters
to the swept value through constant multipliers, e.g. the mirror rule
delta_p2 = -delta_p1 of the symmetric two-ensemble preset.

Cells are evaluated by a thread pool (LAPACK releases the GIL); results
are collected in grid order, so identical inputs give identical maps
regardless of worker count.  Cells whose amplitude cancels are recorded
as failures, never interpolated over.
"""

import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, replace

import numpy as np

try:
    from threadpoolctl import threadpool_limits
except ImportError:
    threadpool_limits = None

from .entropy import entropy_from_eigenvalues
from .errors import NullKernelError, ValidationError
from .kernel import (
    DEFAULT_GAMMA3N,
    DEFAULT_TAU,
    EnsembleShift,
    MultiplexConfig,
    build_kernel,
    default_grid,
)
from .schmidt import schmidt_eigenvalues

WORKERS_ENV_VAR = "BIPHOTON_WORKERS"

SWEEP_RESOLUTION = 512

_PATH_RE = re.compile(r"^ensembles\[(\d+)\]\.(delta_p|delta_q|theta)$")


def resolve_workers(workers=None):
    """Worker count for sweeps: argument, else BIPHOTON_WORKERS, else cores."""
    if workers is not None:
        value = int(workers)
    else:
        env = os.environ.get(WORKERS_ENV_VAR, "").strip()
        try:
            value = int(env) if env else (os.cpu_count() or 1)
        except ValueError:
            raise ValidationError(
                f"{WORKERS_ENV_VAR} must be an integer, got {env!r}") from None
    if value < 1:
        raise ValidationError(f"worker count must be >= 1, got {value}")
    return value


def set_config_param(config, path, value):
    """Return a copy of config with the parameter at `path` replaced."""
    if path in ("gamma3n", "gamma3N"):
        return replace(config, gamma3n=float(value))
    if path == "tau":
        return replace(config, tau=float(value))
    m = _PATH_RE.match(path)
    if not m:
        raise ValidationError(f"unknown parameter path {path!r}")
    index, fieldname = int(m.group(1)), m.group(2)
    if index >= config.n_mp:
        raise ValidationError(f"parameter path {path!r} addresses ensemble {index}, "
                              f"but the config has {config.n_mp}")
    ensembles = list(config.ensembles)
    ensembles[index] = replace(ensembles[index], **{fieldname: float(value)})
    return replace(config, ensembles=tuple(ensembles))


def apply_assignment(config, path, value, link=None):
    """Assign path=value and propagate any linked parameters.

    link maps target paths to multipliers: each target is set to
    multiplier * value.
    """
    out = set_config_param(config, path, value)
    for target, multiplier in (link or {}).items():
        out = set_config_param(out, target, multiplier * float(value))
    return out


@dataclass(frozen=True, eq=False)
class SweepAxis:
    """One swept parameter: target path, sample values, optional link rule."""

    target: str
    values: np.ndarray
    link: dict | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("axis values must be a non-empty 1-D sequence")
        diffs = np.diff(values)
        if values.size > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValidationError("axis values must be strictly monotone")
        object.__setattr__(self, "values", values)


_PRESET_ALIASES = {
    "two-symmetric": {
        "delta_p1": "ensembles[0].delta_p",
        "theta2": "ensembles[1].theta",
    },
    "three-symmetric": {
        "delta_p1": "ensembles[0].delta_p",
        "theta1": "ensembles[0].theta",
        "theta2": "ensembles[2].theta",
    },
}


@dataclass(frozen=True)
class Preset:
    """Configuration template plus the link rules tying its parameters."""

    name: str
    template: MultiplexConfig
    links: dict

    def configure(self, **assignments):
        """Instantiate with free-parameter assignments (delta_p1, theta1, theta2).

        Raw parameter paths are accepted too; linked parameters follow the
        preset's rules automatically.
        """
        aliases = _PRESET_ALIASES[self.name]
        config = self.template
        for alias, value in assignments.items():
            path = aliases.get(alias, alias)
            config = apply_assignment(config, path, value, self.links.get(path))
        return config

    def axis(self, alias, values):
        """SweepAxis over a free parameter, carrying the preset's link rule."""
        path = _PRESET_ALIASES[self.name].get(alias, alias)
        return SweepAxis(target=path, values=values, link=self.links.get(path))


def preset(name):
    """Named symmetric configurations from the two/three-ensemble studies.

    two-symmetric: [(dp1, 0, 0), (-dp1, 0, theta2)], free (dp1, theta2).
    three-symmetric: [(dp1, 0, theta1), (0, 0, 0), (-dp1, 0, theta2)], the
    middle unshifted ensemble carrying the reference phase; free
    (dp1, theta1, theta2).  Both use gamma3N=5, tau=0.25 defaults and the
    mirror link delta_p_last = -delta_p_first.
    """
    if name == "two-symmetric":
        template = MultiplexConfig(
            ensembles=(EnsembleShift(delta_p=5.0), EnsembleShift(delta_p=-5.0)),
            gamma3n=DEFAULT_GAMMA3N, tau=DEFAULT_TAU,
        )
        links = {"ensembles[0].delta_p": {"ensembles[1].delta_p": -1.0}}
    elif name == "three-symmetric":
        template = MultiplexConfig(
            ensembles=(EnsembleShift(delta_p=6.0), EnsembleShift(), EnsembleShift(delta_p=-6.0)),
            gamma3n=DEFAULT_GAMMA3N, tau=DEFAULT_TAU,
        )
        links = {"ensembles[0].delta_p": {"ensembles[2].delta_p": -1.0}}
    else:
        raise ValidationError(f"unknown preset {name!r}; known: two-symmetric, three-symmetric")
    return Preset(name=name, template=template, links=links)


@dataclass(frozen=True)
class CellFailure:
    """A grid cell whose evaluation raised instead of producing S."""

    index: tuple
    coords: tuple
    kind: str
    message: str


@dataclass(frozen=True, eq=False)
class EntropyMap:
    """S in bits over the swept grid; failed cells hold NaN and are listed."""

    axis1: SweepAxis
    axis2: SweepAxis | None
    values: np.ndarray
    failures: tuple

    def is_failure(self, index):
        return any(f.index == index for f in self.failures)


def _cell_entropy(config, grid):
    lam = schmidt_eigenvalues(build_kernel(config, grid))
    return entropy_from_eigenvalues(lam)


def sweep_entropy(template, axes, grid=None, resolution=SWEEP_RESOLUTION, workers=None):
    """Evaluate entropy over a 1-D or 2-D parameter grid.

    axes is one SweepAxis or a sequence of one or two.  The kernel grid
    defaults to the +-300 window at `resolution` points per axis; passing
    an explicit FrequencyGrid with resolution=None uses it as-is, and with
    a resolution re-samples its window at that count.
    """
    if isinstance(axes, SweepAxis):
        axes = (axes,)
    axes = tuple(axes)
    if not 1 <= len(axes) <= 2:
        raise ValidationError("sweep_entropy takes one or two axes")
    axis1 = axes[0]
    axis2 = axes[1] if len(axes) == 2 else None

    if grid is None:
        grid = default_grid(resolution=resolution or SWEEP_RESOLUTION)
    elif resolution is not None and resolution != grid.n_s:
        grid = grid.with_resolution(resolution)

    # Validate paths against the template before launching workers.
    for axis in axes:
        apply_assignment(template, axis.target, float(axis.values[0]), axis.link)

    jobs = []
    if axis2 is None:
        for i, v1 in enumerate(axis1.values):
            config = apply_assignment(template, axis1.target, v1, axis1.link)
            jobs.append(((i,), (float(v1),), config))
        shape = (axis1.values.size,)
    else:
        for i, v1 in enumerate(axis1.values):
            base = apply_assignment(template, axis1.target, v1, axis1.link)
            for j, v2 in enumerate(axis2.values):
                config = apply_assignment(base, axis2.target, v2, axis2.link)
                jobs.append(((i, j), (float(v1), float(v2)), config))
        shape = (axis1.values.size, axis2.values.size)

    def run(job):
        index, coords, config = job
        try:
            return index, coords, _cell_entropy(config, grid), None
        except NullKernelError as exc:
            return index, coords, math.nan, ("null-kernel", str(exc))

    n_workers = resolve_workers(workers)
    if n_workers == 1:
        results = [run(job) for job in jobs]
    else:
        # One BLAS thread per worker: concurrent cells already saturate the
        # cores, and nested LAPACK threading only adds contention.
        limits = (threadpool_limits(limits=1) if threadpool_limits is not None
                  else nullcontext())
        with limits, ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run, jobs))

    values = np.full(shape, math.nan)
    failures = []
    for index, coords, s_bits, error in results:
        values[index] = s_bits
        if error is not None:
            failures.append(CellFailure(index=index, coords=coords,
                                        kind=error[0], message=error[1]))
    return EntropyMap(axis1=axis1, axis2=axis2, values=values, failures=tuple(failures))


@dataclass(frozen=True)
class ExtremaReport:
    """Strict local extrema over the map neighborhood graph, plus globals.

    Neighbors are the 4-neighborhood in the interior and the along-edge
    neighbors on boundaries; failed cells are excluded.  Entries are
    (coords, S) pairs.
    """

    maxima: tuple
    minima: tuple
    global_max: tuple
    global_min: tuple


def _neighbors(index, shape):
    out = []
    if len(shape) == 1:
        (i,), (n,) = index, shape
        for di in (-1, 1):
            if 0 <= i + di < n:
                out.append((i + di,))
        return out
    (i, j), (n1, n2) = index, shape
    for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        a, b = i + di, j + dj
        if 0 <= a < n1 and 0 <= b < n2:
            out.append((a, b))
    return out


def _cell_coords(emap, index):
    if emap.axis2 is None:
        return (float(emap.axis1.values[index[0]]),)
    return (float(emap.axis1.values[index[0]]), float(emap.axis2.values[index[1]]))


def find_extrema(emap):
    """Locate strict local extrema and the global extrema of an entropy map."""
    values = emap.values
    finite = np.isfinite(values)
    if not finite.any():
        raise ValidationError("empty map: every cell failed")

    shape = values.shape
    maxima, minima = [], []
    for index in np.ndindex(shape):
        if not finite[index]:
            continue
        here = values[index]
        neighbor_vals = [values[n] for n in _neighbors(index, shape) if finite[n]]
        if not neighbor_vals:
            continue
        if all(here > v for v in neighbor_vals):
            maxima.append((_cell_coords(emap, index), float(here)))
        elif all(here < v for v in neighbor_vals):
            minima.append((_cell_coords(emap, index), float(here)))

    flat_max = np.nanargmax(values)
    flat_min = np.nanargmin(values)
    idx_max = np.unravel_index(flat_max, shape)
    idx_min = np.unravel_index(flat_min, shape)
    return ExtremaReport(
        maxima=tuple(maxima),
        minima=tuple(minima),
        global_max=(_cell_coords(emap, idx_max), float(values[idx_max])),
        global_min=(_cell_coords(emap, idx_min), float(values[idx_min])),
    )


@dataclass(frozen=True)
class ConvergenceResult:
    """Entropy at the base and refined resolutions and their difference."""

    S_coarse: float
    S_fine: float

    @property
    def delta(self):
        return abs(self.S_fine - self.S_coarse)

    def __iter__(self):
        yield from (self.S_coarse, self.S_fine, self.delta)


def convergence_check(config, grid, factor=2):
    """Recompute S at factor-times the grid resolution and report the change."""
    if int(factor) != factor or factor < 2:
        raise ValidationError(f"refinement factor must be an integer >= 2, got {factor!r}")
    fine = grid.with_resolution(grid.n_s * int(factor), grid.n_i * int(factor))
    coarse_s = _cell_entropy(config, grid)
    fine_s = _cell_entropy(config, fine)
    return ConvergenceResult(S_coarse=coarse_s, S_fine=fine_s)
