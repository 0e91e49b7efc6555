"""Run-configuration files (TOML) and the per-run manifest (JSON).

A config file holds top-level gamma3N/tau, an optional [grid] table, one
or more [[ensembles]] tables, and optional [[axes]] tables for sweeps:

    gamma3N = 5.0
    tau = 0.25

    [grid]
    s_min = -300.0
    s_max = 300.0
    i_min = -300.0
    i_max = 300.0
    n_s = 1024
    n_i = 1024
    scheme = "midpoint"      # or "gauss-legendre", with panels = N

    [[ensembles]]
    delta_p = 5.0
    delta_q = 0.0
    theta = 0.0

    [[axes]]
    target = "ensembles[1].theta"
    start = 0.0
    stop = 6.283185307179586
    count = 33
    [axes.link]              # optional: path = multiplier
    # "ensembles[1].delta_p" = -1.0

Frequencies are in Gamma_3 units, phases in radians.  Omitted fields fall
back to gamma3N=5, tau=0.25, the +-300 window at 1024 points, midpoint
quadrature.  write_config emits floats with repr, so a load/write/load
round trip reproduces every value exactly.
"""

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import tomli

from .errors import ValidationError
from .kernel import (
    DEFAULT_GAMMA3N,
    DEFAULT_RESOLUTION,
    DEFAULT_TAU,
    DEFAULT_WINDOW,
    EnsembleShift,
    FrequencyGrid,
    MultiplexConfig,
    build_grid,
)
from .sweep import SweepAxis


@dataclass(frozen=True)
class LoadedRun:
    """Validated contents of a config file."""

    config: MultiplexConfig
    grid: FrequencyGrid
    axes: tuple

    def __iter__(self):
        yield from (self.config, self.grid, self.axes)


def _expect(table, key, kinds, where, default=None, required=False):
    if key not in table:
        if required:
            raise ValidationError(f"{where}: missing required field {key!r}")
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, kinds):
        names = "/".join(k.__name__ for k in (kinds if isinstance(kinds, tuple) else (kinds,)))
        raise ValidationError(f"{where}.{key}: expected {names}, got {type(value).__name__}")
    return value


def _load_grid(table):
    where = "grid"
    s_min = float(_expect(table, "s_min", (int, float), where, -DEFAULT_WINDOW))
    s_max = float(_expect(table, "s_max", (int, float), where, DEFAULT_WINDOW))
    i_min = float(_expect(table, "i_min", (int, float), where, -DEFAULT_WINDOW))
    i_max = float(_expect(table, "i_max", (int, float), where, DEFAULT_WINDOW))
    n_s = _expect(table, "n_s", int, where, DEFAULT_RESOLUTION)
    n_i = _expect(table, "n_i", int, where, DEFAULT_RESOLUTION)
    scheme = _expect(table, "scheme", str, where, "midpoint")
    panels = _expect(table, "panels", int, where, 1)
    return build_grid((s_min, s_max), (i_min, i_max), n_s, n_i, scheme=scheme, panels=panels)


def _load_axis(table, position):
    where = f"axes[{position}]"
    target = _expect(table, "target", str, where, required=True)
    if "values" in table:
        raw = _expect(table, "values", list, where)
        try:
            values = [float(v) for v in raw]
        except (TypeError, ValueError):
            raise ValidationError(f"{where}.values: entries must be numbers") from None
    else:
        start = float(_expect(table, "start", (int, float), where, required=True))
        stop = float(_expect(table, "stop", (int, float), where, required=True))
        count = _expect(table, "count", int, where, required=True)
        if count < 2:
            raise ValidationError(f"{where}.count must be >= 2, got {count}")
        values = np.linspace(start, stop, count)
    link_table = table.get("link")
    link = None
    if link_table is not None:
        if not isinstance(link_table, dict):
            raise ValidationError(f"{where}.link: expected a table of path = multiplier")
        link = {str(k): float(v) for k, v in link_table.items()}
    return SweepAxis(target=target, values=values, link=link)


def load_config(path):
    """Parse and validate a run-configuration file.

    Raises ValidationError with file/line diagnostics on malformed TOML and
    with the violated invariant's name on bad field values.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"parse error in {path}: {exc}") from exc

    gamma3n = float(_expect(data, "gamma3N", (int, float), "config", DEFAULT_GAMMA3N))
    tau = float(_expect(data, "tau", (int, float), "config", DEFAULT_TAU))

    raw_ensembles = data.get("ensembles")
    if not raw_ensembles or not isinstance(raw_ensembles, list):
        raise ValidationError("config: at least one [[ensembles]] table is required")
    ensembles = []
    for k, table in enumerate(raw_ensembles):
        where = f"ensembles[{k}]"
        if not isinstance(table, dict):
            raise ValidationError(f"{where}: expected a table")
        ensembles.append(EnsembleShift(
            delta_p=float(_expect(table, "delta_p", (int, float), where, 0.0)),
            delta_q=float(_expect(table, "delta_q", (int, float), where, 0.0)),
            theta=float(_expect(table, "theta", (int, float), where, 0.0)),
        ))

    config = MultiplexConfig(ensembles=tuple(ensembles), gamma3n=gamma3n, tau=tau)

    grid_table = data.get("grid", {})
    if not isinstance(grid_table, dict):
        raise ValidationError(f"grid: expected a table, got {type(grid_table).__name__}")
    grid = _load_grid(grid_table)

    raw_axes = data.get("axes", [])
    if not isinstance(raw_axes, list):
        raise ValidationError(f"axes: expected an array of tables, got {type(raw_axes).__name__}")
    axes = tuple(_load_axis(t, k) for k, t in enumerate(raw_axes))
    return LoadedRun(config=config, grid=grid, axes=axes)


def write_config(run, path):
    """Emit a LoadedRun back to TOML; floats keep full precision via repr."""
    lines = [f"gamma3N = {run.config.gamma3n!r}", f"tau = {run.config.tau!r}", ""]
    grid = run.grid
    lines += [
        "[grid]",
        f"s_min = {grid.s_range[0]!r}",
        f"s_max = {grid.s_range[1]!r}",
        f"i_min = {grid.i_range[0]!r}",
        f"i_max = {grid.i_range[1]!r}",
        f"n_s = {grid.n_s}",
        f"n_i = {grid.n_i}",
        f'scheme = "{grid.scheme}"',
        f"panels = {grid.panels}",
        "",
    ]
    for e in run.config.ensembles:
        lines += [
            "[[ensembles]]",
            f"delta_p = {e.delta_p!r}",
            f"delta_q = {e.delta_q!r}",
            f"theta = {e.theta!r}",
            "",
        ]
    for axis in run.axes:
        lines += [
            "[[axes]]",
            f'target = "{axis.target}"',
            "values = [" + ", ".join(repr(float(v)) for v in axis.values) + "]",
        ]
        if axis.link:
            lines.append("[axes.link]")
            lines += [f'"{k}" = {v!r}' for k, v in sorted(axis.link.items())]
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")


@dataclass(frozen=True)
class RunManifest:
    """Provenance record written next to every command's outputs."""

    command: str
    parameters: dict
    version: str
    duration_seconds: float
    outputs: tuple


def describe_run(run):
    """JSON-ready dictionary of the resolved parameters of a run."""
    grid = run.grid
    return {
        "gamma3N": run.config.gamma3n,
        "tau": run.config.tau,
        "ensembles": [
            {"delta_p": e.delta_p, "delta_q": e.delta_q, "theta": e.theta}
            for e in run.config.ensembles
        ],
        "grid": {
            "s_min": grid.s_range[0], "s_max": grid.s_range[1],
            "i_min": grid.i_range[0], "i_max": grid.i_range[1],
            "n_s": grid.n_s, "n_i": grid.n_i,
            "scheme": grid.scheme, "panels": grid.panels,
        },
        "axes": [
            {"target": a.target, "values": [float(v) for v in a.values],
             "link": dict(a.link) if a.link else None}
            for a in run.axes
        ],
    }


def write_manifest(path, command, parameters, outputs, started_at):
    from . import __version__

    manifest = RunManifest(
        command=command,
        parameters=parameters,
        version=__version__,
        duration_seconds=time.monotonic() - started_at,
        outputs=tuple(str(p) for p in outputs),
    )
    payload = {
        "command": manifest.command,
        "parameters": manifest.parameters,
        "version": manifest.version,
        "duration_seconds": manifest.duration_seconds,
        "outputs": list(manifest.outputs),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
    return manifest
