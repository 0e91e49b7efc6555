"""Command-line interface: eval, decompose, entropy, sweep, check.

Exit codes: 0 success, 1 usage error, 2 validation or numerical error,
3 null kernel (the configured ensembles cancel).

All frequencies are in Gamma_3 units.  Numeric flag values accept plain
floats or multiples of pi ("pi", "2pi", "4/3pi", "pi/2"), matching how
phases are quoted in the underlying studies.  CSV outputs are UTF-8 with
LF line endings and 17-significant-digit floats, so identical invocations
produce byte-identical files.
"""

import argparse
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import config_io
from .entropy import entropy_of_entanglement
from .errors import BiphotonError, NullKernelError, ValidationError
from .kernel import build_grid, build_kernel, eval_spectral_amplitude
from .schmidt import mode_density, oracle_reduced_density, schmidt_decompose
from .sweep import convergence_check, find_extrema, set_config_param, sweep_entropy

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ERROR = 2
EXIT_NULL = 3

# Coarse probe resolution used by `eval` to detect a null configuration;
# the null tolerance is resolution-independent by construction.
NULL_PROBE_POINTS = 64

CONVERGENCE_TOL_BITS = 1e-3
ORACLE_TOL = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_PI_FORM = re.compile(
    r"^(?P<sign>[+-]?)(?:(?P<num>\d+(?:\.\d*)?)(?:/(?P<den>\d+(?:\.\d*)?))?)?"
    r"pi(?:/(?P<postden>\d+(?:\.\d*)?))?$"
)


def parse_scalar(text):
    """Float from a plain literal or a multiple of pi ("4/3pi", "pi/2", "-pi")."""
    raw = str(text).strip().replace(" ", "")
    try:
        return float(raw)
    except ValueError:
        pass
    m = _PI_FORM.match(raw.lower())
    if not m:
        raise UsageError(f"could not parse number {text!r} (plain float or pi form expected)")
    value = math.pi
    if m.group("num"):
        value *= float(m.group("num"))
    if m.group("den"):
        value /= float(m.group("den"))
    if m.group("postden"):
        value /= float(m.group("postden"))
    if m.group("sign") == "-":
        value = -value
    return value


def _fmt(x):
    return f"{x:.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _apply_overrides(config, pairs):
    for pair in pairs or ():
        if "=" not in pair:
            raise UsageError(f"--set expects PATH=VALUE, got {pair!r}")
        path, _, value = pair.partition("=")
        config = set_config_param(config, path.strip(), parse_scalar(value))
    return config


def _load(args):
    run = config_io.load_config(args.config)
    config = _apply_overrides(run.config, getattr(args, "set", None))
    return config_io.LoadedRun(config=config, grid=run.grid, axes=run.axes)


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_eval(args):
    run = _load(args)
    ws = parse_scalar(args.ws)
    wi = parse_scalar(args.wi)
    probe = build_grid(run.grid.s_range, run.grid.i_range,
                       NULL_PROBE_POINTS, NULL_PROBE_POINTS)
    build_kernel(run.config, probe)  # raises NullKernelError for cancelling configs
    amplitude = eval_spectral_amplitude(run.config, ws, wi)
    print(f"{_fmt(amplitude.real)} {_fmt(amplitude.imag)}")
    return EXIT_OK


def _mode_table(grid_nodes, modes, densities):
    header = ["node"]
    for n in range(len(modes)):
        header += [f"re_{n + 1}", f"im_{n + 1}", f"density_{n + 1}"]
    rows = []
    for j, node in enumerate(grid_nodes):
        row = [_fmt(node)]
        for n in range(len(modes)):
            row += [_fmt(modes[n][j].real), _fmt(modes[n][j].imag), _fmt(densities[n][j])]
        rows.append(row)
    return header, rows


def _cmd_decompose(args):
    started = time.monotonic()
    run = _load(args)
    out = _out_dir(args)
    spectrum = schmidt_decompose(build_kernel(run.config, run.grid),
                                 retained_count=args.modes)

    eig_path = out / "eigenvalues.csv"
    _write_csv(eig_path, ["n", "lambda"],
               ([str(n + 1), _fmt(lam)] for n, lam in enumerate(spectrum.eigenvalues)))

    densities = [mode_density(spectrum, n + 1) for n in range(spectrum.retained_count)]
    signal_path = out / "signal_modes.csv"
    header, rows = _mode_table(run.grid.s_nodes, spectrum.signal_modes,
                               [d[0] for d in densities])
    _write_csv(signal_path, header, rows)
    idler_path = out / "idler_modes.csv"
    header, rows = _mode_table(run.grid.i_nodes, spectrum.idler_modes,
                               [d[1] for d in densities])
    _write_csv(idler_path, header, rows)

    outputs = [eig_path, signal_path, idler_path]
    params = config_io.describe_run(run)
    params["retained_count"] = spectrum.retained_count
    config_io.write_manifest(out / "manifest.json", "decompose", params, outputs, started)
    return EXIT_OK


def _cmd_entropy(args):
    started = time.monotonic()
    run = _load(args)
    out = _out_dir(args)
    spectrum = schmidt_decompose(build_kernel(run.config, run.grid))
    result = entropy_of_entanglement(spectrum)
    print(_fmt(result.S))
    params = config_io.describe_run(run)
    params["S_bits"] = result.S
    params["lambda_tail"] = result.lambda_tail
    params["config_digest"] = result.config_digest
    config_io.write_manifest(out / "manifest.json", "entropy", params, [], started)
    return EXIT_OK


def _cmd_sweep(args):
    started = time.monotonic()
    run = _load(args)
    if not run.axes:
        raise ValidationError("sweep requires at least one [[axes]] table in the config")
    out = _out_dir(args)
    emap = sweep_entropy(run.config, run.axes, grid=run.grid,
                         resolution=args.resolution, workers=args.workers)

    rows = []
    if emap.axis2 is None:
        for i, v1 in enumerate(emap.axis1.values):
            failed = emap.is_failure((i,))
            s = emap.values[i]
            rows.append([_fmt(v1), "", "nan" if failed else _fmt(s),
                         "null-kernel" if failed else "ok"])
    else:
        for i, v1 in enumerate(emap.axis1.values):
            for j, v2 in enumerate(emap.axis2.values):
                failed = emap.is_failure((i, j))
                s = emap.values[i, j]
                rows.append([_fmt(v1), _fmt(v2), "nan" if failed else _fmt(s),
                             "null-kernel" if failed else "ok"])
    map_path = out / "map.csv"
    _write_csv(map_path, ["axis1", "axis2", "S_bits", "status"], rows)

    report = find_extrema(emap)
    ext_rows = []

    def _ext(kind, coords, value):
        a1 = _fmt(coords[0])
        a2 = _fmt(coords[1]) if len(coords) > 1 else ""
        ext_rows.append([kind, a1, a2, _fmt(value)])

    for coords, value in report.maxima:
        _ext("local_max", coords, value)
    for coords, value in report.minima:
        _ext("local_min", coords, value)
    _ext("global_max", *report.global_max)
    _ext("global_min", *report.global_min)
    extrema_path = out / "extrema.csv"
    _write_csv(extrema_path, ["kind", "axis1", "axis2", "S_bits"], ext_rows)

    params = config_io.describe_run(run)
    params["resolution"] = args.resolution
    params["failures"] = len(emap.failures)
    config_io.write_manifest(out / "manifest.json", "sweep", params,
                             [map_path, extrema_path], started)
    return EXIT_OK


def _cmd_check(args):
    started = time.monotonic()
    run = _load(args)

    result = convergence_check(run.config, run.grid.with_resolution(args.resolution),
                               factor=args.factor)
    conv_ok = result.delta < args.convergence_tol
    print(f"convergence: S({args.resolution}) = {_fmt(result.S_coarse)}, "
          f"S({args.resolution * args.factor}) = {_fmt(result.S_fine)}, "
          f"|dS| = {_fmt(result.delta)} bits "
          f"[{'ok' if conv_ok else 'BREACH'} at {_fmt(args.convergence_tol)}]")

    oracle_grid = run.grid.with_resolution(args.oracle_size)
    kernel = build_kernel(run.config, oracle_grid)
    spectrum = schmidt_decompose(kernel, retained_count=4)
    oracle = oracle_reduced_density(kernel)
    count = min(len(spectrum.eigenvalues), len(oracle))
    gap = float(np.max(np.abs(spectrum.eigenvalues[:count] - oracle[:count])))
    oracle_ok = gap < args.oracle_tol
    print(f"oracle: max |lambda_svd - lambda_rho| = {_fmt(gap)} "
          f"on {args.oracle_size}x{args.oracle_size} "
          f"[{'ok' if oracle_ok else 'BREACH'} at {_fmt(args.oracle_tol)}]")

    if args.out is not None:
        out = _out_dir(args)
        params = config_io.describe_run(run)
        params.update({
            "S_coarse": result.S_coarse, "S_fine": result.S_fine,
            "delta_bits": result.delta, "oracle_gap": gap,
            "convergence_ok": conv_ok, "oracle_ok": oracle_ok,
        })
        config_io.write_manifest(out / "manifest.json", "check", params, [], started)
    return EXIT_OK if conv_ok and oracle_ok else EXIT_ERROR


def build_parser():
    parser = _Parser(prog="biphoton",
                     description="Schmidt analysis of multiplexed biphoton spectra")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--set", action="append", metavar="PATH=VALUE",
                       help="override a config parameter, e.g. ensembles[1].theta=4/3pi")
        if out_required:
            p.add_argument("--out", "-o", default=".", help="output directory")

    p = sub.add_parser("eval", help="print the amplitude at one (dw_s, dw_i)")
    common(p, out_required=False)
    p.add_argument("--ws", required=True, help="signal detuning, Gamma_3")
    p.add_argument("--wi", required=True, help="idler detuning, Gamma_3")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("decompose", help="write eigenvalues and mode functions")
    common(p)
    p.add_argument("--modes", type=int, default=64, help="modes retained in the outputs")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("entropy", help="print the entropy of entanglement in bits")
    common(p)
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("sweep", help="map entropy over the configured axes")
    common(p)
    p.add_argument("--resolution", type=int, default=512,
                   help="per-cell kernel points per axis")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel cells (default: BIPHOTON_WORKERS or all cores)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("check", help="grid convergence and decomposition oracle")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="PATH=VALUE")
    p.add_argument("--out", "-o", default=None)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--factor", type=int, default=2)
    p.add_argument("--oracle-size", type=int, default=128, dest="oracle_size")
    p.add_argument("--convergence-tol", type=float, default=CONVERGENCE_TOL_BITS,
                   dest="convergence_tol")
    p.add_argument("--oracle-tol", type=float, default=ORACLE_TOL, dest="oracle_tol")
    p.set_defaults(func=_cmd_check)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NullKernelError as exc:
        print(f"null kernel: {exc}", file=sys.stderr)
        return EXIT_NULL
    except BiphotonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
