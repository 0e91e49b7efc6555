"""Multiplexed two-photon spectral amplitude and its grid discretization.

All frequencies are in units of the idler linewidth Gamma_3, times in
Gamma_3^{-1}.  Each ensemble contributes one term

    e^{i theta_m} * exp(-(dw_s + dw_i + dq_m)^2 tau^2 / 8)
                  / (gamma3N/2 - i (dw_i + dp_m))

and the discretized kernel is the quadrature-weighted sample matrix of the
sum, L2-normalized after truncation to the grid window.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from ._evaluate import amplitude_matrix
from .errors import NullKernelError, ValidationError

TWO_PI = 2.0 * math.pi

# Pre-normalization norms below NULL_TOLERANCE * (single-term peak) * ||1||
# signal a physically empty state.
NULL_TOLERANCE = 1e-10

DEFAULT_GAMMA3N = 5.0
DEFAULT_TAU = 0.25
DEFAULT_WINDOW = 300.0
DEFAULT_RESOLUTION = 1024

GRID_SCHEMES = ("midpoint", "gauss-legendre")


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class EnsembleShift:
    """Frequency and phase tags of one multiplexed ensemble.

    delta_p shifts the idler only, delta_q shifts signal and idler
    jointly (both in Gamma_3); theta is the phase in radians, stored
    reduced to [0, 2pi).
    """

    delta_p: float = 0.0
    delta_q: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "delta_p", _require_finite("delta_p", self.delta_p))
        object.__setattr__(self, "delta_q", _require_finite("delta_q", self.delta_q))
        theta = _require_finite("theta", self.theta) % TWO_PI
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class MultiplexConfig:
    """Full physical configuration: ensemble list, decay constant, pulse width."""

    ensembles: tuple
    gamma3n: float = DEFAULT_GAMMA3N
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        ensembles = tuple(self.ensembles)
        if len(ensembles) < 1:
            raise ValidationError("config needs at least one ensemble")
        for e in ensembles:
            if not isinstance(e, EnsembleShift):
                raise ValidationError(f"ensembles must be EnsembleShift, got {type(e).__name__}")
        object.__setattr__(self, "ensembles", ensembles)
        if not (math.isfinite(self.gamma3n) and self.gamma3n > 0):
            raise ValidationError(f"gamma3n must be > 0, got {self.gamma3n!r}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValidationError(f"tau must be > 0, got {self.tau!r}")

    @property
    def n_mp(self):
        return len(self.ensembles)

    def shift_arrays(self):
        """Ensemble parameters as (delta_p, delta_q, theta) float arrays."""
        dp = np.array([e.delta_p for e in self.ensembles], dtype=np.float64)
        dq = np.array([e.delta_q for e in self.ensembles], dtype=np.float64)
        theta = np.array([e.theta for e in self.ensembles], dtype=np.float64)
        return dp, dq, theta

    def digest(self):
        text = f"{self.gamma3n!r};{self.tau!r};" + ";".join(
            f"{e.delta_p!r},{e.delta_q!r},{e.theta!r}" for e in self.ensembles
        )
        return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Quadrature discretization of the (dw_s, dw_i) rectangle.

    Nodes are strictly increasing, weights positive, and each axis's
    weights sum to the axis length (checked at build time).
    """

    s_range: tuple
    i_range: tuple
    scheme: str
    panels: int
    s_nodes: np.ndarray = field(repr=False)
    s_weights: np.ndarray = field(repr=False)
    i_nodes: np.ndarray = field(repr=False)
    i_weights: np.ndarray = field(repr=False)

    @property
    def n_s(self):
        return self.s_nodes.size

    @property
    def n_i(self):
        return self.i_nodes.size

    def digest(self):
        text = (
            f"{self.s_range!r};{self.i_range!r};{self.n_s};{self.n_i};"
            f"{self.scheme};{self.panels}"
        )
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    def with_resolution(self, n_s, n_i=None):
        """Same window and scheme at a different point count."""
        return build_grid(self.s_range, self.i_range, n_s, n_i if n_i is not None else n_s,
                          scheme=self.scheme, panels=self.panels)


def _midpoint_axis(lo, hi, n):
    h = (hi - lo) / n
    nodes = lo + h * (np.arange(n, dtype=np.float64) + 0.5)
    return nodes, np.full(n, h)


def _gauss_legendre_axis(lo, hi, n, panels):
    if n % panels != 0:
        raise ValidationError(
            f"gauss-legendre needs the point count ({n}) divisible by the panel count ({panels})"
        )
    per_panel = n // panels
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(lo, hi, panels + 1)
    nodes = np.empty(n)
    weights = np.empty(n)
    for p in range(panels):
        a, b = edges[p], edges[p + 1]
        half = 0.5 * (b - a)
        nodes[p * per_panel:(p + 1) * per_panel] = 0.5 * (a + b) + half * x
        weights[p * per_panel:(p + 1) * per_panel] = half * w
    return nodes, weights


def build_grid(s_range, i_range, n_s, n_i, scheme="midpoint", panels=1):
    """Build a FrequencyGrid over the given windows.

    scheme is "midpoint" (uniform midpoint rule, equal weights) or
    "gauss-legendre" (composite rule with `panels` equal panels per axis).
    Raises ValidationError for degenerate ranges or counts below 2.
    """
    for name, (lo, hi) in (("s_range", tuple(s_range)), ("i_range", tuple(i_range))):
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise ValidationError(f"invalid range: {name} must satisfy min < max, got ({lo}, {hi})")
    for name, n in (("n_s", n_s), ("n_i", n_i)):
        if int(n) != n or n < 2:
            raise ValidationError(f"invalid count: {name} must be an integer >= 2, got {n!r}")
    if scheme not in GRID_SCHEMES:
        raise ValidationError(f"unknown quadrature scheme {scheme!r}, expected one of {GRID_SCHEMES}")
    if int(panels) != panels or panels < 1:
        raise ValidationError(f"panels must be a positive integer, got {panels!r}")

    axis = _midpoint_axis if scheme == "midpoint" else _gauss_legendre_axis
    if scheme == "midpoint":
        s_nodes, s_weights = axis(*s_range, int(n_s))
        i_nodes, i_weights = axis(*i_range, int(n_i))
    else:
        s_nodes, s_weights = axis(*s_range, int(n_s), int(panels))
        i_nodes, i_weights = axis(*i_range, int(n_i), int(panels))

    for (lo, hi), w in ((tuple(s_range), s_weights), (tuple(i_range), i_weights)):
        length = hi - lo
        if abs(w.sum() - length) > 1e-12 * length:
            raise ValidationError("quadrature weights do not sum to the axis length")

    return FrequencyGrid(
        s_range=(float(s_range[0]), float(s_range[1])),
        i_range=(float(i_range[0]), float(i_range[1])),
        scheme=scheme,
        panels=int(panels),
        s_nodes=s_nodes,
        s_weights=s_weights,
        i_nodes=i_nodes,
        i_weights=i_weights,
    )


def default_grid(resolution=DEFAULT_RESOLUTION, window=DEFAULT_WINDOW, scheme="midpoint", panels=1):
    """The +-window (default +-300 Gamma_3) square grid used throughout."""
    return build_grid((-window, window), (-window, window), resolution, resolution,
                      scheme=scheme, panels=panels)


@dataclass(frozen=True, eq=False)
class DiscretizedKernel:
    """Unit-Frobenius quadrature-weighted sample matrix of the amplitude.

    matrix[j, k] = sqrt(w_s[j]) f(s_j, i_k) sqrt(w_i[k]) / norm_constant,
    where norm_constant is the pre-normalization Frobenius norm.  config
    is None for synthetic kernels assembled directly in tests.
    """

    matrix: np.ndarray
    norm_constant: float
    grid: FrequencyGrid
    config: MultiplexConfig | None = None

    def digest(self):
        if self.config is not None:
            base = self.config.digest() + self.grid.digest()
        else:
            base = hashlib.sha256(self.matrix.tobytes()).hexdigest() + self.grid.digest()
        return hashlib.sha256(base.encode()).hexdigest()[:12]


def eval_spectral_amplitude(config, dws, dwi):
    """Unnormalized multiplexed amplitude at (dws, dwi), exact sum over ensembles.

    Accepts scalars or broadcastable arrays; scalar input returns a complex.
    """
    dws_arr = np.asarray(dws, dtype=np.float64)
    dwi_arr = np.asarray(dwi, dtype=np.float64)
    gauss_coef = config.tau * config.tau / 8.0
    half_gamma = 0.5 * config.gamma3n
    out = np.zeros(np.broadcast(dws_arr, dwi_arr).shape, dtype=np.complex128)
    for e in config.ensembles:
        gauss = np.exp(-gauss_coef * (dws_arr + dwi_arr + e.delta_q) ** 2)
        out = out + np.exp(1j * e.theta) * gauss / (half_gamma - 1j * (dwi_arr + e.delta_p))
    if out.shape == ():
        return complex(out)
    return out


def build_kernel(config, grid):
    """Discretize the multiplexed amplitude into a unit-norm kernel matrix.

    Raises NullKernelError when the ensembles cancel: the pre-normalization
    norm is compared against NULL_TOLERANCE times the largest single-term
    magnitude times the L2 norm of the constant function 1 on the window,
    which makes the threshold dimensionless and resolution-independent.
    """
    dp, dq, theta = config.shift_arrays()
    raw, peak = amplitude_matrix(grid.s_nodes, grid.i_nodes, dp, dq, theta,
                                 config.gamma3n, config.tau)
    weighted = raw * np.sqrt(grid.s_weights)[:, None] * np.sqrt(grid.i_weights)[None, :]
    norm = float(np.linalg.norm(weighted))
    null_floor = NULL_TOLERANCE * peak * math.sqrt(grid.s_weights.sum() * grid.i_weights.sum())
    if norm <= null_floor:
        raise NullKernelError(
            f"spectral function is null on the grid (norm {norm:.3e} <= floor {null_floor:.3e}); "
            "the multiplexed terms cancel and the state carries no weight"
        )
    return DiscretizedKernel(matrix=weighted / norm, norm_constant=norm,
                             grid=grid, config=config)
