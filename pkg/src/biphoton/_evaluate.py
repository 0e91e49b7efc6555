"""Hot loops for sampling the multiplexed amplitude on a frequency grid.

Two interchangeable implementations live here: a numba-compiled one and a
pure-numpy one.  The active implementation is chosen once at import time:
numba is used when it imports cleanly and the environment variable
``BIPHOTON_DISABLE_NUMBA`` is unset (any of "1", "true", "yes", "on"
disables it).  Both paths sum ensemble terms in list order, so repeated
runs of either path are bit-identical; the two paths agree to float
round-off but not bitwise.

``benchmarks/kernel_benchmark.py`` times the two implementations against
each other.
"""

import os
import warnings

import numpy as np

try:
    import numba

    # Numba probes TBB first and warns when the system copy is too old; it
    # falls back to another threading layer on its own, so the warning is
    # noise for us.
    warnings.filterwarnings("ignore", message=".*TBB.*", category=numba.NumbaWarning)
except ImportError:
    numba = None


def _env_flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


def amplitude_matrix_numpy(s_nodes, i_nodes, dp, dq, theta, gamma3n, tau):
    """Sample sum_m e^{i theta_m} G_m(s+i) / (gamma/2 - i(i + dp_m)) on the grid.

    Returns ``(matrix, peak)`` where ``matrix[j, k]`` is the amplitude at
    (s_nodes[j], i_nodes[k]) and ``peak`` is the largest single-term
    magnitude over the grid (used for the null-kernel tolerance).
    """
    s_col = s_nodes[:, None]
    i_row = i_nodes[None, :]
    gauss_coef = tau * tau / 8.0
    half_gamma = 0.5 * gamma3n
    out = np.zeros((s_nodes.size, i_nodes.size), dtype=np.complex128)
    peak = 0.0
    for m in range(dp.size):
        term = np.exp(1j * theta[m]) * np.exp(-gauss_coef * (s_col + i_row + dq[m]) ** 2)
        term = term / (half_gamma - 1j * (i_row + dp[m]))
        peak = max(peak, float(np.abs(term).max()))
        out += term
    return out, peak


if numba is not None:

    @numba.njit(parallel=True, cache=True)
    def _amplitude_matrix_jit(s_nodes, i_nodes, dp, dq, theta, gamma3n, tau):
        n_s = s_nodes.size
        n_i = i_nodes.size
        n_mp = dp.size
        gauss_coef = tau * tau / 8.0
        half_gamma = 0.5 * gamma3n
        phases = np.cos(theta) + 1j * np.sin(theta)
        out = np.empty((n_s, n_i), dtype=np.complex128)
        row_peak = np.zeros(n_s)
        for j in numba.prange(n_s):
            s = s_nodes[j]
            peak = 0.0
            for k in range(n_i):
                w = i_nodes[k]
                acc = 0.0 + 0.0j
                for m in range(n_mp):
                    gauss = np.exp(-gauss_coef * (s + w + dq[m]) ** 2)
                    term = phases[m] * gauss / complex(half_gamma, -(w + dp[m]))
                    acc += term
                    mag = abs(term)
                    if mag > peak:
                        peak = mag
                out[j, k] = acc
            row_peak[j] = peak
        return out, row_peak.max()

    def amplitude_matrix_numba(s_nodes, i_nodes, dp, dq, theta, gamma3n, tau):
        matrix, peak = _amplitude_matrix_jit(s_nodes, i_nodes, dp, dq, theta, gamma3n, tau)
        return matrix, float(peak)

else:
    amplitude_matrix_numba = None


USING_NUMBA = numba is not None and not _env_flag("BIPHOTON_DISABLE_NUMBA")

if USING_NUMBA:
    amplitude_matrix = amplitude_matrix_numba
else:
    amplitude_matrix = amplitude_matrix_numpy
