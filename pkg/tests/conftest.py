import numpy as np
import pytest

from biphoton import EnsembleShift, MultiplexConfig, build_grid, preset


@pytest.fixture(scope="session")
def baseline_config():
    return MultiplexConfig(ensembles=(EnsembleShift(),), gamma3n=5.0, tau=0.25)


@pytest.fixture(scope="session")
def grid64():
    return build_grid((-300, 300), (-300, 300), 64, 64)


@pytest.fixture(scope="session")
def grid128():
    return build_grid((-300, 300), (-300, 300), 128, 128)


@pytest.fixture(scope="session")
def grid256():
    return build_grid((-300, 300), (-300, 300), 256, 256)


@pytest.fixture(scope="session")
def grid512():
    return build_grid((-300, 300), (-300, 300), 512, 512)


def two_symmetric(delta_p1, theta2):
    return preset("two-symmetric").configure(delta_p1=delta_p1, theta2=theta2)


def three_symmetric(delta_p1, theta1, theta2):
    return preset("three-symmetric").configure(delta_p1=delta_p1, theta1=theta1,
                                               theta2=theta2)


def count_density_peaks(density, floor_fraction=0.01, tie_rel=1e-9):
    """Interior local maxima of a sampled density, above a prominence floor.

    Samples equal within tie_rel of the global maximum form one plateau
    (a peak centered between two nodes straddles them with equal values up
    to round-off); a plateau counts as one peak when both flanks are lower.
    Peaks below floor_fraction of the maximum are ignored.
    """
    d = np.asarray(density, dtype=np.float64)
    peak = d.max()
    floor = floor_fraction * peak
    tie = tie_rel * peak
    count = 0
    k = 0
    while k < d.size:
        j = k
        while j + 1 < d.size and abs(d[j + 1] - d[k]) <= tie:
            j += 1
        interior = k > 0 and j + 1 < d.size
        if interior and d[k] > floor and d[k] > d[k - 1] + tie and d[k] > d[j + 1] + tie:
            count += 1
        k = j + 1
    return count


def random_config(rng, n_max=3, dp_max=60.0, with_dq=False):
    n = int(rng.integers(1, n_max + 1))
    ensembles = tuple(
        EnsembleShift(
            delta_p=float(rng.uniform(-dp_max, dp_max)),
            delta_q=float(rng.uniform(-dp_max, dp_max)) if with_dq else 0.0,
            theta=float(rng.uniform(0.0, 2.0 * np.pi)),
        )
        for _ in range(n)
    )
    return MultiplexConfig(ensembles=ensembles, gamma3n=5.0, tau=0.25)
