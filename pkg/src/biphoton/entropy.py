"""Entropy of entanglement and the qudit-additivity estimate.

S = -sum_n lambda_n log2 lambda_n over the full computed spectrum, in bits.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .kernel import EnsembleShift, MultiplexConfig, build_kernel
from .schmidt import EIGENVALUE_FLOOR, schmidt_eigenvalues

# Eigenvalues this far below zero are numerical corruption, not round-off.
NEGATIVE_EIGENVALUE_TOLERANCE = -1e-12


@dataclass(frozen=True)
class EntropyResult:
    """Entropy in bits plus the truncation diagnostic of its spectrum."""

    S: float
    lambda_tail: float
    config_digest: str


@dataclass(frozen=True)
class AdditivityResult:
    """Multi-ensemble entropy against the qudit + single-ensemble estimate."""

    S_multi: float
    S_single: float
    S_d: float

    @property
    def deviation(self):
        return self.S_multi - (self.S_d + self.S_single)

    def __iter__(self):
        yield from (self.S_multi, self.S_single, self.S_d, self.deviation)


def entropy_from_eigenvalues(eigenvalues):
    """-sum lam log2 lam in bits, with 0 log 0 = 0.

    Values below the 1e-30 floor contribute exactly zero; values below
    -1e-12 indicate a corrupted spectrum and raise ValidationError.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.size and float(lam.min()) < NEGATIVE_EIGENVALUE_TOLERANCE:
        raise ValidationError(
            f"eigenvalue {lam.min():.3e} below {NEGATIVE_EIGENVALUE_TOLERANCE:.0e}; "
            "spectrum failed the numerical sanity check"
        )
    lam = lam[lam > EIGENVALUE_FLOOR]
    if lam.size == 0:
        return 0.0
    return float(-(lam * np.log2(lam)).sum())


def entropy_of_entanglement(spectrum):
    """Entropy of a SchmidtSpectrum over all of its computed eigenvalues."""
    return EntropyResult(
        S=entropy_from_eigenvalues(spectrum.eigenvalues),
        lambda_tail=spectrum.lambda_tail,
        config_digest=spectrum.source_digest,
    )


def qudit_entropy(n_mp):
    """log2(n_mp): entropy of a maximally entangled qudit pair of dimension n_mp."""
    if int(n_mp) != n_mp or n_mp < 1:
        raise ValidationError(f"n_mp must be an integer >= 1, got {n_mp!r}")
    return math.log2(n_mp)


def kernel_entropy(config, grid):
    """Build the kernel for config on grid and return S in bits.

    Propagates NullKernelError for cancelling configurations.
    """
    return entropy_from_eigenvalues(schmidt_eigenvalues(build_kernel(config, grid)))


def additivity_check(config, grid):
    """Compare S of a multiplexed config against log2(N) + single-ensemble S.

    The single-ensemble reference uses the same gamma3n and tau with all
    shifts zero, on the same grid.  Requires N_MP >= 2 and all delta_q = 0
    (the symmetric setting in which the estimate is stated).
    """
    if config.n_mp < 2:
        raise ValidationError("additivity_check needs at least two ensembles")
    if any(e.delta_q != 0.0 for e in config.ensembles):
        raise ValidationError("additivity_check requires all delta_q = 0")
    single = MultiplexConfig(ensembles=(EnsembleShift(),),
                             gamma3n=config.gamma3n, tau=config.tau)
    return AdditivityResult(
        S_multi=kernel_entropy(config, grid),
        S_single=kernel_entropy(single, grid),
        S_d=qudit_entropy(config.n_mp),
    )
