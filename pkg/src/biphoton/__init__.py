"""Joint spectral amplitudes of multiplexed biphoton sources, their Schmidt
spectra, and entanglement-entropy maps over shift/phase parameter space."""

from ._evaluate import USING_NUMBA
from .entropy import (
    AdditivityResult,
    EntropyResult,
    additivity_check,
    entropy_from_eigenvalues,
    entropy_of_entanglement,
    kernel_entropy,
    qudit_entropy,
)
from .errors import BiphotonError, DecompositionError, NullKernelError, ValidationError
from .kernel import (
    DiscretizedKernel,
    EnsembleShift,
    FrequencyGrid,
    MultiplexConfig,
    build_grid,
    build_kernel,
    default_grid,
    eval_spectral_amplitude,
)
from .schmidt import (
    DegeneracyReport,
    SchmidtSpectrum,
    detect_degeneracy,
    mode_density,
    oracle_reduced_density,
    schmidt_decompose,
    schmidt_eigenvalues,
)
from .sweep import (
    ConvergenceResult,
    EntropyMap,
    ExtremaReport,
    Preset,
    SweepAxis,
    convergence_check,
    find_extrema,
    preset,
    set_config_param,
    sweep_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "AdditivityResult",
    "BiphotonError",
    "ConvergenceResult",
    "DecompositionError",
    "DegeneracyReport",
    "DiscretizedKernel",
    "EnsembleShift",
    "EntropyMap",
    "EntropyResult",
    "ExtremaReport",
    "FrequencyGrid",
    "MultiplexConfig",
    "NullKernelError",
    "Preset",
    "SchmidtSpectrum",
    "SweepAxis",
    "USING_NUMBA",
    "ValidationError",
    "additivity_check",
    "build_grid",
    "build_kernel",
    "convergence_check",
    "default_grid",
    "detect_degeneracy",
    "entropy_from_eigenvalues",
    "entropy_of_entanglement",
    "eval_spectral_amplitude",
    "find_extrema",
    "kernel_entropy",
    "mode_density",
    "oracle_reduced_density",
    "preset",
    "qudit_entropy",
    "schmidt_decompose",
    "schmidt_eigenvalues",
    "set_config_param",
    "sweep_entropy",
]
