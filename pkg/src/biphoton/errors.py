"""Exception types shared across the package.

The CLI maps these onto exit codes: validation and numerical failures
exit with 2, a physically empty (null) kernel exits with 3.
"""


class BiphotonError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(BiphotonError):
    """An input violates a documented invariant (bad range, count, field...)."""


class NullKernelError(BiphotonError):
    """The multiplexed amplitude cancels everywhere on the grid.

    Raised when the pre-normalization Frobenius norm falls below the
    dimensionless null tolerance; the state carries no spectral weight and
    entropy has no physical meaning there.
    """


class DecompositionError(BiphotonError):
    """The underlying singular value decomposition did not converge."""
