"""Exception types shared across the package."""


class JacscatError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(JacscatError):
    """Malformed input file or parameter set."""


class GridMismatch(JacscatError):
    """Operands live on different circle grids."""


class SzegoViolation(JacscatError):
    """log w is not numerically integrable on the circle."""


class PoleHit(JacscatError):
    """A continued-fraction denominator vanished (truncated-block eigenvalue)."""


class OffIntervalSpectrum(JacscatError):
    """The operator has spectrum outside [-2, 2]; outside the model's hypotheses."""


class DegenerateFreeSolve(JacscatError):
    """The pointwise 2x2 free-region solve degenerated at too many nodes."""


class ConsistencyFailure(JacscatError):
    """Two independent pipelines disagree beyond tolerance."""

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


class SymbolAsymmetry(JacscatError):
    """Symbol coefficients are not real; the conjugation symmetry fails."""


class NoConvergence(JacscatError):
    """The regularization ladder did not stabilize."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class KernelFailure(JacscatError):
    """A reproducing-kernel solve failed to converge."""


class GramFailure(JacscatError):
    """The basis Gram matrix deviates too far from identity."""


class SmallDenominator(JacscatError):
    """Division by the transmission coefficient hit flagged nodes."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class EmptyIntersection(JacscatError):
    """An averaging interval misses the spectral set entirely."""


class PowerIterationStall(JacscatError):
    """Power iteration failed to stagnate; best estimate attached."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
