"""Exception hierarchy shared across the package."""


class FreqPerfError(Exception):
    """Base class for all errors raised by freqperf."""


class GraphError(FreqPerfError):
    """Invalid network topology (size, weights, duplicates, connectivity)."""


class ParameterError(FreqPerfError):
    """Invalid physical or controller parameters."""


class AssemblyError(FreqPerfError):
    """Closed-loop model could not be assembled (e.g. not Hurwitz)."""


class StabilityError(FreqPerfError):
    """State matrix is not Hurwitz where stability is required."""


class ConvergenceError(FreqPerfError):
    """Numerical solve finished but failed its residual tolerance."""


class VerificationError(FreqPerfError):
    """A closed-form construction failed its verification check."""


class SimulationError(FreqPerfError):
    """Time-domain integration failed (step size, divergence)."""


class ConfigError(FreqPerfError):
    """Invalid experiment configuration file."""
