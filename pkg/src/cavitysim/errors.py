"""Exception types shared across the package."""


class CavitySimError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(CavitySimError, ValueError):
    """Space or operator dimensions outside the supported range."""


class LabelOutOfRangeError(CavitySimError, IndexError):
    """Atom level or photon number label outside the space."""


class IncompatibleSpaceError(CavitySimError, ValueError):
    """Two objects live on different Hilbert spaces."""


class InvalidBipartitionError(CavitySimError, ValueError):
    """Partial-trace keep-set is empty, full, or names unknown subsystems."""


class NormalizationError(CavitySimError, ValueError):
    """State norm deviates too far from 1 for the requested operation."""


class ModelMismatchError(CavitySimError, ValueError):
    """Hamiltonian model applied to a space with the wrong atom level count."""


class InvalidHamiltonianError(CavitySimError, ValueError):
    """Operator fails the Hermiticity requirement of the propagator."""


class NoDynamicsError(CavitySimError, ValueError):
    """Requested Jaynes-Cummings sector has no coupled partner state."""


class ImpossiblePostSelectionError(CavitySimError, RuntimeError):
    """Post-selected detection branch has (numerically) zero probability."""


class InvalidTimingError(CavitySimError, ValueError):
    """Protocol timing parameter violates its oddness/positivity constraint."""


class IntegratorConfigError(CavitySimError, ValueError):
    """Damped-evolution step size or unit configuration is invalid."""


class InvalidProtocolError(CavitySimError, ValueError):
    """Protocol name, control level, or target sector is not supported."""


class ScheduleFormatError(CavitySimError, ValueError):
    """Schedule document does not match the documented schema."""
