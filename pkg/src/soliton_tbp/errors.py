"""Exception and warning types shared across the package."""


class SolitonError(Exception):
    """Base class for numeric/domain errors raised by this package."""


class DegenerateSpectrumError(SolitonError):
    """Eigenvalues coincide (or nearly coincide) and division terms blow up."""


class DegenerateRootError(SolitonError):
    """A located root of a(lambda) has vanishing derivative a'(lambda)."""


class MeasurementUnreliableError(SolitonError):
    """Duration/bandwidth measurement invalidated by grid leakage or aliasing."""


class SpectrumFileError(SolitonError):
    """Spectrum file failed schema validation."""


class SolitonWarning(UserWarning):
    """Base class for non-fatal diagnostics."""


class GridTooNarrowWarning(SolitonWarning):
    """Synthesized signal carries non-negligible magnitude at the grid edges."""


class AliasingWarning(SolitonWarning):
    """Spectral content near the Nyquist edge exceeds the safe threshold."""
