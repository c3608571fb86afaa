"""
Error types for the laboratory
Every failure a computation can report, rooted at LabError
"""

from typing import Dict


class LabError(Exception):
    """Base class for all laboratory errors"""

    def to_record(self) -> Dict[str, str]:
        """Structured form for JSON error records"""
        return {'type': type(self).__name__, 'message': str(self)}


# Construction-time invariants
class InvalidGrid(LabError, ValueError):
    pass


class InvalidField(LabError, ValueError):
    pass


# field
class UnsupportedDescriptor(LabError):
    pass


class InsufficientDecay(LabError):
    pass


class InvalidExponent(LabError, ValueError):
    pass


class SpectralUnderresolution(LabError):
    pass


# filterbank
class NyquistOverflow(LabError):
    pass


class DegenerateRange(LabError):
    pass


class BandOutOfRange(LabError):
    pass


class SpectralLeakage(LabError):
    pass


# norms / fraclap / experiments
class ParameterOutOfRange(LabError, ValueError):
    pass


class CutoffExceedsHalfPeriod(LabError):
    pass


class SideMismatch(LabError):
    pass


class SkippedAll(LabError):
    pass


# cli
class ConfigError(LabError):
    pass
