# errors.py

# --- Custom Exceptions ---
class PdaeError(Exception):
    """Base class for all solver and harness errors."""
    pass

class ConfigError(PdaeError):
    """Raised when a run configuration is missing, malformed or out of range."""
    pass

class InputError(PdaeError):
    """Raised when input data is unusable (non-finite values, bad CSV)."""
    pass

class DimensionError(PdaeError):
    """Raised when two fields or operators live on different grids."""
    pass

class DomainError(PdaeError):
    """Raised when an argument lies outside its admissible range."""
    pass

class SizeError(DomainError):
    """Raised when a grid is too coarse for the requested operator."""
    pass

class NumericalError(PdaeError):
    """Raised when a factorization or eigensolve fails."""
    pass

class StepOverflowError(NumericalError):
    """Raised when a time step produces non-finite values."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t

class PicardNonContractionError(NumericalError):
    """Raised when the successive approximation hits its iteration cap."""

    def __init__(self, message, defects=None):
        super().__init__(message)
        self.defects = list(defects or [])
