"""Exception types shared across the lab.

Every failure mode that callers are expected to catch gets its own class so
batch drivers can map them onto exit codes without string matching.
"""


class ContactLabError(Exception):
    """Base class for all lab-specific errors."""


class GridMismatch(ContactLabError):
    """Two grid functions live on different grids."""


class VelocityOutOfRange(ContactLabError):
    """Requested velocity is not attainable as dH/dp within the search box."""


class CflViolation(ContactLabError):
    """Explicit time step violates the monotonicity (CFL) restriction."""


class NotConverged(ContactLabError):
    """Iterative solver exhausted its budget before reaching tolerance."""


class NotDiscountedForm(ContactLabError):
    """Solver requires a Hamiltonian with constant positive du-derivative."""


class BracketInvalid(ContactLabError):
    """Bisection bracket does not straddle a sign change."""


class NonFinite(ContactLabError):
    """A state or value became NaN or infinite during integration."""


class EmptyCloud(ContactLabError):
    """Hausdorff distance requested against an empty jet cloud."""


class EmptySlab(ContactLabError):
    """No sample of the compact slab satisfied the membership bound."""


class InsufficientData(ContactLabError):
    """Too few usable points in the requested fit window."""


class NonPositiveValues(ContactLabError):
    """Log-scale fit requested on data containing non-positive values."""


class ConfigError(ContactLabError):
    """Experiment configuration file is missing, malformed, or inconsistent."""
