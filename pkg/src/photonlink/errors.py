"""Exception hierarchy and process exit codes.

Each error class maps to a distinct CLI exit code so batch drivers can
distinguish configuration mistakes from physics infeasibility and from
numerical failures.
"""


class PhotonLinkError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(PhotonLinkError):
    """Invalid run configuration (bad units, missing fields, Gamma >= kappa...)."""

    exit_code = 2


class FeasibilityError(PhotonLinkError):
    """Target mode violates |f|^2 <= kappa (1 - F) somewhere.

    Carries the violating time (None when the bound fails asymptotically)
    and the limiting flux ratio.
    """

    exit_code = 3

    def __init__(self, message, violating_time=None, ratio=None):
        super().__init__(message)
        self.violating_time = violating_time
        self.ratio = ratio


class WindowError(PhotonLinkError):
    """Synthesis window captures less of the envelope than required."""

    exit_code = 4


class IntegratorError(PhotonLinkError):
    """Step-size instability or incompatible integration grids."""

    exit_code = 5


class FitError(PhotonLinkError):
    """Least-squares fit did not converge; carries the best iterate found."""

    exit_code = 6

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class GridMismatchError(PhotonLinkError):
    """Sampled inputs do not share a common time grid."""

    exit_code = 7


class ComputationError(PhotonLinkError):
    """Internal numerical breakdown (e.g. loss of orthogonality)."""

    exit_code = 8
