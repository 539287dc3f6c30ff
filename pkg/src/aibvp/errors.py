"""Exception types raised by the numerical kernels and the CLI."""

from __future__ import annotations

import numpy as np


class AIBVPError(Exception):
    """Base class for all package errors."""


class SingularMatrix(AIBVPError, np.linalg.LinAlgError):
    """A pivot fell below the singularity threshold."""


class NoConvergence(AIBVPError, np.linalg.LinAlgError):
    """The eigenvalue iteration did not converge."""


class MatrixOverflow(AIBVPError, OverflowError):
    """A matrix function produced non-finite entries."""


class LambdaInSpectrum(SingularMatrix):
    """The spectral parameter lies in the spectrum of the restricted operator."""


class ZeroInSpectrum(LambdaInSpectrum):
    """The restricted operator is not invertible."""


class LambdaZero(AIBVPError, ValueError):
    """Zero is never in the resolvent set of the block generator."""


class MissingFeedback(AIBVPError, ValueError):
    """The operation needs a feedback operator but the triple has none."""


class InvalidK(AIBVPError, ValueError):
    """Negative transport coefficient."""


class UnstableStep(AIBVPError, ValueError):
    """The explicit time step exceeds the RK4 stability limit."""


class ConfigError(AIBVPError, ValueError):
    """Scenario configuration failed to parse or validate."""
