"""
Error hierarchy for the synthesis pipeline.

Each error carries the process exit code the management commands map it to:
1 for invalid input, 2 for solver convergence failures, 3 for stability
failures.
"""


class HyperLQError(Exception):
    """Base class for every error raised by the core library."""
    exit_code = 1

    def __str__(self):
        message = super().__str__()
        return f"{type(self).__name__}: {message}" if message else type(self).__name__


# ===== NUMERICS =====
class SingularMatrix(HyperLQError):
    pass


class NoConvergence(HyperLQError):
    exit_code = 2


class NotPositiveDefinite(HyperLQError):
    pass


class UnstableMatrix(HyperLQError):
    exit_code = 3


# ===== MODEL =====
class SingularK(SingularMatrix):
    pass


class SingularQ(SingularMatrix):
    pass


class NonPositiveSpeed(HyperLQError):
    pass


class DimensionMismatch(HyperLQError):
    pass


class OutOfDomain(HyperLQError):
    pass


class ZeroOrderTermPresent(HyperLQError):
    """Raised when a system with M != 0 is reduced without q_transform."""


class ConfigError(HyperLQError):
    pass


# ===== FREQUENCY / PDE =====
class PoleHit(SingularMatrix):
    pass


class OverflowGuard(HyperLQError):
    pass
