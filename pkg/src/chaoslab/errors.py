"""Exception hierarchy shared across the package.

Physics-precondition failures and numerical-convergence failures are kept
distinct so the command-line runner can map them to different exit codes.
"""


class ChaosLabError(Exception):
    """Base class for all package-specific errors."""


class PhysicsPreconditionError(ChaosLabError):
    """A physical precondition is violated (bad parameters, domain, truncation)."""


class TruncationError(PhysicsPreconditionError):
    """The Fock-space cutoff is too small to represent the requested state."""


class BlochDomainError(PhysicsPreconditionError):
    """Qubit phase-space coordinates left the disk q1^2 + p1^2 <= 2."""


class GridCoverageError(PhysicsPreconditionError):
    """A phase-space grid fails to cover the support of the state."""


class NumericalConvergenceError(ChaosLabError):
    """An integrator or adaptive refinement failed to reach its tolerance."""
