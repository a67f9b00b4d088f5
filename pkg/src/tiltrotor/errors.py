"""Exception types shared across the package."""


class TiltrotorError(Exception):
    """Base class for all package-specific errors."""


class RepresentationSingular(TiltrotorError):
    """Pitch too close to +/-pi/2 for the Euler-rate map to be evaluated."""

    def __init__(self, theta: float):
        super().__init__(f"Euler representation invalid near |theta|=pi/2 (theta={theta:.6f} rad)")
        self.theta = theta


class NoRoot(TiltrotorError):
    """The branch solver found no root below tolerance."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


class Degenerate(TiltrotorError):
    """Branch solutions could not be separated into a blue/red pair."""

    def __init__(self, message: str, roots):
        super().__init__(message)
        self.roots = list(roots)


class ContinuationBreak(TiltrotorError):
    """Branch tracking jumped too far between adjacent samples."""

    def __init__(self, location, jump: float):
        super().__init__(
            f"branch continuation jumped {jump:.3f} rad near (alpha1, alpha2)="
            f"({location[0]:.4f}, {location[1]:.4f})"
        )
        self.location = tuple(location)
        self.jump = jump


class AbortedSingular(TiltrotorError):
    """Closed-loop run stopped on a singular decoupling matrix.

    Carries the abort time, the last state, and the partial log collected
    up to the abort.
    """

    def __init__(self, time: float, state, log=None):
        super().__init__(f"tracking aborted on singular decoupling matrix at t={time:.3f} s")
        self.time = time
        self.state = state
        self.log = log
