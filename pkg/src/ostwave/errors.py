"""Exception hierarchy shared by the numeric modules and the CLI."""


class OstwaveError(Exception):
    """Base class for every error raised by the package."""


class GridMismatch(OstwaveError):
    pass


class MeanNotZero(OstwaveError):
    """A mean-zero antiderivative was requested for a field with nonzero mean."""

    def __init__(self, mean, tol):
        super().__init__(f"field mean {abs(mean):.3e} exceeds tolerance {tol:.3e}")
        self.mean = mean
        self.tol = tol


class DegenerateStokes(OstwaveError):
    """gamma + 64 beta k^4 pi^4 vanishes: the second harmonic is resonant."""


class NoConvergence(OstwaveError):
    def __init__(self, iterations, last_residual):
        super().__init__(
            f"Newton iteration did not converge after {iterations} steps "
            f"(last residual {last_residual:.3e})"
        )
        self.iterations = iterations
        self.last_residual = last_residual


class SingularJacobian(OstwaveError):
    """The bordered profile Jacobian is numerically singular."""


class ContinuationStalled(OstwaveError):
    def __init__(self, step_index, last_good, message=""):
        super().__init__(
            f"continuation stalled at step {step_index}" + (f": {message}" if message else "")
        )
        self.step_index = step_index
        self.last_good = last_good


class BetaZero(OstwaveError):
    """No finite critical frequency exists when beta = 0."""


class BetaNonZero(OstwaveError):
    pass


class XiZeroDeflationFailed(OstwaveError):
    pass


class NormalizationViolated(OstwaveError):
    def __init__(self, gram):
        super().__init__(f"kernel basis is not biorthonormal, Gram matrix:\n{gram}")
        self.gram = gram


class WindowAmbiguous(OstwaveError):
    def __init__(self, xi, count):
        super().__init__(f"{count} eigenvalues inside the window at xi={xi:.6g}")
        self.xi = xi
        self.count = count


class WaveMismatch(OstwaveError):
    pass


class StiffIntegrationFailure(OstwaveError):
    pass


class CacheInvalid(OstwaveError):
    pass


class ConfigError(OstwaveError):
    pass
