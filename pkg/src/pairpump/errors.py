"""Exception hierarchy shared by all modules."""


class PairPumpError(Exception):
    """Base class for all errors raised by :mod:`pairpump`."""


class BandEdgeError(PairPumpError, ValueError):
    """An integrand or closed form was requested exactly on a band edge with no broadening."""


class QuadratureError(PairPumpError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance.

    Attributes
    ----------
    estimate : float
        The achieved (absolute) error estimate.
    """

    def __init__(self, message, estimate=float("nan")):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


class ResonanceError(PairPumpError, ArithmeticError):
    """A T-matrix or kernel denominator vanishes (bound-state pole at real energy).

    Attributes
    ----------
    location : dict
        Where the pole was met, e.g. ``{"E": 4.5, "u_plus": 3.1}``.
    """

    def __init__(self, message, location=None):
        self.location = dict(location or {})
        where = ", ".join(f"{k}={v:.6g}" for k, v in self.location.items())
        super().__init__(f"{message} [{where}]" if where else message)


class ConfigError(PairPumpError, ValueError):
    """Malformed configuration file or invalid flag combination."""


class NormDriftError(PairPumpError, ArithmeticError):
    """Time evolution lost unitarity beyond tolerance."""
