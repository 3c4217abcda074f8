"""Exception types raised across the package."""


class TwistLabError(Exception):
    pass


class CentralElement(TwistLabError, ValueError):
    """The element is (numerically) +I or -I, where the variation is undefined."""


class ArityError(TwistLabError, ValueError):
    pass


class WordSyntaxError(TwistLabError, SyntaxError):
    pass


class DomainError(TwistLabError, ValueError):
    """A twist name does not belong to the requested surface."""


class DegenerateEllipse(TwistLabError, ValueError):
    """The conserved trace is at +-2 or a required denominator vanishes."""


class OrbitBlowUp(TwistLabError, RuntimeError):
    pass


class QuadratureUnresolved(TwistLabError, ArithmeticError):
    pass


class DivergentSeries(TwistLabError, ValueError):
    pass


class WindowTooTight(TwistLabError, RuntimeError):
    pass


class ConfigError(TwistLabError, ValueError):
    pass
