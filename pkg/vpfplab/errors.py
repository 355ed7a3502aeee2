"""
Exceptions raised by vpfplab

Every exception derives from :class:`VpfpError` and additionally from the
builtin exception type a caller would naturally catch, so that
``except ValueError`` keeps working for validation problems
"""


class VpfpError(Exception):
    """
    Base class of all vpfplab exceptions
    """


class SingularKernelError(VpfpError, ZeroDivisionError):
    """
    The unregularized Coulomb kernel was evaluated at the origin
    """


class QuadratureError(VpfpError, ArithmeticError):
    """
    A quadrature did not reach its tolerance

    :param message:  what was being integrated
    :param achieved: the error estimate the quadrature did reach
    """

    def __init__(self, message, achieved):
        super().__init__("{} (achieved error estimate {:.3e})".format(
            message, achieved))
        self.achieved = achieved


class IntegrationBlowUp(VpfpError, FloatingPointError):
    """
    A time step produced non-finite positions or velocities

    :param particle: index of the first offending particle
    :param step:     index of the step that failed
    """

    def __init__(self, particle, step):
        super().__init__(
            "non-finite state for particle {} at step {}".format(
                particle, step))
        self.particle = particle
        self.step = step


class DimensionMismatch(VpfpError, ValueError):
    """
    Two states or arrays that must agree in shape do not
    """


class UnbalancedTransportError(VpfpError, ValueError):
    """
    Wasserstein distances are only computed between equal-count clouds
    """


class DegenerateDataError(VpfpError, ValueError):
    """
    A power-law fit was asked to work on zero or non-positive data
    """


class SweepConfigError(VpfpError, ValueError):
    """
    A sweep configuration violates a precondition
    """


class ConfigParseError(VpfpError, ValueError):
    """
    A config document is not syntactically valid

    :param message: parser message
    :param line:    1-based line number
    :param column:  1-based column number
    """

    def __init__(self, message, line, column=1):
        super().__init__("line {}, column {}: {}".format(
            line, column, message))
        self.line = line
        self.column = column


class ConfigError(VpfpError, ValueError):
    """
    A config value fails validation

    :param key_path: dotted path of the offending key, like ``kernel.delta``
    :param value:    the offending value
    :param message:  what is wrong with it
    """

    def __init__(self, key_path, value, message):
        super().__init__("{} = {!r}: {}".format(key_path, value, message))
        self.key_path = key_path
        self.value = value
