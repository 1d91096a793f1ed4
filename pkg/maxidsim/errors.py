"""
Exceptions raised by maxidsim

Every error subclasses the builtin that would otherwise be raised, so
callers catching ``ValueError`` or ``RuntimeError`` keep working.
"""


class DomainError(ValueError):
    """ A parameter lies outside its mathematical domain """


class UsageError(ValueError):
    """ The API or the command line was used incorrectly """


class EnvelopeViolationError(RuntimeError):
    """ A rejection envelope does not dominate its target density """


class TerminationCapError(RuntimeError):
    """ A band or slice loop exceeded its configured cap """


class NumericError(ArithmeticError):
    """ Quadrature or root finding did not converge """
