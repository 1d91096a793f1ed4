import logging
import sys
from typing import List, Optional, TextIO

PACKAGE = "maxidsim"
FMTSTRING = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def level_from_flags(verbose: bool = False, quiet: bool = False) -> int:
    """ Log level of the command line flags; --verbose wins over --quiet """
    if verbose:
        return logging.DEBUG
    if quiet:
        return logging.WARNING
    return logging.INFO


def get_logger(name: str, level=logging.INFO,
               stream: Optional[TextIO] = None) -> logging.Logger:
    """ Set the logger of module `name` to `level` with a single handler

    Calling it again replaces the handler, so repeated CLI invocations in
    one interpreter do not duplicate lines.

    Args:
        name: Module name, with or without the `maxidsim.` prefix.
        level: Any argument that logging.setLevel accepts.
        stream: Destination of the records, stdout by default.
    Returns:
        The logger requested
    """
    if name != PACKAGE and not name.startswith(PACKAGE + "."):
        name = f"{PACKAGE}.{name}"
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.handlers = []
    handler = logging.StreamHandler(sys.stdout if stream is None else stream)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(FMTSTRING))
    logger.addHandler(handler)
    if name == PACKAGE:
        # quadrature warnings are captured into py.warnings
        warnings_logger = logging.getLogger("py.warnings")
        warnings_logger.handlers = [handler]
        warnings_logger.setLevel(max(level, logging.WARNING))
    return logger


def available_loggers() -> List[str]:
    """ Get all available maxidsim loggers

    NOTE: Loggers are created on import, so call this after importing the
    modules of interest.

    Returns:
        Module names below the package, without the prefix.
    """
    existing = logging.root.manager.loggerDict.keys()
    return sorted(k.split('.', 1)[1] for k in existing
                  if k.startswith(PACKAGE + '.'))
