from .logging import get_logger, available_loggers, level_from_flags
