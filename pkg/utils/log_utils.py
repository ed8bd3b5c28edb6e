"""
Logging setup shared by the target and benchmark entry points.
"""
import logging.config

from config import Config


def configure_logging(level: str | None = None, log_file: str | None = None):
    """Configures the root logger with a console handler and an optional rotating file."""
    level = (level or Config.LOG_LEVEL).upper()
    log_file = Config.LOG_FILE if log_file is None else log_file

    handlers = {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'default',
            'level': level,
        },
    }
    if log_file:
        handlers['file'] = {
            'class': 'logging.handlers.RotatingFileHandler',
            'formatter': 'default',
            'level': level,
            'filename': log_file,
            'maxBytes': 1024*1024*5, # 5 MB
            'backupCount': 5,
            'encoding': 'utf-8',
        }

    logging.config.dictConfig({
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'default': {
                'format': '[%(asctime)s] [%(levelname)-5s] [%(name)-20s] --- %(message)s',
                'datefmt': '%Y-%m-%d %H:%M:%S'
            },
        },
        'handlers': handlers,
        'root': {
            'handlers': list(handlers),
            'level': level,
        }
    })
