import logging
from logging.handlers import RotatingFileHandler

from tqdm import tqdm

from app.config import config

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class TqdmHandler(logging.StreamHandler):
    """Console handler that writes through tqdm so progress bars stay on one line."""

    def emit(self, record: logging.LogRecord):
        try:
            tqdm.write(self.format(record), file=self.stream)
            self.flush()
        except Exception:
            self.handleError(record)


def setup_logger(name: str = "lorentz_lab", log_file: str = None) -> logging.Logger:
    logger = logging.getLogger(name)
    level = logging.DEBUG if config.DEBUG else logging.INFO
    logger.setLevel(level)
    if logger.handlers:
        return logger

    formatter = logging.Formatter(LOG_FORMAT)

    # Console goes to stderr; stdout carries the command summaries
    console_handler = TqdmHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)

    file_handler = RotatingFileHandler(
        log_file or config.LOG_FILE,
        maxBytes=10 * 1024 * 1024,
        backupCount=5,
        encoding="utf-8",
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(formatter)

    logger.addHandler(console_handler)
    logger.addHandler(file_handler)
    logger.propagate = False

    return logger


logger = setup_logger()
