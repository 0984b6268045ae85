"""Debug logging utility for ChabautyLab."""

import logging
import os
import sys
from typing import Optional

LOGGER_NAME = "chabauty"
_FORMAT = "[%(asctime)s.%(msecs)03d] %(levelname)s %(name)s: %(message)s"
_DATEFMT = "%Y-%m-%d %H:%M:%S"


class DebugLogger:
    """Singleton wrapper around the ``chabauty`` logger.

    Warnings go to stderr; stdout stays reserved for command results.
    ``enable_file()`` adds a DEBUG-level ``debug.log``.
    """

    _instance: Optional['DebugLogger'] = None

    @classmethod
    def get_instance(cls) -> 'DebugLogger':
        """Get or create the singleton logger instance."""
        if cls._instance is None:
            cls._instance = cls()
        return cls._instance

    def __init__(self):
        if DebugLogger._instance is not None:
            raise RuntimeError("Use get_instance() to get the logger")

        if getattr(sys, 'frozen', False):
            base_dir = os.path.dirname(sys.executable)
        else:
            base_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        self._log_file_path = os.path.join(base_dir, "debug.log")

        self.logger = logging.getLogger(LOGGER_NAME)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False
        self._console = logging.StreamHandler(sys.stderr)
        self._console.setLevel(logging.WARNING)
        self._console.setFormatter(logging.Formatter(_FORMAT, _DATEFMT))
        self.logger.addHandler(self._console)
        self._file_handler: Optional[logging.Handler] = None

        if os.environ.get("CHABAUTY_DEBUG") == "1":
            self.enable_file()

    @property
    def log_file_path(self) -> str:
        return self._log_file_path

    def enable_file(self, path: Optional[str] = None) -> None:
        """Start writing DEBUG records to ``debug.log`` (or ``path``)."""
        if self._file_handler is not None:
            return
        if path:
            self._log_file_path = path
        try:
            handler = logging.FileHandler(self._log_file_path, encoding="utf-8")
        except OSError as e:
            self.logger.warning("Failed to open log file: %s", e)
            return
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter(_FORMAT, _DATEFMT))
        self.logger.addHandler(handler)
        self._file_handler = handler
        self.log("Session started")

    def log(self, message: str, level: int = logging.DEBUG):
        self.logger.log(level, message)

    def close(self):
        """Detach and close the file handler."""
        if self._file_handler is not None:
            self.log("Session ended")
            self.logger.removeHandler(self._file_handler)
            self._file_handler.close()
            self._file_handler = None


# Convenience function
def log(message: str, level: int = logging.DEBUG):
    """Log a debug message."""
    DebugLogger.get_instance().log(message, level)
