"""
Run-event logging configuration for the CLI

Routes the structured ``primerace.run`` events to a rotating log file and
keeps the console limited to warnings so JSON on stdout stays clean.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional


class RunLoggerSetup:
    """Centralized run-event logger configuration"""

    def __init__(self):
        self.run_logger = None
        self.setup_complete = False

    def setup_run_logging(self, log_file: Optional[str] = None, level: str = "INFO") -> None:
        """
        Attach console and rotating file handlers to ``primerace.run``.

        Args:
            log_file: Optional path to the run log file
            level: Level for the file handler
        """
        if self.setup_complete:
            return

        self.run_logger = logging.getLogger("primerace.run")
        self.run_logger.setLevel(logging.DEBUG)
        self.run_logger.propagate = False
        self.run_logger.handlers.clear()

        detailed_formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        console_formatter = logging.Formatter('%(levelname)s - %(message)s')

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.WARNING)
        console_handler.setFormatter(console_formatter)
        self.run_logger.addHandler(console_handler)

        if log_file is None:
            log_dir = Path.home() / '.primerace' / 'logs'
            log_file = log_dir / 'primerace.log'

        try:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                log_file,
                maxBytes=10 * 1024 * 1024,  # 10MB
                backupCount=5
            )
            file_handler.setLevel(getattr(logging, level.upper(), logging.INFO))
            file_handler.setFormatter(detailed_formatter)
            self.run_logger.addHandler(file_handler)
        except (OSError, IOError) as e:
            # console only
            self.run_logger.warning(f"Could not create run log file: {e}")

        self.setup_complete = True


run_logging = RunLoggerSetup()


def setup_run_logging(log_file: Optional[str] = None, level: str = "INFO") -> None:
    """Setup run-event logging for the CLI application."""
    run_logging.setup_run_logging(log_file, level)


